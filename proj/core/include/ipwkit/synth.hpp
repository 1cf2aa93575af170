#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/dataset.hpp"

namespace ipwkit {

enum class Distribution { kPoisson, kNegBin, kBernoulli, kLogNormal };

struct CovariateSpec {
  Covariate covariate = Covariate::kCoauthors;
  Distribution distribution = Distribution::kPoisson;
  double mean = 1.0;        // of the draw before `offset` (Bernoulli: p)
  double dispersion = 0.0;  // NB2 alpha, or log-scale sigma for log-normal
  double offset = 0.0;      // added to count draws (e.g. 1 for co-authors)
  double missing_rate = 0.0;

  /// Theoretical mean and SD of the covariate, used to centre and scale it
  /// inside the assignment and outcome models.
  double center() const;
  double scale() const;
};

/// Treatment assignment is multinomial logit in the scaled covariates,
/// eta_t = intercept_t + sum_j coef(t, j) z_j. Potential outcomes are NB2
/// with log mu_t = base_t + sum_j gamma_j z_j, drawn by inverse CDF from a
/// single uniform per record (common random numbers across treatments).
struct GeneratorConfig {
  enum class Mode { kStandard, kTenPapers };
  Mode mode = Mode::kStandard;
  std::size_t n = 1000;
  std::vector<std::string> categories;
  std::vector<CovariateSpec> covariates;
  Eigen::VectorXd assignment_intercepts;  // K
  Eigen::MatrixXd assignment_coefficients;  // K x J
  Eigen::VectorXd outcome_base;  // K
  Eigen::VectorXd outcome_coefficients;  // J
  double outcome_dispersion = 0.5;

  int num_treatments() const { return static_cast<int>(categories.size()); }
  void validate() const;

  /// Realistic bibliometric covariate scales, K categories named T1..TK, no
  /// confounding and equal baselines.
  static GeneratorConfig null_config(std::size_t n, int num_treatments);
  /// The ten-paper small-world example: one binary confounder, fixed cells.
  static GeneratorConfig ten_papers();
};

struct GroundTruth {
  Eigen::MatrixXd potential_outcomes;  // N x K
  Eigen::VectorXd realized;            // N
  std::vector<int> assignment;         // N
  /// ace(s, t) = mean over units of Y_i(s) - Y_i(t).
  Eigen::MatrixXd ace;
  /// Same contrast on the conditional means mu_i(t) instead of the draws.
  Eigen::MatrixXd expected_ace;
  std::vector<double> naive_means;  // realized outcome mean per treatment
};

struct SyntheticCorpus {
  Corpus corpus;
  GroundTruth truth;
};

SyntheticCorpus generate(const GeneratorConfig& config, std::uint64_t seed);

/// Column schema matching the CSV written for synthetic corpora.
ColumnSchema synthetic_schema(const GeneratorConfig& config);

/// Inverse CDF of NB2 (alpha > 0) or Poisson (alpha == 0) at u in (0, 1).
std::int64_t negbin_quantile(double u, double mu, double alpha);

}  // namespace ipwkit
