#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/dataset.hpp"
#include "ipwkit/glm.hpp"
#include "ipwkit/propensity.hpp"

namespace ipwkit {

using FamilyMap = std::map<Covariate, Family>;

/// Counts -> negbin, 0/1 flags -> logit, number of subject categories and
/// the (real-valued) impact factor -> gaussian.
Family default_family(Covariate c);

struct BalanceCheck {
  Family family = Family::kGaussian;
  JointTest test;  // on the K-1 treatment dummies
  /// Per treatment: mean prediction over the whole sample with every row
  /// assigned to that treatment and the score columns at observed values.
  std::vector<double> adjusted_means;
};

/// Regresses one covariate on K-1 treatment dummies and, when
/// `propensities` is given, K-1 score columns (the reference category's
/// column is omitted because rows sum to one).
BalanceCheck balance_check(const Eigen::VectorXd& covariate, Family family,
                           std::span<const int> labels, int num_treatments,
                           const PropensityMatrix* propensities,
                           const FitOptions& options = {});

struct BalanceRow {
  Covariate covariate;
  std::string name;
  Family family = Family::kGaussian;
  double f_before = 0.0;
  double f_after = 0.0;
  double reduction_percent = 0.0;  // 100 (1 - F_after / F_before)
  int q = 0;
  double df_before = 0.0;
  double df_after = 0.0;
  std::vector<double> means_before;
  std::vector<double> means_after;
};

struct BalanceReport {
  std::vector<BalanceRow> rows;
  std::vector<std::string> scheme;
  std::size_t n = 0;
  int model_size = 0;  // coefficients in the adjusted model
  std::vector<std::string> skipped;  // constant covariates
};

/// One balance_check per non-constant loaded covariate, all with or all
/// without the scores.
struct BalancePass {
  std::vector<Covariate> covariates;
  std::vector<BalanceCheck> checks;
  std::vector<std::string> skipped;  // constant covariates
};

BalancePass balance_pass(const ImputedCorpus& corpus,
                         const PropensityMatrix* propensities,
                         const FamilyMap& families = {},
                         const FitOptions& options = {});

/// Pairs an unadjusted and an adjusted pass over the same corpus.
BalanceReport combine_balance(const ImputedCorpus& corpus,
                              const BalancePass& before,
                              const BalancePass& after);

/// Runs balance_check without and with the scores for every non-constant
/// loaded covariate, using the completed (imputed) values.
BalanceReport balance_report(const ImputedCorpus& corpus,
                             const PropensityMatrix& propensities,
                             const FamilyMap& families = {},
                             const FitOptions& options = {});

}  // namespace ipwkit
