#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/propensity.hpp"

namespace ipwkit {

/// Inverse-probability weights: w_i = 1 / P[i, label(i)].
struct WeightVector {
  Eigen::VectorXd weights;
  std::vector<double> category_sums;
};

WeightVector ipw_weights(const PropensityMatrix& p, std::span<const int> labels);

struct CategoryEstimate {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample SD, n-1 divisor (0 when n = 1)
  double weighted_mean = 0.0;
  double weighted_sd = 0.0;  // divisor is the sum of weights
  double weight_sum = 0.0;
  double ess = 0.0;  // (sum w)^2 / sum w^2
};

struct IpwEstimates {
  std::vector<CategoryEstimate> categories;

  int num_treatments() const { return static_cast<int>(categories.size()); }
};

IpwEstimates ipw_estimates(const Eigen::VectorXd& y, const WeightVector& w,
                           std::span<const int> labels, int num_treatments);

enum class EffectBasis { kWeighted, kUnweighted };

/// values(s, t) = mean_s - mean_t.
struct AceMatrix {
  Eigen::MatrixXd values;

  double operator()(int s, int t) const { return values(s, t); }
};

AceMatrix ace_matrix(const IpwEstimates& est,
                     EffectBasis basis = EffectBasis::kWeighted);

/// Two-treatment effect of treatment 0 against treatment 1 adjusted for one
/// discrete confounder: the within-stratum mean differences averaged with
/// the marginal stratum frequencies as weights.
double stratified_ace(const Eigen::VectorXd& y, std::span<const int> stratum,
                      std::span<const int> labels);

/// Phi coefficient of two 0/1 vectors.
double phi_coefficient(std::span<const int> a, std::span<const int> b);

}  // namespace ipwkit
