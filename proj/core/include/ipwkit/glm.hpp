#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/design.hpp"
#include "ipwkit/error.hpp"

namespace ipwkit {

enum class Family { kGaussian, kLogit, kNegBin };

std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);

struct FitOptions {
  double ridge = 1e-6;  // on every coefficient except the intercept
  double tol = 1e-8;    // max-norm of the penalized score
  int max_iter = 100;
  /// Negative binomial only: hold the dispersion fixed instead of fitting.
  std::optional<double> fixed_alpha;
};

struct Convergence {
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Thrown when Newton iterations run out or the line search cannot make
/// progress. Carries the last iterate for diagnosis.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last)
      : NumericalError(what), last_iterate(std::move(last)) {}
  Eigen::VectorXd last_iterate;
};

struct GlmFit {
  Family family = Family::kGaussian;
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  double alpha = 0.0;   // NB2 dispersion: Var = mu + alpha * mu^2
  double sigma2 = 1.0;  // gaussian residual variance, n - p divisor
  double loglik = 0.0;  // unpenalized, at the optimum
  Convergence convergence;
  /// Penalized observed information of beta. For the gaussian family this
  /// is X'X + ridge (unit variance); covariance() applies sigma2.
  Eigen::MatrixXd information;
  Eigen::Index n = 0;

  Eigen::MatrixXd covariance() const;

  /// Inverse-link mean for each row of `x`.
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& x) const;
};

/// Penalized maximum likelihood by Newton's method with step halving.
/// For the negative binomial, beta steps alternate with Newton steps on
/// log(alpha); alpha starts at its method-of-moments value.
GlmFit fit_glm(Family family, const DesignMatrix& design,
               const Eigen::VectorXd& y, const FitOptions& options = {});

// The objective and its gradients, exposed so tests can check them against
// finite differences. `beta` has one entry per column of `x`; column 0 is
// the unpenalized intercept. The gaussian objective is -RSS/2 (unit
// variance), the others are log-likelihoods.
double glm_objective(Family family, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                     double alpha, double ridge);
Eigen::VectorXd glm_score(Family family, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double alpha,
                          double ridge);
/// d objective / d log(alpha) for the negative binomial.
double negbin_log_alpha_score(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double alpha);

struct JointTest {
  double f = 0.0;     // Wald / q
  double wald = 0.0;
  int q = 0;
  double df_denominator = 0.0;  // n - p
  std::vector<std::string> block;
};

/// Wald test that a block of coefficients is zero, reported on the F
/// scale. For the gaussian family this is the classical nested-model F.
JointTest joint_test(const GlmFit& fit, const std::vector<std::string>& block);

struct MultinomFit {
  /// p x (K-1); column k-1 holds the coefficients of class k against the
  /// reference class 0.
  Eigen::MatrixXd coefficients;
  std::vector<std::string> names;
  int num_classes = 0;
  double ridge = 0.0;
  double loglik = 0.0;
  Convergence convergence;
};

MultinomFit fit_multinomial(const DesignMatrix& design,
                            std::span<const int> labels, int num_classes,
                            const FitOptions& options = {});

/// Softmax of the linear predictors with the reference class fixed at zero.
Eigen::MatrixXd predict_proba(const MultinomFit& fit, const Eigen::MatrixXd& x);

double multinomial_objective(const Eigen::MatrixXd& x,
                             std::span<const int> labels, int num_classes,
                             const Eigen::MatrixXd& coefficients, double ridge);
Eigen::MatrixXd multinomial_score(const Eigen::MatrixXd& x,
                                  std::span<const int> labels,
                                  int num_classes,
                                  const Eigen::MatrixXd& coefficients,
                                  double ridge);

}  // namespace ipwkit
