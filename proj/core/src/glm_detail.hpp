#pragma once

#include <Eigen/Dense>

namespace ipwkit::detail {

// x' diag(w) x, symmetrized.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);

// ridge/2 * |beta[1:]|^2; the intercept (index 0) is never penalized.
double ridge_penalty(const Eigen::VectorXd& beta, double ridge);

void add_ridge(Eigen::VectorXd& score, Eigen::MatrixXd& info,
               const Eigen::VectorXd& beta, double ridge);

}  // namespace ipwkit::detail
