#include <cmath>
#include <string>

#include "glm_detail.hpp"
#include "ipwkit/glm.hpp"
#include "ipwkit/summation.hpp"
#include "newton.hpp"

namespace ipwkit {

namespace {

void check_labels(const Eigen::MatrixXd& x, std::span<const int> labels,
                  int num_classes) {
  if (num_classes < 2) throw DataError("multinomial fit needs at least 2 classes");
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw DataError("design has " + std::to_string(x.rows()) +
                    " rows but there are " + std::to_string(labels.size()) +
                    " labels");
  for (int l : labels)
    if (l < 0 || l >= num_classes)
      throw DataError("label " + std::to_string(l) + " outside [0, " +
                      std::to_string(num_classes) + ")");
}

// Row-wise log of the softmax denominator with the reference logit 0.
Eigen::VectorXd log_normalizer(const Eigen::MatrixXd& eta) {
  Eigen::VectorXd lse(eta.rows());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double m = std::max(0.0, eta.row(i).maxCoeff());
    double s = std::exp(-m);
    for (Eigen::Index k = 0; k < eta.cols(); ++k) s += std::exp(eta(i, k) - m);
    lse[i] = m + std::log(s);
  }
  return lse;
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const Eigen::VectorXd& v,
                                            Eigen::Index p) {
  return {v.data(), p, v.size() / p};
}

double objective_of(const Eigen::MatrixXd& x, std::span<const int> labels,
                    const Eigen::MatrixXd& b, double ridge) {
  const Eigen::MatrixXd eta = x * b;
  const Eigen::VectorXd lse = log_normalizer(eta);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    s += (l > 0 ? eta(i, l - 1) : 0.0) - lse[i];
  }
  double penalty = 0.0;
  for (Eigen::Index k = 0; k < b.cols(); ++k)
    penalty += detail::ridge_penalty(b.col(k), ridge);
  return s.value() - penalty;
}

detail::Evaluation evaluate(const Eigen::MatrixXd& x,
                            std::span<const int> labels, int num_classes,
                            const Eigen::VectorXd& params, double ridge) {
  const Eigen::Index p = x.cols();
  const Eigen::Index km1 = num_classes - 1;
  const auto b = as_matrix(params, p);
  const Eigen::MatrixXd eta = x * b;
  const Eigen::VectorXd lse = log_normalizer(eta);

  Eigen::MatrixXd prob(x.rows(), km1);
  Eigen::MatrixXd resid(x.rows(), km1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < km1; ++k) {
      prob(i, k) = std::exp(eta(i, k) - lse[i]);
      resid(i, k) = (l == k + 1 ? 1.0 : 0.0) - prob(i, k);
    }
  }

  detail::Evaluation ev;
  ev.objective = objective_of(x, labels, b, ridge);
  ev.score.resize(p * km1);
  ev.information.resize(p * km1, p * km1);
  for (Eigen::Index j = 0; j < km1; ++j) {
    Eigen::VectorXd sj = x.transpose() * resid.col(j);
    for (Eigen::Index c = 1; c < p; ++c) sj[c] -= ridge * b(c, j);
    ev.score.segment(j * p, p) = sj;
    for (Eigen::Index k = j; k < km1; ++k) {
      Eigen::VectorXd w = prob.col(j).cwiseProduct(
          (j == k ? Eigen::VectorXd::Ones(x.rows()) : Eigen::VectorXd::Zero(x.rows())) -
          prob.col(k));
      Eigen::MatrixXd block = detail::weighted_gram(x, w);
      if (j == k)
        for (Eigen::Index c = 1; c < p; ++c) block(c, c) += ridge;
      ev.information.block(j * p, k * p, p, p) = block;
      if (k != j) ev.information.block(k * p, j * p, p, p) = block.transpose();
    }
  }
  return ev;
}

}  // namespace

double multinomial_objective(const Eigen::MatrixXd& x,
                             std::span<const int> labels, int num_classes,
                             const Eigen::MatrixXd& coefficients,
                             double ridge) {
  check_labels(x, labels, num_classes);
  return objective_of(x, labels, coefficients, ridge);
}

Eigen::MatrixXd multinomial_score(const Eigen::MatrixXd& x,
                                  std::span<const int> labels,
                                  int num_classes,
                                  const Eigen::MatrixXd& coefficients,
                                  double ridge) {
  check_labels(x, labels, num_classes);
  const Eigen::VectorXd params =
      Eigen::Map<const Eigen::VectorXd>(coefficients.data(), coefficients.size());
  const auto ev = evaluate(x, labels, num_classes, params, ridge);
  return as_matrix(ev.score, x.cols());
}

MultinomFit fit_multinomial(const DesignMatrix& design,
                            std::span<const int> labels, int num_classes,
                            const FitOptions& options) {
  const Eigen::MatrixXd& x = design.x;
  check_labels(x, labels, num_classes);
  if (options.ridge < 0.0) throw DataError("ridge must be non-negative");
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  for (int k = 0; k < num_classes; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0.0)
      throw DataError("treatment class " + std::to_string(k) + " is empty");

  const Eigen::Index p = x.cols();
  // Start from the marginal model: intercepts are log frequency ratios.
  Eigen::VectorXd params = Eigen::VectorXd::Zero(p * (num_classes - 1));
  for (int k = 1; k < num_classes; ++k)
    params[(k - 1) * p] = std::log(counts[static_cast<std::size_t>(k)] / counts[0]);

  MultinomFit fit;
  fit.names = design.names;
  fit.num_classes = num_classes;
  fit.ridge = options.ridge;
  auto full = [&](const Eigen::VectorXd& v) {
    return evaluate(x, labels, num_classes, v, options.ridge);
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    return objective_of(x, labels, as_matrix(v, p), options.ridge);
  };
  detail::newton_maximize(params, full, objective, options, "multinomial",
                          fit.convergence);
  fit.coefficients = as_matrix(params, p);

  if (options.ridge == 0.0) {
    const double max_eta = (x * fit.coefficients).cwiseAbs().maxCoeff();
    if (max_eta > 30.0)
      throw ConvergenceError(
          "multinomial: fitted probabilities reach 0 or 1 (quasi-separation); "
          "refit with ridge > 0",
          params);
  }
  fit.loglik = objective_of(x, labels, fit.coefficients, 0.0);
  return fit;
}

Eigen::MatrixXd predict_proba(const MultinomFit& fit, const Eigen::MatrixXd& x) {
  if (x.cols() != fit.coefficients.rows())
    throw DataError("design has " + std::to_string(x.cols()) +
                    " columns but the model has " +
                    std::to_string(fit.coefficients.rows()));
  const Eigen::MatrixXd eta = x * fit.coefficients;
  const Eigen::VectorXd lse = log_normalizer(eta);
  Eigen::MatrixXd prob(x.rows(), fit.num_classes);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    prob(i, 0) = std::exp(-lse[i]);
    for (Eigen::Index k = 1; k < fit.num_classes; ++k)
      prob(i, k) = std::exp(eta(i, k - 1) - lse[i]);
  }
  return prob;
}

}  // namespace ipwkit
