#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ipwkit/glm.hpp"

namespace ipwkit::detail {

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;  // negative Hessian of the objective
};

inline std::string singular_message(const std::string& what, double ridge) {
  std::string msg = what + ": information matrix is singular";
  if (ridge <= 0.0) msg += "; refit with ridge > 0";
  return msg;
}

// Newton direction from a positive definite information matrix. Throws
// when the Cholesky factorization fails or is numerically rank deficient.
inline Eigen::VectorXd newton_direction(const Evaluation& ev,
                                        const std::string& what,
                                        double ridge) {
  Eigen::LLT<Eigen::MatrixXd> llt(ev.information);
  if (llt.info() != Eigen::Success)
    throw NumericalError(singular_message(what, ridge));
  const Eigen::VectorXd l = llt.matrixLLT().diagonal();
  const double max_diag = ev.information.diagonal().maxCoeff();
  if (!(l.minCoeff() * l.minCoeff() > 1e-14 * max_diag))
    throw NumericalError(singular_message(what, ridge));
  return llt.solve(ev.score);
}

// True when the Newton decrement g'H^-1 g is too small for the objective to
// register: the score is then at its rounding floor, which for large
// samples can sit above any fixed absolute tolerance.
inline bool at_rounding_floor(double decrement, double objective) {
  return decrement <= 1e-20 * (1.0 + std::abs(objective));
}

// True when the predicted gain of a Newton step is too small for the
// objective to resolve; the quadratic model is then more reliable than a
// comparison of objective values.
inline bool below_resolution(double decrement, double objective) {
  return decrement <= 1e-12 * (1.0 + std::abs(objective));
}

enum class StepResult { kMoved, kForced };

// Consecutive unguarded steps tolerated before a rounding-level stall is
// accepted as convergence.
inline constexpr int kMaxForcedSteps = 3;

// One damped Newton step: full step, then halvings until the objective
// does not decrease. When no halving helps but the Newton decrement is at
// rounding level, the objective cannot resolve the step, so the full step
// is taken unguarded.
template <class Objective>
StepResult damped_step(Eigen::VectorXd& x, const Evaluation& ev,
                       const Eigen::VectorXd& direction, Objective&& objective,
                       const std::string& what) {
  if (below_resolution(ev.score.dot(direction), ev.objective)) {
    x += direction;
    return StepResult::kMoved;
  }
  double step = 1.0;
  for (int h = 0; h < 60; ++h, step *= 0.5) {
    const Eigen::VectorXd trial = x + step * direction;
    if (trial == x) break;
    const double value = objective(trial);
    if (std::isfinite(value) && value >= ev.objective) {
      x = trial;
      return StepResult::kMoved;
    }
  }
  const double decrement = ev.score.dot(direction);
  if (decrement <= 1e-10 * (1.0 + std::abs(ev.objective))) {
    x += direction;
    return StepResult::kForced;
  }
  throw ConvergenceError(what + ": line search failed", x);
}

// Maximizes a concave objective. `full(x)` returns value, score and
// information; `objective(x)` returns the value only.
template <class Full, class Objective>
Evaluation newton_maximize(Eigen::VectorXd& x, Full&& full,
                           Objective&& objective, const FitOptions& options,
                           const std::string& what, Convergence& record) {
  int forced = 0;
  for (int it = 0;; ++it) {
    Evaluation ev = full(x);
    record.iterations = it;
    record.gradient_norm = ev.score.template lpNorm<Eigen::Infinity>();
    if (!std::isfinite(ev.objective))
      throw ConvergenceError(what + ": objective is not finite", x);
    if (record.gradient_norm <= options.tol) return ev;
    if (it >= options.max_iter)
      throw ConvergenceError(what + ": no convergence after " +
                                 std::to_string(options.max_iter) +
                                 " iterations (gradient norm " +
                                 std::to_string(record.gradient_norm) + ")",
                             x);
    const Eigen::VectorXd d = newton_direction(ev, what, options.ridge);
    if (forced >= kMaxForcedSteps || at_rounding_floor(ev.score.dot(d), ev.objective))
      return ev;
    forced = damped_step(x, ev, d, objective, what) == StepResult::kForced ? forced + 1 : 0;
  }
}

}  // namespace ipwkit::detail
