#include "ipwkit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glm_detail.hpp"
#include "ipwkit/summation.hpp"
#include "newton.hpp"

namespace ipwkit {

namespace detail {

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& w) {
  Eigen::MatrixXd g(x.cols(), x.cols());
  g.noalias() = (x.array().colwise() * w.array()).matrix().transpose() * x;
  return 0.5 * (g + g.transpose());
}

double ridge_penalty(const Eigen::VectorXd& beta, double ridge) {
  if (ridge == 0.0 || beta.size() < 2) return 0.0;
  return 0.5 * ridge * beta.tail(beta.size() - 1).squaredNorm();
}

void add_ridge(Eigen::VectorXd& score, Eigen::MatrixXd& info,
               const Eigen::VectorXd& beta, double ridge) {
  for (Eigen::Index j = 1; j < beta.size(); ++j) {
    score[j] -= ridge * beta[j];
    info(j, j) += ridge;
  }
}

}  // namespace detail

namespace {

constexpr double kEtaClamp = 700.0;
constexpr double kMinLogAlpha = -23.025850929940457;  // log(1e-10)
constexpr double kMaxLogAlpha = 13.815510557964274;   // log(1e6)

double softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

// h(x) = log1p(x)/x^2 - 1/(x(1+x)) and its derivative; the alpha-score of
// the NB2 log-likelihood contains mu^2 h(alpha mu). Both cancel badly near
// zero, where the alternating series is used instead.
double nb_h(double x) {
  if (x < 0.05) {
    double sum = 0.0, pow = 1.0;
    for (int n = 1; n <= 16; ++n, pow *= x)
      sum += ((n % 2) ? 1.0 : -1.0) * n * pow / (n + 1);
    return sum;
  }
  return std::log1p(x) / (x * x) - 1.0 / (x * (1.0 + x));
}

double nb_h_prime(double x) {
  if (x < 0.05) {
    double sum = 0.0, pow = 1.0;
    for (int n = 2; n <= 17; ++n, pow *= x)
      sum += ((n % 2) ? 1.0 : -1.0) * n * (n - 1) * pow / (n + 1);
    return sum;
  }
  const double x2 = x * x;
  return -2.0 * std::log1p(x) / (x2 * x) + 1.0 / (x2 * (1.0 + x)) +
         (1.0 + 2.0 * x) / (x2 * (1.0 + x) * (1.0 + x));
}

// NB2 log-likelihood of one integer count, stable as alpha -> 0 (where it
// tends to the Poisson log-likelihood).
double nb_loglik(double y, double mu, double alpha) {
  const auto yi = static_cast<long>(y);
  double s = 0.0;
  for (long k = 1; k < yi; ++k) s += std::log1p(alpha * static_cast<double>(k));
  const double x = alpha * mu;
  const double l1 = std::log1p(x);
  const double mu_term = x > 0.0 ? mu * (l1 / x) : mu;  // log1p(alpha mu)/alpha
  return s + (y > 0 ? y * std::log(mu) : 0.0) - y * l1 - mu_term -
         std::lgamma(y + 1.0);
}

struct AlphaDerivs {
  double score = 0.0;  // d/d log(alpha)
  double curvature = 0.0;  // d^2/d log(alpha)^2
};

AlphaDerivs nb_alpha_derivs(const Eigen::VectorXd& y,
                            const Eigen::VectorXd& mu, double alpha) {
  CompensatedSum g, h;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto yi = static_cast<long>(y[i]);
    const double m = mu[i];
    const double x = alpha * m;
    double gi = 0.0, hi = 0.0;
    for (long k = 1; k < yi; ++k) {
      const double d = 1.0 + alpha * static_cast<double>(k);
      gi += static_cast<double>(k) / d;
      hi -= static_cast<double>(k * k) / (d * d);
    }
    gi += -y[i] * m / (1.0 + x) + m * m * nb_h(x);
    hi += y[i] * m * m / ((1.0 + x) * (1.0 + x)) + m * m * m * nb_h_prime(x);
    g += gi;
    h += hi;
  }
  return {alpha * g.value(), alpha * g.value() + alpha * alpha * h.value()};
}

Eigen::VectorXd means(Family family, const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    switch (family) {
      case Family::kGaussian: mu[i] = eta[i]; break;
      case Family::kLogit: mu[i] = logistic(eta[i]); break;
      case Family::kNegBin: mu[i] = std::exp(clamp_eta(eta[i])); break;
    }
  }
  return mu;
}

double unpenalized(Family family, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                   double alpha) {
  const Eigen::VectorXd eta = x * beta;
  CompensatedSum s;
  switch (family) {
    case Family::kGaussian:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y[i] - eta[i];
        s += -0.5 * r * r;
      }
      break;
    case Family::kLogit:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        s += y[i] * eta[i] - softplus(eta[i]);
      break;
    case Family::kNegBin:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        s += nb_loglik(y[i], std::exp(clamp_eta(eta[i])), alpha);
      break;
  }
  return s.value();
}

detail::Evaluation evaluate(Family family, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta, double alpha,
                            double ridge) {
  detail::Evaluation ev;
  ev.objective = unpenalized(family, x, y, beta, alpha) -
                 detail::ridge_penalty(beta, ridge);
  const Eigen::VectorXd mu = means(family, x * beta);
  Eigen::VectorXd resid(y.size()), w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    switch (family) {
      case Family::kGaussian:
        resid[i] = y[i] - mu[i];
        w[i] = 1.0;
        break;
      case Family::kLogit:
        resid[i] = y[i] - mu[i];
        w[i] = mu[i] * (1.0 - mu[i]);
        break;
      case Family::kNegBin: {
        const double d = 1.0 + alpha * mu[i];
        resid[i] = (y[i] - mu[i]) / d;
        w[i] = mu[i] * (1.0 + alpha * y[i]) / (d * d);
        break;
      }
    }
  }
  ev.score = x.transpose() * resid;
  ev.information = detail::weighted_gram(x, w);
  detail::add_ridge(ev.score, ev.information, beta, ridge);
  return ev;
}

void check_outcome(Family family, const Eigen::VectorXd& y) {
  bool all_equal = true;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw DataError("outcome contains non-finite values");
    if (y[i] != y[0]) all_equal = false;
    if (family == Family::kLogit && y[i] != 0.0 && y[i] != 1.0)
      throw DataError("logit outcome must be 0/1");
    if (family == Family::kNegBin && (y[i] < 0.0 || y[i] != std::floor(y[i])))
      throw DataError("negative binomial outcome must be a non-negative integer");
  }
  if (family == Family::kLogit && all_equal)
    throw DataError("logit outcome is constant");
  if (family == Family::kNegBin && all_equal && y[0] == 0.0)
    throw DataError("negative binomial outcome is identically zero");
}

double mean_of(const Eigen::VectorXd& y) {
  CompensatedSum s;
  for (double v : y) s += v;
  return s.value() / static_cast<double>(y.size());
}

void check_separation(const GlmFit& fit, const Eigen::MatrixXd& x,
                      double ridge) {
  if (ridge > 0.0 || fit.family != Family::kLogit) return;
  const double max_eta = (x * fit.beta).cwiseAbs().maxCoeff();
  if (max_eta > 30.0)
    throw ConvergenceError(
        "logit: fitted probabilities reach 0 or 1 (quasi-separation); refit "
        "with ridge > 0",
        fit.beta);
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kLogit: return "logit";
    case Family::kNegBin: return "negbin";
  }
  return "?";
}

std::optional<Family> family_from_string(std::string_view s) {
  if (s == "gaussian") return Family::kGaussian;
  if (s == "logit") return Family::kLogit;
  if (s == "negbin") return Family::kNegBin;
  return std::nullopt;
}

double glm_objective(Family family, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                     double alpha, double ridge) {
  return unpenalized(family, x, y, beta, alpha) -
         detail::ridge_penalty(beta, ridge);
}

Eigen::VectorXd glm_score(Family family, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double alpha,
                          double ridge) {
  return evaluate(family, x, y, beta, alpha, ridge).score;
}

double negbin_log_alpha_score(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double alpha) {
  return nb_alpha_derivs(y, means(Family::kNegBin, x * beta), alpha).score;
}

Eigen::VectorXd GlmFit::predict_mean(const Eigen::MatrixXd& x) const {
  if (x.cols() != beta.size())
    throw DataError("design width does not match the fitted model");
  return means(family, x * beta);
}

Eigen::MatrixXd GlmFit::covariance() const {
  const Eigen::MatrixXd inv =
      information.llt().solve(Eigen::MatrixXd::Identity(beta.size(), beta.size()));
  return family == Family::kGaussian ? Eigen::MatrixXd(sigma2 * inv) : inv;
}

GlmFit fit_glm(Family family, const DesignMatrix& design,
               const Eigen::VectorXd& y, const FitOptions& options) {
  const Eigen::MatrixXd& x = design.x;
  if (x.rows() != y.size())
    throw DataError("design has " + std::to_string(x.rows()) +
                    " rows but outcome has " + std::to_string(y.size()));
  if (x.rows() == 0) throw DataError("cannot fit a model to zero rows");
  if (options.ridge < 0.0) throw DataError("ridge must be non-negative");
  check_outcome(family, y);

  const std::string what(to_string(family));
  GlmFit fit;
  fit.family = family;
  fit.names = design.names;
  fit.n = x.rows();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  const double ybar = mean_of(y);

  if (family != Family::kNegBin) {
    if (family == Family::kLogit) beta[0] = std::log(ybar / (1.0 - ybar));
    auto full = [&](const Eigen::VectorXd& b) {
      return evaluate(family, x, y, b, 0.0, options.ridge);
    };
    auto objective = [&](const Eigen::VectorXd& b) {
      return glm_objective(family, x, y, b, 0.0, options.ridge);
    };
    const auto ev = detail::newton_maximize(beta, full, objective, options,
                                            what, fit.convergence);
    fit.beta = beta;
    fit.information = ev.information;
    check_separation(fit, x, options.ridge);
  } else {
    beta[0] = std::log(ybar);
    double alpha = 0.0;
    if (options.fixed_alpha) {
      if (*options.fixed_alpha < 0.0) throw DataError("alpha must be >= 0");
      alpha = *options.fixed_alpha;
    } else {
      // Method of moments around the intercept-only fit.
      CompensatedSum num;
      for (double v : y) num += (v - ybar) * (v - ybar) - v;
      alpha = num.value() / (static_cast<double>(y.size()) * ybar * ybar);
      alpha = std::clamp(alpha, 1e-4, 1e3);
    }
    double theta = std::log(std::max(alpha, 1e-300));

    auto objective = [&](const Eigen::VectorXd& b) {
      return glm_objective(family, x, y, b, alpha, options.ridge);
    };
    int forced = 0;
    for (int it = 0;; ++it) {
      const auto ev = evaluate(family, x, y, beta, alpha, options.ridge);
      if (!std::isfinite(ev.objective))
        throw ConvergenceError("negbin: objective is not finite", beta);
      const double g_beta = ev.score.lpNorm<Eigen::Infinity>();
      bool beta_done = g_beta <= options.tol;
      Eigen::VectorXd d;
      if (!beta_done) {
        d = detail::newton_direction(ev, what, options.ridge);
        beta_done = detail::at_rounding_floor(ev.score.dot(d), ev.objective);
      }
      AlphaDerivs ad;
      bool theta_done = true;
      bool at_bound = false;
      if (!options.fixed_alpha) {
        ad = nb_alpha_derivs(y, means(family, x * beta), alpha);
        at_bound = (theta <= kMinLogAlpha && ad.score <= 0.0) ||
                   (theta >= kMaxLogAlpha && ad.score >= 0.0);
        theta_done = std::abs(ad.score) <= options.tol || at_bound ||
                     (ad.curvature < 0.0 &&
                      detail::at_rounding_floor(ad.score * ad.score / -ad.curvature,
                                                ev.objective));
      }
      fit.convergence.iterations = it;
      fit.convergence.gradient_norm =
          at_bound || options.fixed_alpha ? g_beta : std::max(g_beta, std::abs(ad.score));
      if ((beta_done && theta_done) || forced >= detail::kMaxForcedSteps) {
        fit.information = ev.information;
        break;
      }
      if (it >= options.max_iter)
        throw ConvergenceError(
            "negbin: no convergence after " + std::to_string(options.max_iter) +
                " iterations (gradient norm " +
                std::to_string(fit.convergence.gradient_norm) + ")",
            beta);

      bool forced_step = false;
      if (!beta_done)
        forced_step = detail::damped_step(beta, ev, d, objective, what) ==
                      detail::StepResult::kForced;
      if (!theta_done) {
        if (!beta_done) ad = nb_alpha_derivs(y, means(family, x * beta), alpha);
        const double base = glm_objective(family, x, y, beta, alpha, options.ridge);
        const double g = ad.score;
        double step = ad.curvature < 0.0 ? -g / ad.curvature : (g > 0 ? 1.0 : -1.0);
        step = std::clamp(step, -5.0, 5.0);
        const double full_step = step;
        bool moved = ad.curvature < 0.0 &&
                     detail::below_resolution(g * g / -ad.curvature, base);
        if (moved) {
          theta = std::clamp(theta + full_step, kMinLogAlpha, kMaxLogAlpha);
          alpha = std::exp(theta);
        }
        for (int h = 0; !moved && h < 60; ++h, step *= 0.5) {
          const double trial_theta =
              std::clamp(theta + step, kMinLogAlpha, kMaxLogAlpha);
          if (trial_theta == theta) break;
          const double trial_alpha = std::exp(trial_theta);
          const double v =
              glm_objective(family, x, y, beta, trial_alpha, options.ridge);
          if (std::isfinite(v) && v >= base) {
            moved = true;
            theta = trial_theta;
            alpha = trial_alpha;
            break;
          }
        }
        if (!moved) {
          if (ad.curvature >= 0.0 || g * g / -ad.curvature > 1e-10 * (1.0 + std::abs(base)))
            throw ConvergenceError("negbin: dispersion line search failed", beta);
          // Same rounding-level case as for beta.
          theta = std::clamp(theta + full_step, kMinLogAlpha, kMaxLogAlpha);
          alpha = std::exp(theta);
          forced_step = true;
        }
      }
      forced = forced_step ? forced + 1 : 0;
    }
    fit.beta = beta;
    fit.alpha = alpha;
  }

  fit.loglik = unpenalized(family, x, y, fit.beta, fit.alpha);
  if (family == Family::kGaussian) {
    const double rss = -2.0 * fit.loglik;
    const double n = static_cast<double>(x.rows());
    const double df = n - static_cast<double>(x.cols());
    fit.sigma2 = df > 0 ? rss / df : std::numeric_limits<double>::quiet_NaN();
    const double s2_ml = rss / n;
    fit.loglik = s2_ml > 0
                     ? -0.5 * n * (std::log(2.0 * M_PI * s2_ml) + 1.0)
                     : std::numeric_limits<double>::infinity();
  }
  return fit;
}

JointTest joint_test(const GlmFit& fit, const std::vector<std::string>& block) {
  if (block.empty()) throw DataError("joint test needs at least one coefficient");
  std::vector<Eigen::Index> idx;
  for (const auto& name : block) {
    auto it = std::find(fit.names.begin(), fit.names.end(), name);
    if (it == fit.names.end())
      throw DataError("coefficient not in model: " + name);
    idx.push_back(static_cast<Eigen::Index>(it - fit.names.begin()));
  }
  JointTest t;
  t.block = block;
  t.q = static_cast<int>(idx.size());
  t.df_denominator = static_cast<double>(fit.n - fit.beta.size());
  if (t.df_denominator <= 0)
    throw NumericalError("joint test: no residual degrees of freedom");

  const auto q = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd b(q);
  for (Eigen::Index i = 0; i < q; ++i) b[i] = fit.beta[idx[static_cast<std::size_t>(i)]];

  if (fit.family == Family::kGaussian && !(fit.sigma2 > 0.0)) {
    // Exact fit: the block either vanishes or is infinitely significant.
    const double scale = 1.0 + fit.beta.cwiseAbs().maxCoeff();
    t.wald = b.cwiseAbs().maxCoeff() <= 1e-9 * scale
                 ? 0.0
                 : std::numeric_limits<double>::infinity();
    t.f = t.wald / q;
    return t;
  }

  const Eigen::MatrixXd cov = fit.covariance();
  Eigen::MatrixXd vb(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j)
      vb(i, j) = cov(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  Eigen::LLT<Eigen::MatrixXd> llt(vb);
  if (llt.info() != Eigen::Success || !b.allFinite())
    throw NumericalError("joint test: block covariance is singular");
  t.wald = std::max(0.0, b.dot(llt.solve(b)));
  t.f = t.wald / static_cast<double>(q);
  return t;
}

}  // namespace ipwkit
