#include "ipwkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipwkit/error.hpp"
#include "ipwkit/rng.hpp"
#include "ipwkit/summation.hpp"

namespace ipwkit {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& eta) {
  const double m = eta.maxCoeff();
  Eigen::VectorXd p = (eta.array() - m).exp();
  return p / p.sum();
}

int draw_category(const Eigen::VectorXd& p, double u) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t + 1 < p.size(); ++t) {
    acc += p[t];
    if (u < acc) return static_cast<int>(t);
  }
  return static_cast<int>(p.size() - 1);
}

double draw_covariate(const CovariateSpec& s, Rng& rng) {
  switch (s.distribution) {
    case Distribution::kPoisson:
      return s.offset + static_cast<double>(negbin_quantile(rng.uniform_open(), s.mean, 0.0));
    case Distribution::kNegBin:
      return s.offset +
             static_cast<double>(negbin_quantile(rng.uniform_open(), s.mean, s.dispersion));
    case Distribution::kBernoulli:
      return rng.bernoulli(s.mean) ? 1.0 : 0.0;
    case Distribution::kLogNormal: {
      const double mu = std::log(s.mean) - 0.5 * s.dispersion * s.dispersion;
      // Rounded to 3 decimals, as impact factors are published.
      return std::round(std::exp(mu + s.dispersion * rng.normal()) * 1000.0) / 1000.0;
    }
  }
  return 0.0;
}

}  // namespace

double CovariateSpec::center() const {
  switch (distribution) {
    case Distribution::kPoisson:
    case Distribution::kNegBin: return mean + offset;
    case Distribution::kBernoulli:
    case Distribution::kLogNormal: return mean;
  }
  return mean;
}

double CovariateSpec::scale() const {
  switch (distribution) {
    case Distribution::kPoisson: return std::sqrt(mean);
    case Distribution::kNegBin: return std::sqrt(mean + dispersion * mean * mean);
    case Distribution::kBernoulli: return std::sqrt(mean * (1.0 - mean));
    case Distribution::kLogNormal:
      return mean * std::sqrt(std::expm1(dispersion * dispersion));
  }
  return 1.0;
}

std::int64_t negbin_quantile(double u, double mu, double alpha) {
  if (!(u > 0.0 && u < 1.0)) throw DataError("quantile level must be in (0,1)");
  if (!(mu >= 0.0) || !(alpha >= 0.0)) throw DataError("invalid NB parameters");
  if (mu == 0.0) return 0;
  // log p(0), then the pmf recursion p(k+1) = p(k) * ratio(k) in log space.
  double logp;
  double log_q;  // log(mu / (r + mu)) or log(mu) for Poisson
  const double r = alpha > 0.0 ? 1.0 / alpha : 0.0;
  if (alpha > 0.0) {
    logp = -r * std::log1p(alpha * mu);
    log_q = std::log(alpha * mu / (1.0 + alpha * mu));
  } else {
    logp = -mu;
    log_q = std::log(mu);
  }
  double cdf = 0.0;
  const std::int64_t cap = 10'000'000;
  for (std::int64_t k = 0; k < cap; ++k) {
    cdf += std::exp(logp);
    if (u < cdf) return k;
    const double kk = static_cast<double>(k);
    logp += (alpha > 0.0 ? std::log((kk + r) / (kk + 1.0)) : -std::log(kk + 1.0)) + log_q;
    if (cdf > 0.5 && std::exp(logp) < 1e-300) return k + 1;
  }
  return cap;
}

void GeneratorConfig::validate() const {
  const auto k = static_cast<Eigen::Index>(categories.size());
  const auto j = static_cast<Eigen::Index>(covariates.size());
  if (k < 2) throw DataError("generator needs at least 2 categories");
  if (n < categories.size()) throw DataError("generator needs n >= K");
  if (mode == Mode::kTenPapers) return;
  if (assignment_intercepts.size() != k || assignment_coefficients.rows() != k ||
      assignment_coefficients.cols() != j)
    throw DataError("assignment model has the wrong shape");
  if (outcome_base.size() != k || outcome_coefficients.size() != j)
    throw DataError("outcome model has the wrong shape");
  if (!(outcome_dispersion >= 0.0)) throw DataError("outcome dispersion must be >= 0");
  for (const auto& s : covariates) {
    const std::string name(info(s.covariate).key);
    if (!(s.missing_rate >= 0.0 && s.missing_rate < 1.0))
      throw DataError(name + ": missing rate must be in [0, 1)");
    if (s.distribution == Distribution::kBernoulli) {
      if (!(s.mean > 0.0 && s.mean < 1.0))
        throw DataError(name + ": Bernoulli p must be in (0, 1)");
      if (info(s.covariate).kind != CovariateKind::kBinary)
        throw DataError(name + ": Bernoulli draws need a 0/1 covariate");
    } else {
      if (!(s.mean > 0.0)) throw DataError(name + ": mean must be positive");
      if (!(s.dispersion >= 0.0)) throw DataError(name + ": dispersion must be >= 0");
      if (info(s.covariate).kind == CovariateKind::kBinary)
        throw DataError(name + ": 0/1 covariate needs a Bernoulli draw");
      if (s.distribution != Distribution::kLogNormal &&
          info(s.covariate).kind != CovariateKind::kCount)
        throw DataError(name + ": count draws need a count covariate");
      if (s.distribution == Distribution::kLogNormal &&
          info(s.covariate).kind == CovariateKind::kCount)
        throw DataError(name + ": log-normal draws need a real covariate");
      if (s.offset < info(s.covariate).minimum)
        throw DataError(name + ": offset below the covariate minimum");
    }
  }
  std::vector<Covariate> seen;
  for (const auto& s : covariates) {
    if (std::find(seen.begin(), seen.end(), s.covariate) != seen.end())
      throw DataError("covariate listed twice in generator config");
    seen.push_back(s.covariate);
  }
}

GeneratorConfig GeneratorConfig::null_config(std::size_t n, int num_treatments) {
  GeneratorConfig c;
  c.n = n;
  for (int t = 0; t < num_treatments; ++t) c.categories.push_back("T" + std::to_string(t + 1));
  using D = Distribution;
  c.covariates = {
      {Covariate::kSubjectCategories, D::kPoisson, 1.2, 0.0, 1.0, 0.0},
      {Covariate::kPages, D::kNegBin, 9.8, 0.4, 0.0, 0.0},
      {Covariate::kCoauthors, D::kNegBin, 4.45, 0.8, 1.0, 0.0},
      {Covariate::kUsa, D::kBernoulli, 0.36, 0.0, 0.0, 0.0},
      {Covariate::kJournalImpactFactor, D::kLogNormal, 2.26, 0.85, 0.0, 0.0},
  };
  const auto k = static_cast<Eigen::Index>(num_treatments);
  const auto j = static_cast<Eigen::Index>(c.covariates.size());
  c.assignment_intercepts = Eigen::VectorXd::Zero(k);
  c.assignment_coefficients = Eigen::MatrixXd::Zero(k, j);
  c.outcome_base = Eigen::VectorXd::Constant(k, std::log(30.0));
  c.outcome_coefficients = Eigen::VectorXd::Zero(j);
  c.outcome_dispersion = 0.8;
  return c;
}

GeneratorConfig GeneratorConfig::ten_papers() {
  GeneratorConfig c;
  c.mode = Mode::kTenPapers;
  c.n = 10;
  c.categories = {"field1", "field2"};
  c.covariates = {{Covariate::kCoauthors, Distribution::kPoisson, 1.0, 0.0, 1.0, 0.0}};
  return c;
}

ColumnSchema synthetic_schema(const GeneratorConfig& config) {
  ColumnSchema s;
  for (const auto& spec : config.covariates)
    s.covariates[spec.covariate] = std::string(info(spec.covariate).key);
  return s;
}

namespace {

SyntheticCorpus ten_papers_corpus(const GeneratorConfig& config) {
  struct Row {
    int coauthors, field, citations;
  };
  static constexpr Row rows[10] = {{1, 1, 40}, {1, 1, 60},  {1, 1, 40},  {1, 1, 60},
                                   {1, 2, 50}, {5, 1, 100}, {5, 2, 150}, {5, 2, 50},
                                   {5, 2, 150}, {5, 2, 50}};
  SyntheticCorpus out;
  out.corpus.covariates = {Covariate::kCoauthors};
  auto& truth = out.truth;
  truth.potential_outcomes.resize(10, 2);
  truth.realized.resize(10);
  for (int i = 0; i < 10; ++i) {
    PaperRecord r;
    r.id = "paper" + std::to_string(i + 1);
    r.year = 2003;
    r.citations = rows[i].citations;
    r.categories = {config.categories[static_cast<std::size_t>(rows[i].field - 1)]};
    r[Covariate::kCoauthors] = rows[i].coauthors;
    out.corpus.records.push_back(r);
    // Citations depend on co-authorship only, so both potential outcomes
    // equal the observed count.
    truth.potential_outcomes.row(i).setConstant(rows[i].citations);
    truth.realized[i] = rows[i].citations;
    truth.assignment.push_back(rows[i].field - 1);
  }
  truth.ace = Eigen::MatrixXd::Zero(2, 2);
  truth.expected_ace = Eigen::MatrixXd::Zero(2, 2);
  truth.naive_means = {60.0, 90.0};
  return out;
}

}  // namespace

SyntheticCorpus generate(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.mode == GeneratorConfig::Mode::kTenPapers) return ten_papers_corpus(config);

  const auto n = static_cast<Eigen::Index>(config.n);
  const auto k = static_cast<Eigen::Index>(config.num_treatments());
  const auto j = static_cast<Eigen::Index>(config.covariates.size());

  SyntheticCorpus out;
  for (const auto& s : config.covariates) out.corpus.covariates.push_back(s.covariate);
  std::sort(out.corpus.covariates.begin(), out.corpus.covariates.end());
  out.corpus.records.resize(config.n);

  auto& truth = out.truth;
  truth.potential_outcomes.resize(n, k);
  truth.realized.resize(n);
  truth.assignment.resize(config.n);
  Eigen::MatrixXd conditional_means(n, k);

  Eigen::VectorXd z(j);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    PaperRecord& r = out.corpus.records[static_cast<std::size_t>(i)];
    r.id = "syn" + std::to_string(i + 1);
    for (Eigen::Index c = 0; c < j; ++c) {
      const auto& spec = config.covariates[static_cast<std::size_t>(c)];
      const double v = draw_covariate(spec, rng);
      z[c] = (v - spec.center()) / spec.scale();
      const bool missing = rng.uniform() < spec.missing_rate;
      r[spec.covariate] = missing ? std::nullopt : std::optional<double>(v);
    }
    const Eigen::VectorXd p =
        softmax(config.assignment_intercepts + config.assignment_coefficients * z);
    const int t = draw_category(p, rng.uniform());
    const double u = rng.uniform_open();
    r.year = 2000 + static_cast<int>(rng.below(6));

    const double shift = config.outcome_coefficients.dot(z);
    for (Eigen::Index s = 0; s < k; ++s) {
      const double mu = std::exp(config.outcome_base[s] + shift);
      conditional_means(i, s) = mu;
      truth.potential_outcomes(i, s) =
          static_cast<double>(negbin_quantile(u, mu, config.outcome_dispersion));
    }
    truth.assignment[static_cast<std::size_t>(i)] = t;
    truth.realized[i] = truth.potential_outcomes(i, t);
    r.citations = static_cast<std::int64_t>(truth.realized[i]);
    r.categories = {config.categories[static_cast<std::size_t>(t)]};
  }

  auto contrast = [&](const Eigen::MatrixXd& values) {
    Eigen::MatrixXd a(k, k);
    for (Eigen::Index s = 0; s < k; ++s) {
      for (Eigen::Index t = 0; t < k; ++t) {
        CompensatedSum d;
        for (Eigen::Index i = 0; i < n; ++i) d += values(i, s) - values(i, t);
        a(s, t) = d.value() / static_cast<double>(n);
      }
    }
    return a;
  };
  truth.ace = contrast(truth.potential_outcomes);
  truth.expected_ace = contrast(conditional_means);

  std::vector<CompensatedSum> sums(static_cast<std::size_t>(k));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto t = static_cast<std::size_t>(truth.assignment[static_cast<std::size_t>(i)]);
    sums[t] += truth.realized[i];
    ++counts[t];
  }
  for (std::size_t t = 0; t < sums.size(); ++t)
    truth.naive_means.push_back(counts[t] ? sums[t].value() / static_cast<double>(counts[t])
                                          : std::nan(""));
  return out;
}

}  // namespace ipwkit
