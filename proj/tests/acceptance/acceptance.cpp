// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ipwkit/balance.hpp"
#include "ipwkit/config.hpp"
#include "ipwkit/estimator.hpp"
#include "ipwkit/glm.hpp"
#include "ipwkit/pipeline.hpp"
#include "ipwkit/propensity.hpp"
#include "ipwkit/svg_plot.hpp"
#include "ipwkit/synth.hpp"
#include "oracles.hpp"

using namespace ipwkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Fails `o` with a message unless `ok`.
void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

ImputedCorpus prepare(const Corpus& corpus, const std::vector<std::string>& scheme,
                      std::uint64_t seed) {
  return impute_missing(resolve_multilabel(corpus, scheme, seed));
}

PropensityMatrix raw_scores(const ImputedCorpus& c, const FitOptions& fit = {}) {
  const auto design = expand_interactions(standardize(c));
  return estimate_propensities(design, c.labeled.labels, c.labeled.num_treatments(), fit);
}

struct Contrasts {
  Eigen::MatrixXd naive, ipw;
};

Contrasts contrasts(const ImputedCorpus& c, const PropensityMatrix& clipped) {
  const auto est = ipw_estimates(c.outcome(), ipw_weights(clipped, c.labeled.labels),
                                 c.labeled.labels, c.labeled.num_treatments());
  return {ace_matrix(est, EffectBasis::kUnweighted).values, ace_matrix(est).values};
}

// Ten-paper example: scores, weights, means, contrasts and phi against hand values.
Outcome criterion1() {
  Outcome o;
  const auto c = testing::ten_papers_corpus();
  const auto& rows = testing::ten_paper_rows();
  FitOptions fit;
  fit.ridge = 1e-12;
  fit.tol = 1e-10;
  const auto design = expand_interactions(standardize(c), {InteractionPolicy::Mode::kNone, {}});
  const auto p = estimate_propensities(design, c.labeled.labels, 2, fit);

  // Oracle: own-field score is the field share within the co-author stratum.
  double worst = 0.0;
  std::vector<double> expected_w;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double same = 0, stratum = 0, field1 = 0;
    for (const auto& r : rows)
      if (r.coauthors == rows[i].coauthors) {
        ++stratum;
        field1 += r.field == 0;
        same += r.field == rows[i].field;
      }
    worst = std::max(worst, std::abs(p.scores(static_cast<Eigen::Index>(i), 0) - field1 / stratum));
    expected_w.push_back(stratum / same);
  }
  require(o, worst <= 1e-8, "score error " + fmt("%.3g", worst));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double f1 = p.scores(static_cast<Eigen::Index>(i), 0);
    const double want = rows[i].coauthors == 1 ? 0.8 : 0.2;
    if (std::abs(f1 - want) > 1e-8) require(o, false, "score is not 0.8/0.2");
  }

  const auto w = ipw_weights(p, c.labeled.labels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double want = rows[i].coauthors == 1 ? (rows[i].field == 0 ? 1.25 : 5.0)
                                               : (rows[i].field == 1 ? 1.25 : 5.0);
    if (std::abs(w.weights[static_cast<Eigen::Index>(i)] - want) > 1e-8 ||
        std::abs(expected_w[i] - want) > 1e-12)
      require(o, false, "weight of row " + std::to_string(i + 1));
  }

  const auto est = ipw_estimates(c.outcome(), w, c.labeled.labels, 2);
  const auto naive = ace_matrix(est, EffectBasis::kUnweighted);
  const auto ipw = ace_matrix(est);
  require(o, std::abs(est.categories[0].mean - 60) <= 1e-8 && std::abs(est.categories[1].mean - 90) <= 1e-8,
          "naive means");
  require(o, std::abs(naive(1, 0) - 30) <= 1e-8, "naive difference");
  require(o, std::abs(est.categories[0].weighted_mean - 75) <= 1e-8 &&
                 std::abs(est.categories[1].weighted_mean - 75) <= 1e-8,
          "IPW means");
  require(o, std::abs(ipw(0, 1)) <= 1e-8, "IPW ACE");

  std::vector<int> five, field2;
  for (const auto& r : rows) {
    five.push_back(r.coauthors == 5);
    field2.push_back(r.field);
  }
  const double a = 4, b = 1, cc = 1, d = 4;  // counts (five, field2): 11, 10, 01, 00
  const double phi_hand = (a * d - b * cc) / std::sqrt((a + b) * (cc + d) * (a + cc) * (b + d));
  require(o, std::abs(std::abs(phi_coefficient(five, field2)) - 0.60) <= 1e-8 &&
                 std::abs(std::abs(phi_hand) - 0.60) <= 1e-12,
          "phi");
  if (o.pass)
    o.detail = "scores 0.8/0.2, weights 1.25/5, naive 60/90 (diff 30), IPW 75/75 (ACE " +
               fmt("%.2g", ipw(0, 1)) + "), phi " + fmt("%.2f", phi_coefficient(five, field2));
  return o;
}

// Saturated single-confounder instances: IPW equals the stratified estimate.
Outcome criterion2() {
  Outcome o;
  std::mt19937_64 gen(20240611);
  double worst = 0.0;
  int done = 0;
  FitOptions fit;
  fit.ridge = 0.0;
  fit.tol = 1e-10;
  while (done < 100) {
    const int n = 40 + static_cast<int>(gen() % 461);
    const int levels = 2 + static_cast<int>(gen() % 4);
    std::vector<double> share(static_cast<std::size_t>(levels));
    for (auto& s : share) s = 0.15 + 0.7 * std::uniform_real_distribution<double>()(gen);
    std::vector<int> s(n), t(n);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<int>(gen() % static_cast<unsigned>(levels));
      t[i] = std::uniform_real_distribution<double>()(gen) < share[s[i]] ? 1 : 0;
      y[i] = std::floor(20.0 + 8.0 * s[i] + 5.0 * t[i] +
                        15.0 * std::uniform_real_distribution<double>()(gen));
    }
    // Every (stratum, treatment) cell must be populated.
    std::vector<int> cells(static_cast<std::size_t>(2 * levels), 0);
    for (int i = 0; i < n; ++i) ++cells[static_cast<std::size_t>(2 * s[i] + t[i])];
    if (*std::min_element(cells.begin(), cells.end()) == 0) continue;

    const auto design = testing::saturated_design(s, levels);
    const auto p = estimate_propensities(design, t, 2, fit);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    const auto est = ipw_estimates(yv, ipw_weights(p, t), t, 2);
    const double diff = std::abs(ace_matrix(est)(0, 1) - testing::hand_stratified_effect(y, s, t));
    worst = std::max(worst, diff);
    ++done;
  }
  require(o, worst <= 1e-8, "max deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "100 instances, max |IPW - stratified| = " + fmt("%.2e", worst);
  return o;
}

double draw_negbin(std::mt19937_64& gen, double mu, double alpha) {
  if (alpha <= 0.0) return static_cast<double>(std::poisson_distribution<long>(mu)(gen));
  const double lambda = std::gamma_distribution<double>(1.0 / alpha, alpha * mu)(gen);
  return static_cast<double>(std::poisson_distribution<long>(lambda)(gen));
}

Eigen::MatrixXd random_design(std::mt19937_64& gen, int n, int p) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x(i, j) = z(gen);
  }
  return x;
}

// GLM gradients, joint test and the Poisson limit of the negative binomial.
Outcome criterion3() {
  Outcome o;
  std::mt19937_64 gen(77);
  const int n = 80, p = 4;
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd x = random_design(gen, n, p);
    Eigen::VectorXd yg(n), yl(n), yn(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      const double eta = 0.3 + 0.5 * x(i, 1) - 0.4 * x(i, 2);
      yg[i] = eta + std::normal_distribution<double>()(gen);
      yl[i] = std::uniform_real_distribution<double>()(gen) < 1 / (1 + std::exp(-eta));
      yn[i] = draw_negbin(gen, std::exp(1.5 + 0.5 * eta), 0.5);
      labels[i] = static_cast<int>(gen() % 3);
    }
    const Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(p, -0.3, 0.5);
    for (double ridge : {0.0, 0.5}) {
      for (auto [f, y] : {std::pair{Family::kGaussian, &yg}, std::pair{Family::kLogit, &yl},
                          std::pair{Family::kNegBin, &yn}}) {
        const auto an = glm_score(f, x, *y, beta, 0.6, ridge);
        const auto fd = testing::numeric_gradient(
            [&](const Eigen::VectorXd& b) { return glm_objective(f, x, *y, b, 0.6, ridge); }, beta);
        worst = std::max(worst, testing::max_relative_error(an, fd));
      }
      const double alpha = 0.6, h = 1e-5;
      const double fd_alpha =
          (glm_objective(Family::kNegBin, x, yn, beta, alpha * std::exp(h), ridge) -
           glm_objective(Family::kNegBin, x, yn, beta, alpha * std::exp(-h), ridge)) / (2 * h);
      const double an_alpha = negbin_log_alpha_score(x, yn, beta, alpha);
      worst = std::max(worst, std::abs(an_alpha - fd_alpha) / std::max(1.0, std::abs(fd_alpha)));

      const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(p, 2, 0.1) + 0.2 * Eigen::MatrixXd::Identity(p, 2);
      const Eigen::MatrixXd an = multinomial_score(x, labels, 3, b, ridge);
      const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
      const auto fd = testing::numeric_gradient(
          [&](const Eigen::VectorXd& v) {
            return multinomial_objective(x, labels, 3, Eigen::Map<const Eigen::MatrixXd>(v.data(), p, 2),
                                         ridge);
          },
          flat);
      worst = std::max(worst, testing::max_relative_error(
                                  Eigen::Map<const Eigen::VectorXd>(an.data(), an.size()), fd));
    }
  }
  require(o, worst <= 1e-6, "gradient error " + fmt("%.3g", worst));

  // Gaussian one-way layout against the closed-form ANOVA F.
  std::vector<std::vector<double>> groups(4);
  Eigen::MatrixXd dummies = Eigen::MatrixXd::Zero(60, 3);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) {
    const int g = i % 4;
    y[i] = g * 0.4 + std::normal_distribution<double>()(gen);
    groups[static_cast<std::size_t>(g)].push_back(y[i]);
    if (g > 0) dummies(i, g - 1) = 1.0;
  }
  const auto gfit = fit_glm(Family::kGaussian,
                            DesignMatrix::with_intercept(dummies, {"g1", "g2", "g3"}), y,
                            {.ridge = 0.0});
  const double f = joint_test(gfit, {"g1", "g2", "g3"}).f;
  const double f_anova = testing::anova_f(groups);
  require(o, std::abs(f - f_anova) <= 1e-9 * f_anova, "joint test vs ANOVA");

  // Tiny fixed dispersion against an independent Poisson fit.
  const Eigen::MatrixXd x = random_design(gen, 500, 3);
  Eigen::VectorXd counts(500);
  for (int i = 0; i < 500; ++i)
    counts[i] = draw_negbin(gen, std::exp(1.0 + 0.3 * x(i, 1) - 0.2 * x(i, 2)), 0.0);
  FitOptions nb;
  nb.ridge = 0.0;
  nb.fixed_alpha = 1e-12;
  const auto fit = fit_glm(Family::kNegBin, DesignMatrix::with_intercept(x.rightCols(2), {"a", "b"}),
                           counts, nb);
  const double poisson_gap = (fit.beta - testing::poisson_mle(x, counts)).cwiseAbs().maxCoeff();
  require(o, poisson_gap <= 1e-4, "negbin vs Poisson " + fmt("%.3g", poisson_gap));
  if (o.pass)
    o.detail = "FD rel. error " + fmt("%.1e", worst) + " (4 families), F " + fmt("%.6f", f) +
               " = ANOVA " + fmt("%.6f", f_anova) + ", negbin/Poisson gap " + fmt("%.1e", poisson_gap);
  return o;
}

struct ConfoundedRun {
  ImputedCorpus corpus;
  PropensityMatrix clipped;
  Contrasts est;
  Eigen::MatrixXd truth;
};

ConfoundedRun confounded_run(const GeneratorConfig& config, std::uint64_t seed) {
  const auto s = generate(config, seed);
  ConfoundedRun r{prepare(s.corpus, config.categories, seed), {}, {}, s.truth.ace};
  r.clipped = clip_scores(raw_scores(r.corpus));
  r.est = contrasts(r.corpus, r.clipped);
  return r;
}

constexpr std::uint64_t kMainSeed = 2024;

// IPW recovers the truth on the confounded generator; sigma from replicates.
Outcome criterion4(const GeneratorConfig& config, const ConfoundedRun& main) {
  Outcome o;
  const int reps = 50;
  const int k = config.num_treatments();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k), sum2 = Eigen::MatrixXd::Zero(k, k);
  for (int rep = 1; rep <= reps; ++rep) {
    const auto r = confounded_run(config, static_cast<std::uint64_t>(rep));
    const Eigen::MatrixXd err = r.est.ipw - r.truth;
    sum += err;
    sum2 += err.cwiseProduct(err);
  }
  std::string detail;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double mean = sum(a, b) / reps;
      const double sigma = std::sqrt((sum2(a, b) - reps * mean * mean) / (reps - 1));
      const double ipw_err = std::abs(main.est.ipw(a, b) - main.truth(a, b));
      const double naive_err = std::abs(main.est.naive(a, b) - main.truth(a, b));
      const std::string pair = config.categories[a] + "-" + config.categories[b];
      require(o, ipw_err < 0.25 * naive_err, pair + " IPW error not < 0.25 naive error");
      require(o, ipw_err <= 3.0 * sigma, pair + " outside 3 sigma");
      detail += (detail.empty() ? "" : ", ") + pair + ": |IPW-truth| " + fmt("%.2f", ipw_err) +
                " vs naive " + fmt("%.2f", naive_err) + " (3 sigma " + fmt("%.2f", 3 * sigma) + ")";
    }
  }
  if (o.pass) o.detail = "N=" + std::to_string(config.n) + ", " + detail;
  return o;
}

// Confounded covariates balanced; null corpus shows no systematic change.
Outcome criterion5(const ConfoundedRun& main) {
  Outcome o;
  const auto report = balance_report(main.corpus, main.clipped);
  std::string detail;
  for (const auto& row : report.rows) {
    if (row.covariate != Covariate::kCoauthors && row.covariate != Covariate::kPages) continue;
    require(o, row.reduction_percent >= 90.0, row.name + " reduction " + fmt("%.1f", row.reduction_percent));
    detail += row.name + " " + fmt("%.1f", row.reduction_percent) + "%, ";
  }

  // Null F variability from independent null corpora (unadjusted pass).
  const std::size_t n = 2000;
  const auto null_config = GeneratorConfig::null_config(n, 3);
  std::map<Covariate, std::vector<double>> null_f;
  for (std::uint64_t rep = 1; rep <= 100; ++rep) {
    const auto c = prepare(generate(null_config, 1000 + rep).corpus, null_config.categories, rep);
    const auto pass = balance_pass(c, nullptr);
    for (std::size_t i = 0; i < pass.covariates.size(); ++i)
      null_f[pass.covariates[i]].push_back(pass.checks[i].test.f);
  }
  const auto c = prepare(generate(null_config, kMainSeed).corpus, null_config.categories, kMainSeed);
  const auto null_report = balance_report(c, clip_scores(raw_scores(c)));
  double worst_ratio = 0.0;
  for (const auto& row : null_report.rows) {
    auto f = null_f.at(row.covariate);
    std::sort(f.begin(), f.end());
    const double q99 = f[static_cast<std::size_t>(0.99 * static_cast<double>(f.size()))];
    const double diff = std::abs(row.f_after - row.f_before);
    require(o, diff <= q99, row.name + " |dF| " + fmt("%.2f", diff) + " > null q99 " + fmt("%.2f", q99));
    require(o, row.f_after <= q99 && row.f_before <= q99, row.name + " F beyond null q99");
    worst_ratio = std::max(worst_ratio, diff / q99);
  }
  if (o.pass)
    o.detail = detail + "null corpus max |F_after - F_before| / null q99 = " + fmt("%.2f", worst_ratio);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Structural invariants of scores, clipping, contrasts and outputs.
Outcome criterion6(const GeneratorConfig& confounded) {
  Outcome o;
  auto config = confounded;
  config.n = 5000;
  const auto s = generate(config, 5);
  const auto c = prepare(s.corpus, config.categories, 5);
  const auto raw = raw_scores(c);
  const double row_err = (raw.scores.rowwise().sum().array() - 1.0).abs().maxCoeff();
  require(o, row_err <= 1e-12, "row sums " + fmt("%.3g", row_err));

  const ClipBounds bounds{0.05, 0.9};
  const auto once = clip_scores(raw, bounds);
  const auto twice = clip_scores(once, bounds);
  require(o, once.scores == twice.scores, "clip not idempotent");
  require(o, once.scores.minCoeff() >= bounds.lo && once.scores.maxCoeff() <= bounds.hi, "clip bounds");

  const auto clipped = clip_scores(raw);
  const auto est = contrasts(c, clipped).ipw;
  require(o, (est + est.transpose()).cwiseAbs().maxCoeff() == 0.0 && est.diagonal().isZero(0.0),
          "ACE not antisymmetric with zero diagonal");

  // y -> a y + b moves means affinely and scales contrasts by a.
  const double a = 2.5, b = -7.0;
  const Eigen::VectorXd y = c.outcome();
  const auto w = ipw_weights(clipped, c.labeled.labels);
  const auto e1 = ipw_estimates(y, w, c.labeled.labels, 3);
  const auto e2 = ipw_estimates((a * y.array() + b).matrix(), w, c.labeled.labels, 3);
  double eq = 0.0;
  for (int t = 0; t < 3; ++t) {
    const double m1 = e1.categories[t].weighted_mean, m2 = e2.categories[t].weighted_mean;
    eq = std::max(eq, std::abs(m2 - (a * m1 + b)) / std::max(1.0, std::abs(m2)));
    eq = std::max(eq, std::abs(e2.categories[t].weighted_sd - a * e1.categories[t].weighted_sd) /
                          std::max(1.0, e2.categories[t].weighted_sd));
  }
  eq = std::max(eq, (ace_matrix(e2).values - a * ace_matrix(e1).values).cwiseAbs().maxCoeff() /
                        std::max(1.0, ace_matrix(e2).values.cwiseAbs().maxCoeff()));
  // Rescaling a real covariate leaves the standardized scores unchanged.
  ImputedCorpus scaled = c;
  scaled.values.col(c.column_of(Covariate::kJournalImpactFactor)) *= 10.0;
  const double score_shift = (raw_scores(scaled).scores - raw.scores).cwiseAbs().maxCoeff();
  require(o, eq <= 1e-9, "affine equivariance " + fmt("%.3g", eq));
  require(o, score_shift <= 1e-8, "covariate scale invariance " + fmt("%.3g", score_shift));

  // Same config and seed: identical corpus and identical pipeline outputs.
  std::ostringstream c1, c2;
  write_corpus(c1, generate(config, 5).corpus, synthetic_schema(config));
  write_corpus(c2, s.corpus, synthetic_schema(config));
  require(o, c1.str() == c2.str(), "corpus bytes differ");
  const fs::path dir = fs::temp_directory_path() / "ipwkit-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "corpus.csv", std::ios::binary);
    out << c1.str();
  }
  PipelineConfig pc;
  pc.input = (dir / "corpus.csv").string();
  pc.schema = synthetic_schema(config);
  pc.scheme = config.categories;
  pc.seed = 5;
  pc.out_dir = (dir / "out").string();
  const auto first = run_pipeline(pc, Command::kRun);
  std::vector<std::string> bytes;
  for (const auto& f : first.files) bytes.push_back(slurp(dir / "out" / f));
  const auto second = run_pipeline(pc, Command::kRun);
  bool same = first.files == second.files;
  for (std::size_t i = 0; same && i < first.files.size(); ++i)
    same = slurp(dir / "out" / first.files[i]) == bytes[i];
  require(o, same, "pipeline outputs differ between runs");
  if (o.pass)
    o.detail = "row sums " + fmt("%.1e", row_err) + ", clip idempotent, ACE antisymmetric, " +
               "equivariance " + fmt("%.1e", eq) + ", " + std::to_string(first.files.size()) +
               " output files byte-identical";
  return o;
}

// Separated assignment: own-category scores dominate each overlap panel.
Outcome criterion7() {
  Outcome o;
  const auto config = load_generator_config(testing::data_path("separated.json"));
  const auto s = generate(config, 3);
  const auto c = prepare(s.corpus, config.categories, 3);
  const auto summary = overlap_summary(clip_scores(raw_scores(c)), c.labeled.labels, config.categories);
  const int k = config.num_treatments();
  double margin = 1.0;
  for (int a = 0; a < k; ++a)
    for (int t = 0; t < k; ++t)
      if (t != a) margin = std::min(margin, summary.at(a, a).summary.median - summary.at(a, t).summary.median);
  require(o, margin > 0.0, "own-category median not the largest");

  const std::string svg = render_overlap_svg(summary, "acceptance");
  const std::string again = render_overlap_svg(summary, "acceptance");
  int panels = 0;
  for (auto pos = svg.find("class=\"panel\""); pos != std::string::npos;
       pos = svg.find("class=\"panel\"", pos + 1))
    ++panels;
  require(o, panels == k, "panel count");
  require(o, svg == again && svg.rfind("<?xml", 0) == 0, "SVG not byte-stable");
  if (o.pass)
    o.detail = std::to_string(k) + " panels, min own-median margin " + fmt("%.3f", margin) +
               ", SVG " + std::to_string(svg.size()) + " bytes, byte-stable";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };

  report(1, "ten-paper example exact oracle", criterion1);
  report(2, "saturated IPW equals stratification", criterion2);
  report(3, "GLM gradients, joint test, Poisson limit", criterion3);

  GeneratorConfig confounded;
  ConfoundedRun main_run;
  bool have_main = false;
  try {
    confounded = load_generator_config(testing::data_path("confounded.json"));
    main_run = confounded_run(confounded, kMainSeed);
    have_main = true;
  } catch (const std::exception& e) {
    std::printf("confounded corpus failed: %s\n", e.what());
  }
  report(4, "confounded generator recovery", [&] {
    return have_main ? criterion4(confounded, main_run) : Outcome{false, "no corpus"};
  });
  report(5, "balance reduction", [&] {
    return have_main ? criterion5(main_run) : Outcome{false, "no corpus"};
  });
  report(6, "invariants", [&] { return criterion6(confounded); });
  report(7, "overlap dominance and SVG", criterion7);
  return failures == 0 ? 0 : 1;
}
