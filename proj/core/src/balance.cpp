#include "ipwkit/balance.hpp"

#include <cmath>
#include <limits>

#include "ipwkit/error.hpp"

namespace ipwkit {

namespace {

std::string dummy_name(int t) { return "treatment_" + std::to_string(t); }
std::string score_name(int t) { return "pscore_" + std::to_string(t); }

}  // namespace

Family default_family(Covariate c) {
  if (c == Covariate::kSubjectCategories) return Family::kGaussian;
  switch (info(c).kind) {
    case CovariateKind::kBinary: return Family::kLogit;
    case CovariateKind::kCount: return Family::kNegBin;
    case CovariateKind::kReal: return Family::kGaussian;
  }
  return Family::kGaussian;
}

BalanceCheck balance_check(const Eigen::VectorXd& covariate, Family family,
                           std::span<const int> labels, int num_treatments,
                           const PropensityMatrix* propensities,
                           const FitOptions& options) {
  const Eigen::Index n = covariate.size();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("covariate and label lengths differ");
  if (num_treatments < 2) throw DataError("balance check needs 2+ treatments");
  if (propensities && (propensities->rows() != n ||
                       propensities->num_treatments() != num_treatments))
    throw DataError("propensity matrix does not match the sample");

  const int km1 = num_treatments - 1;
  const int extra = propensities ? km1 : 0;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(n, km1 + extra);
  std::vector<std::string> names;
  for (int t = 1; t < num_treatments; ++t) names.push_back(dummy_name(t));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0 || l >= num_treatments) throw DataError("label out of range");
    if (l > 0) cols(i, l - 1) = 1.0;
  }
  if (propensities) {
    for (int t = 1; t < num_treatments; ++t) {
      names.push_back(score_name(t));
      cols.col(km1 + t - 1) = propensities->scores.col(t);
    }
  }
  const DesignMatrix design = DesignMatrix::with_intercept(cols, names);
  const GlmFit fit = fit_glm(family, design, covariate, options);

  BalanceCheck out;
  out.family = family;
  out.test = joint_test(fit, std::vector<std::string>(names.begin(),
                                                      names.begin() + km1));
  Eigen::MatrixXd counterfactual = design.x;
  for (int t = 0; t < num_treatments; ++t) {
    counterfactual.middleCols(1, km1).setZero();
    if (t > 0) counterfactual.col(t).setOnes();
    out.adjusted_means.push_back(fit.predict_mean(counterfactual).mean());
  }
  return out;
}

BalancePass balance_pass(const ImputedCorpus& corpus,
                         const PropensityMatrix* propensities,
                         const FamilyMap& families,
                         const FitOptions& options) {
  const auto& labels = corpus.labeled.labels;
  const int k = corpus.labeled.num_treatments();
  BalancePass pass;
  for (Covariate c : corpus.covariates()) {
    const Eigen::VectorXd v = corpus.values.col(corpus.column_of(c));
    if ((v.array() == v[0]).all()) {
      pass.skipped.emplace_back(info(c).key);
      continue;
    }
    auto it = families.find(c);
    const Family family = it != families.end() ? it->second : default_family(c);
    pass.covariates.push_back(c);
    try {
      pass.checks.push_back(
          balance_check(v, family, labels, k, propensities, options));
    } catch (const DataError& e) {
      throw DataError(std::string(info(c).key) + ": " + e.what());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(info(c).key) + ": " + e.what(),
                             e.last_iterate);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(info(c).key) + ": " + e.what());
    }
  }
  return pass;
}

BalanceReport combine_balance(const ImputedCorpus& corpus,
                              const BalancePass& before,
                              const BalancePass& after) {
  if (before.covariates != after.covariates)
    throw DataError("balance passes cover different covariates");
  const int k = corpus.labeled.num_treatments();
  BalanceReport report;
  report.scheme = corpus.labeled.scheme;
  report.n = corpus.labeled.size();
  report.model_size = 1 + 2 * (k - 1);
  report.skipped = before.skipped;
  for (std::size_t j = 0; j < before.covariates.size(); ++j) {
    const Covariate c = before.covariates[j];
    const auto& b = before.checks[j];
    const auto& a = after.checks[j];
    BalanceRow row;
    row.covariate = c;
    row.name = std::string(info(c).label);
    row.family = b.family;
    row.f_before = b.test.f;
    row.f_after = a.test.f;
    row.reduction_percent =
        b.test.f > 0.0 ? 100.0 * (1.0 - a.test.f / b.test.f)
                       : std::numeric_limits<double>::quiet_NaN();
    row.q = b.test.q;
    row.df_before = b.test.df_denominator;
    row.df_after = a.test.df_denominator;
    row.means_before = b.adjusted_means;
    row.means_after = a.adjusted_means;
    report.rows.push_back(std::move(row));
  }
  return report;
}

BalanceReport balance_report(const ImputedCorpus& corpus,
                             const PropensityMatrix& propensities,
                             const FamilyMap& families,
                             const FitOptions& options) {
  return combine_balance(corpus,
                         balance_pass(corpus, nullptr, families, options),
                         balance_pass(corpus, &propensities, families, options));
}

}  // namespace ipwkit
