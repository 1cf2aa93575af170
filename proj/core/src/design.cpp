#include "ipwkit/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ipwkit/error.hpp"
#include "ipwkit/summation.hpp"

namespace ipwkit {

namespace {

bool is_constant(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] != v[0]) return false;
  return true;
}

std::pair<double, double> mean_sd(const Eigen::VectorXd& v) {
  CompensatedSum s;
  for (double x : v) s += x;
  const double mean = s.value() / static_cast<double>(v.size());
  CompensatedSum ss;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss.value() / static_cast<double>(v.size() - 1))};
}

}  // namespace

Eigen::MatrixXd Standardization::apply(
    const std::vector<MainColumn>& columns) const {
  if (columns.empty()) throw DataError("no columns to standardize");
  const Eigen::Index n = columns.front().values.size();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(kept.size()));
  std::vector<bool> seen(kept.size(), false);
  for (const auto& col : columns) {
    auto it = std::find_if(kept.begin(), kept.end(),
                           [&](const Entry& e) { return e.name == col.name; });
    if (it == kept.end()) {
      if (std::find(constant_columns.begin(), constant_columns.end(),
                    col.name) != constant_columns.end())
        continue;
      throw DataError("column not in standardization: " + col.name);
    }
    if (col.values.size() != n) throw DataError("column length mismatch");
    const auto j = static_cast<Eigen::Index>(it - kept.begin());
    seen[static_cast<std::size_t>(j)] = true;
    if (it->role == ColumnRole::kContinuous)
      out.col(j) = (col.values.array() - it->mean) / it->sd;
    else
      out.col(j) = col.values;
  }
  for (std::size_t j = 0; j < kept.size(); ++j)
    if (!seen[j]) throw DataError("missing column: " + kept[j].name);
  return out;
}

StandardizedMains standardize(const std::vector<MainColumn>& columns) {
  if (columns.empty()) throw DataError("no main-effect columns");
  const Eigen::Index n = columns.front().values.size();
  if (n < 2) throw DataError("standardization needs at least 2 rows");

  StandardizedMains out;
  std::set<std::string> names;
  for (const auto& col : columns) {
    if (col.values.size() != n) throw DataError("column length mismatch");
    if (!names.insert(col.name).second)
      throw DataError("duplicate column name: " + col.name);
    if (is_constant(col.values)) {
      out.scaling.constant_columns.push_back(col.name);
      continue;
    }
    Standardization::Entry e{col.name, col.role};
    if (col.role == ColumnRole::kContinuous) {
      std::tie(e.mean, e.sd) = mean_sd(col.values);
    }
    out.scaling.kept.push_back(e);
    out.names.push_back(col.name);
    out.roles.push_back(col.role);
  }
  if (out.scaling.kept.empty())
    throw DataError("every main-effect column is constant");
  out.matrix = out.scaling.apply(columns);
  return out;
}

std::vector<MainColumn> main_columns(const ImputedCorpus& corpus) {
  std::vector<MainColumn> cols;
  const auto& cs = corpus.covariates();
  for (std::size_t j = 0; j < cs.size(); ++j) {
    const auto& ci = info(cs[j]);
    cols.push_back({std::string(ci.key),
                    corpus.values.col(static_cast<Eigen::Index>(j)),
                    ci.kind == CovariateKind::kBinary ? ColumnRole::kBinary
                                                      : ColumnRole::kContinuous});
  }
  for (std::size_t k = 0; k < corpus.indicator_for.size(); ++k)
    cols.push_back({std::string(info(corpus.indicator_for[k]).key) + "_missing",
                    corpus.indicators.col(static_cast<Eigen::Index>(k)),
                    ColumnRole::kIndicator});
  return cols;
}

StandardizedMains standardize(const ImputedCorpus& corpus) {
  return standardize(main_columns(corpus));
}

std::optional<Eigen::Index> DesignMatrix::index_of(
    const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - names.begin());
}

DesignMatrix DesignMatrix::with_intercept(const Eigen::MatrixXd& columns,
                                          std::vector<std::string> names) {
  if (static_cast<Eigen::Index>(names.size()) != columns.cols())
    throw DataError("column names do not match matrix width");
  DesignMatrix d;
  d.x.resize(columns.rows(), columns.cols() + 1);
  d.x.col(0).setOnes();
  d.x.rightCols(columns.cols()) = columns;
  d.names.reserve(names.size() + 1);
  d.names.push_back("(intercept)");
  for (auto& n : names) d.names.push_back(std::move(n));
  d.tags.assign(d.names.size(), ColumnTag{});
  d.tags[0].kind = ColumnTag::Kind::kIntercept;
  std::set<std::string> unique(d.names.begin(), d.names.end());
  if (unique.size() != d.names.size())
    throw DataError("duplicate design column name");
  return d;
}

DesignMatrix expand_interactions(const StandardizedMains& mains,
                                 const InteractionPolicy& policy) {
  const Eigen::Index n = mains.matrix.rows();
  const auto m = static_cast<int>(mains.names.size());
  if (m == 0) throw DataError("no main-effect columns");

  std::vector<std::pair<int, int>> pairs;
  auto find = [&](const std::string& name) {
    auto it = std::find(mains.names.begin(), mains.names.end(), name);
    if (it == mains.names.end())
      throw DataError("interaction references unknown column: " + name);
    return static_cast<int>(it - mains.names.begin());
  };
  switch (policy.mode) {
    case InteractionPolicy::Mode::kAllMainPairs:
      for (int a = 0; a < m; ++a) {
        if (mains.roles[a] == ColumnRole::kIndicator) continue;
        for (int b = a + 1; b < m; ++b)
          if (mains.roles[b] != ColumnRole::kIndicator) pairs.emplace_back(a, b);
      }
      break;
    case InteractionPolicy::Mode::kNone:
      break;
    case InteractionPolicy::Mode::kExplicit: {
      std::set<std::pair<int, int>> seen;
      for (const auto& [na, nb] : policy.pairs) {
        int a = find(na), b = find(nb);
        if (a == b) throw DataError("self-interaction requested: " + na);
        if (a > b) std::swap(a, b);
        if (seen.insert({a, b}).second) pairs.emplace_back(a, b);
      }
      break;
    }
  }

  DesignMatrix d;
  const Eigen::Index p = 1 + m + static_cast<Eigen::Index>(pairs.size());
  d.x.resize(n, p);
  d.x.col(0).setOnes();
  d.names.push_back("(intercept)");
  d.tags.push_back({ColumnTag::Kind::kIntercept});
  // Mains in the order given.
  for (int j = 0; j < m; ++j) {
    d.x.col(1 + j) = mains.matrix.col(j);
    d.names.push_back(mains.names[j]);
    d.tags.push_back({mains.roles[j] == ColumnRole::kIndicator
                          ? ColumnTag::Kind::kIndicator
                          : ColumnTag::Kind::kMain});
  }
  Eigen::Index col = 1 + m;
  for (const auto& [a, b] : pairs) {
    d.x.col(col) = mains.matrix.col(a).cwiseProduct(mains.matrix.col(b));
    d.names.push_back(mains.names[a] + ":" + mains.names[b]);
    d.tags.push_back({ColumnTag::Kind::kInteraction, 1 + a, 1 + b});
    ++col;
  }
  return d;
}

}  // namespace ipwkit
