#include "ipwkit/estimator.hpp"

#include <cmath>
#include <map>
#include <string>

#include "ipwkit/error.hpp"
#include "ipwkit/summation.hpp"

namespace ipwkit {

WeightVector ipw_weights(const PropensityMatrix& p, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != p.rows())
    throw DataError("label count does not match the propensity matrix");
  const int k = p.num_treatments();
  WeightVector w;
  w.weights.resize(p.rows());
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0 || l >= k) throw DataError("label out of range");
    const double score = p.scores(i, l);
    if (!(score > 0.0))
      throw NumericalError("propensity score of row " + std::to_string(i) +
                           " is zero; clip scores before weighting");
    w.weights[i] = 1.0 / score;
    sums[static_cast<std::size_t>(l)] += w.weights[i];
  }
  for (const auto& s : sums) w.category_sums.push_back(s.value());
  return w;
}

IpwEstimates ipw_estimates(const Eigen::VectorXd& y, const WeightVector& w,
                           std::span<const int> labels, int num_treatments) {
  if (y.size() != w.weights.size() ||
      static_cast<Eigen::Index>(labels.size()) != y.size())
    throw DataError("outcome, weight and label lengths differ");
  const auto k = static_cast<std::size_t>(num_treatments);
  std::vector<std::vector<Eigen::Index>> members(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_treatments)
      throw DataError("label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(
        static_cast<Eigen::Index>(i));
  }

  IpwEstimates est;
  for (std::size_t t = 0; t < k; ++t) {
    const auto& rows = members[t];
    if (rows.empty())
      throw DataError("treatment " + std::to_string(t) + " has no records");
    CategoryEstimate c;
    c.n = rows.size();
    const auto n = static_cast<double>(c.n);

    CompensatedSum sy, sw, sw2, swy;
    for (auto i : rows) {
      sy += y[i];
      sw += w.weights[i];
      sw2 += w.weights[i] * w.weights[i];
      swy += w.weights[i] * y[i];
    }
    c.mean = sy.value() / n;
    c.weight_sum = sw.value();
    if (!(c.weight_sum > 0.0))
      throw NumericalError("treatment " + std::to_string(t) +
                           " has zero weight sum");
    c.weighted_mean = swy.value() / c.weight_sum;
    c.ess = c.weight_sum * c.weight_sum / sw2.value();

    CompensatedSum ss, wss;
    for (auto i : rows) {
      const double d = y[i] - c.mean;
      const double dw = y[i] - c.weighted_mean;
      ss += d * d;
      wss += w.weights[i] * dw * dw;
    }
    c.sd = c.n > 1 ? std::sqrt(ss.value() / (n - 1.0)) : 0.0;
    c.weighted_sd = std::sqrt(wss.value() / c.weight_sum);
    est.categories.push_back(c);
  }
  return est;
}

AceMatrix ace_matrix(const IpwEstimates& est, EffectBasis basis) {
  const auto k = static_cast<Eigen::Index>(est.categories.size());
  AceMatrix a;
  a.values.resize(k, k);
  for (Eigen::Index s = 0; s < k; ++s) {
    for (Eigen::Index t = 0; t < k; ++t) {
      const auto& cs = est.categories[static_cast<std::size_t>(s)];
      const auto& ct = est.categories[static_cast<std::size_t>(t)];
      a.values(s, t) = basis == EffectBasis::kWeighted
                           ? cs.weighted_mean - ct.weighted_mean
                           : cs.mean - ct.mean;
    }
  }
  return a;
}

double stratified_ace(const Eigen::VectorXd& y, std::span<const int> stratum,
                      std::span<const int> labels) {
  if (static_cast<Eigen::Index>(stratum.size()) != y.size() ||
      labels.size() != stratum.size())
    throw DataError("outcome, stratum and label lengths differ");
  if (y.size() == 0) throw DataError("stratified effect of an empty sample");
  struct Cell {
    CompensatedSum sum[2];
    std::size_t n[2] = {0, 0};
  };
  std::map<int, Cell> cells;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l != 0 && l != 1)
      throw DataError("stratified effect needs exactly two treatments");
    auto& c = cells[stratum[i]];
    c.sum[l] += y[static_cast<Eigen::Index>(i)];
    ++c.n[l];
  }
  CompensatedSum total;
  const auto n = static_cast<double>(y.size());
  for (const auto& [s, c] : cells) {
    if (c.n[0] == 0 || c.n[1] == 0)
      throw DataError("stratum " + std::to_string(s) +
                      " lacks one of the treatments");
    const double delta = c.sum[0].value() / static_cast<double>(c.n[0]) -
                         c.sum[1].value() / static_cast<double>(c.n[1]);
    total += static_cast<double>(c.n[0] + c.n[1]) / n * delta;
  }
  return total.value();
}

double phi_coefficient(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("phi: vectors differ in length");
  double n[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1))
      throw DataError("phi: vectors must be 0/1");
    n[a[i]][b[i]] += 1.0;
  }
  const double a1 = n[1][0] + n[1][1], a0 = n[0][0] + n[0][1];
  const double b1 = n[0][1] + n[1][1], b0 = n[0][0] + n[1][0];
  if (a1 == 0 || a0 == 0 || b1 == 0 || b0 == 0)
    throw DataError("phi: a vector is constant");
  return (n[1][1] * n[0][0] - n[1][0] * n[0][1]) / std::sqrt(a1 * a0 * b1 * b0);
}

}  // namespace ipwkit
