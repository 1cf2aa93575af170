#include "ipwkit/report.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "format.hpp"
#include "ipwkit/config.hpp"
#include "ipwkit/rng.hpp"

#ifndef IPWKIT_VERSION
#define IPWKIT_VERSION "0.0.0"
#endif

namespace ipwkit {

using detail::csv_escape;
using detail::fmt_fixed;
using detail::fmt_g;

namespace {

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// Thousands separators for large F values, as in printed tables.
std::string grouped(double v, int decimals) {
  if (!std::isfinite(v)) return std::isnan(v) ? "n/a" : (v > 0 ? "inf" : "-inf");
  std::string s = fmt_fixed(std::abs(v), decimals);
  const auto dot = s.find('.');
  std::string head = s.substr(0, dot), tail = dot == std::string::npos ? "" : s.substr(dot);
  std::string g;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i && (head.size() - i) % 3 == 0) g.push_back(',');
    g.push_back(head[i]);
  }
  return (v < 0 ? "-" : "") + g + tail;
}

std::string fmt_df(double df) {
  if (df >= 1000.0) return fmt_fixed(df / 1000.0, 0) + "E3";
  return fmt_fixed(df, 0);
}

}  // namespace

std::string_view library_version() { return IPWKIT_VERSION; }

std::string Provenance::line() const {
  return "ipwkit " + std::string(library_version()) + " config_hash=" + config_hash +
         " seed=" + std::to_string(seed);
}

void write_effects_csv(std::ostream& out, const IpwEstimates& est,
                       const std::vector<std::string>& scheme, const Provenance& prov) {
  out << "# " << prov.line() << '\n';
  out << "category,n,mean_before,sd_before,mean_after,sd_after,weight_sum,ess\n";
  for (std::size_t t = 0; t < est.categories.size(); ++t) {
    const auto& c = est.categories[t];
    out << csv_escape(scheme[t]) << ',' << c.n << ',' << fmt_g(c.mean) << ','
        << fmt_g(c.sd) << ',' << fmt_g(c.weighted_mean) << ',' << fmt_g(c.weighted_sd)
        << ',' << fmt_g(c.weight_sum) << ',' << fmt_g(c.ess) << '\n';
  }
}

void write_effects_markdown(std::ostream& out, const IpwEstimates& est,
                            const std::vector<std::string>& scheme,
                            const Provenance& prov) {
  out << "<!-- " << prov.line() << " -->\n\n";
  out << "## Effects of categories on citations before and after IPW\n\n";
  out << "| Category | Number of papers | Before IPW mean | Before IPW SD | "
         "After IPW mean | After IPW SD | ESS |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|\n";
  for (std::size_t t = 0; t < est.categories.size(); ++t) {
    const auto& c = est.categories[t];
    out << "| " << md_escape(scheme[t]) << " | " << grouped(static_cast<double>(c.n), 0)
        << " | " << fmt_fixed(c.mean, 2) << " | " << fmt_fixed(c.sd, 2) << " | "
        << fmt_fixed(c.weighted_mean, 2) << " | " << fmt_fixed(c.weighted_sd, 2)
        << " | " << fmt_fixed(c.ess, 1) << " |\n";
  }
  out << "\nNote. The weighted standard deviation uses the sum of weights as "
         "divisor. Differences between categories are the causal quantities; "
         "absolute means after IPW are descriptive.\n";

  const auto naive = ace_matrix(est, EffectBasis::kUnweighted);
  const auto ipw = ace_matrix(est, EffectBasis::kWeighted);
  auto matrix = [&](const char* title, const AceMatrix& a) {
    out << "\n### " << title << " (row minus column)\n\n|  |";
    for (const auto& s : scheme) out << ' ' << md_escape(s) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < scheme.size(); ++i) out << "---:|";
    out << '\n';
    for (std::size_t s = 0; s < scheme.size(); ++s) {
      out << "| " << md_escape(scheme[s]) << " |";
      for (std::size_t t = 0; t < scheme.size(); ++t)
        out << ' '
            << fmt_fixed(a(static_cast<int>(s), static_cast<int>(t)) + 0.0, 2)
            << " |";
      out << '\n';
    }
  };
  matrix("Mean differences before IPW", naive);
  matrix("Average causal effects after IPW", ipw);
}

void write_ace_csv(std::ostream& out, const AceMatrix& naive, const AceMatrix& ipw,
                   const std::vector<std::string>& scheme, const Provenance& prov) {
  out << "# " << prov.line() << '\n';
  out << "row,column,naive_difference,ipw_difference\n";
  for (std::size_t s = 0; s < scheme.size(); ++s)
    for (std::size_t t = 0; t < scheme.size(); ++t)
      out << csv_escape(scheme[s]) << ',' << csv_escape(scheme[t]) << ','
          << fmt_g(naive(static_cast<int>(s), static_cast<int>(t)) + 0.0) << ','
          << fmt_g(ipw(static_cast<int>(s), static_cast<int>(t)) + 0.0) << '\n';
}

void write_balance_csv(std::ostream& out, const BalanceReport& report,
                       const Provenance& prov) {
  out << "# " << prov.line() << '\n';
  out << "variable,family,propensity_score,f,df1,df2,reduction_percent";
  for (const auto& s : report.scheme) out << ',' << csv_escape("mean:" + s);
  out << '\n';
  for (const auto& r : report.rows) {
    for (int adjusted = 0; adjusted < 2; ++adjusted) {
      const auto& means = adjusted ? r.means_after : r.means_before;
      out << csv_escape(r.name) << ',' << to_string(r.family) << ','
          << (adjusted ? "Yes" : "No") << ','
          << fmt_g(adjusted ? r.f_after : r.f_before) << ',' << r.q << ','
          << fmt_g(adjusted ? r.df_after : r.df_before) << ','
          << (adjusted ? fmt_g(r.reduction_percent) : std::string());
      for (double m : means) out << ',' << fmt_g(m);
      out << '\n';
    }
  }
}

void write_balance_markdown(std::ostream& out, const BalanceReport& report,
                            const Provenance& prov) {
  out << "<!-- " << prov.line() << " -->\n\n";
  out << "## Propensity score check of covariates\n\n";
  const int q = static_cast<int>(report.scheme.size()) - 1;
  const double df = static_cast<double>(report.n) - report.model_size;
  out << "| Variable | Propensity score? | F-Test (F(" << q << ", " << fmt_df(df)
      << ")) |";
  for (const auto& s : report.scheme) out << ' ' << md_escape(s) << " |";
  out << "\n|---|---|---:|";
  for (std::size_t i = 0; i < report.scheme.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& r : report.rows) {
    const int decimals = r.family == Family::kLogit ? 2 : 1;
    for (int adjusted = 0; adjusted < 2; ++adjusted) {
      const auto& means = adjusted ? r.means_after : r.means_before;
      out << "| " << (adjusted ? "" : md_escape(r.name)) << " | "
          << (adjusted ? "Yes" : "No") << " | "
          << grouped(adjusted ? r.f_after : r.f_before, 1) << " |";
      for (double m : means) out << ' ' << fmt_fixed(m, decimals) << " |";
      out << '\n';
    }
  }
  out << "\nF statistics are Wald tests of the category dummies on the F scale. "
         "Families: ";
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    out << (i ? ", " : "") << report.rows[i].name << " = " << to_string(report.rows[i].family);
  out << ".\n";
  out << "\n| Variable | Reduction of F (%) |\n|---|---:|\n";
  for (const auto& r : report.rows)
    out << "| " << md_escape(r.name) << " | " << grouped(r.reduction_percent, 1) << " |\n";
  if (!report.skipped.empty()) {
    out << "\nConstant covariates not tested: ";
    for (std::size_t i = 0; i < report.skipped.size(); ++i)
      out << (i ? ", " : "") << report.skipped[i];
    out << ".\n";
  }
}

void write_propensities_csv(std::ostream& out, const std::vector<std::string>& ids,
                            std::span<const int> labels, const PropensityMatrix& p,
                            const std::vector<std::string>& scheme,
                            const Provenance& prov) {
  out << "# " << prov.line() << '\n';
  out << "id,assigned";
  for (const auto& s : scheme) out << ',' << csv_escape("p:" + s);
  out << ",clipped\n";
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    out << csv_escape(ids[static_cast<std::size_t>(i)]) << ','
        << csv_escape(scheme[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]);
    for (Eigen::Index k = 0; k < p.scores.cols(); ++k) out << ',' << fmt_g(p.scores(i, k));
    out << ',' << (p.clipped.row(i).any() ? 1 : 0) << '\n';
  }
}

void write_truth_json(std::ostream& out, const GeneratorConfig& config,
                      std::uint64_t seed, const GroundTruth& truth) {
  using nlohmann::json;
  auto matrix = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c) + 0.0);
      rows.push_back(row);
    }
    return rows;
  };
  json j;
  j["tool"] = "ipwkit";
  j["version"] = std::string(library_version());
  j["seed"] = seed;
  j["rng"] = std::string(kRngAlgorithm);
  j["config"] = json::parse(canonical_json(config));
  j["config_hash"] = hex64(fnv1a64(canonical_json(config)));
  j["categories"] = config.categories;
  j["ace"] = matrix(truth.ace);
  j["expected_ace"] = matrix(truth.expected_ace);
  j["naive_means"] = truth.naive_means;
  out << j.dump(2) << '\n';
}

}  // namespace ipwkit
