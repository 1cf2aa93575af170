#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipwkit/balance.hpp"
#include "ipwkit/estimator.hpp"
#include "ipwkit/propensity.hpp"
#include "ipwkit/synth.hpp"

namespace ipwkit {

/// Stamped into every emitted file so outputs can be traced to a config.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;

  std::string line() const;  // "ipwkit <version> config_hash=<hex> seed=<n>"
};

std::string_view library_version();

// Category summary: category, n, mean and SD before IPW, mean and SD after.
void write_effects_csv(std::ostream& out, const IpwEstimates& est,
                       const std::vector<std::string>& scheme,
                       const Provenance& prov);
void write_effects_markdown(std::ostream& out, const IpwEstimates& est,
                            const std::vector<std::string>& scheme,
                            const Provenance& prov);

/// Long format: row, column, naive difference, IPW difference.
void write_ace_csv(std::ostream& out, const AceMatrix& naive, const AceMatrix& ipw,
                   const std::vector<std::string>& scheme, const Provenance& prov);

// Balance table: one "No" and one "Yes" row per covariate.
void write_balance_csv(std::ostream& out, const BalanceReport& report,
                       const Provenance& prov);
void write_balance_markdown(std::ostream& out, const BalanceReport& report,
                            const Provenance& prov);

void write_propensities_csv(std::ostream& out, const std::vector<std::string>& ids,
                            std::span<const int> labels, const PropensityMatrix& p,
                            const std::vector<std::string>& scheme,
                            const Provenance& prov);

/// Sidecar for synthetic corpora: seed, generator echo, true and naive
/// contrasts.
void write_truth_json(std::ostream& out, const GeneratorConfig& config,
                      std::uint64_t seed, const GroundTruth& truth);

}  // namespace ipwkit
