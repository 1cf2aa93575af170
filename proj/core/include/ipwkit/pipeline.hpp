#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ipwkit/config.hpp"

namespace ipwkit {

enum class Command { kRun, kBalance, kEffects };

struct PipelineResult {
  std::string config_hash;
  std::vector<std::string> files;  // relative to out_dir, in write order
  std::size_t records = 0;
  std::size_t dropped = 0;
};

/// Runs the analysis described by `config` and writes its outputs to
/// config.out_dir. `run-metadata.json` is always written, including on
/// failure, in which case it names the failing stage and the exception is
/// rethrown. Progress lines go to `log` when it is non-null.
PipelineResult run_pipeline(const PipelineConfig& config, Command command,
                            std::ostream* log = nullptr);

}  // namespace ipwkit
