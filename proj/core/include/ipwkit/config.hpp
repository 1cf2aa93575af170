#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipwkit/balance.hpp"
#include "ipwkit/dataset.hpp"
#include "ipwkit/design.hpp"
#include "ipwkit/glm.hpp"
#include "ipwkit/propensity.hpp"
#include "ipwkit/synth.hpp"

namespace ipwkit {

/// Everything a pipeline run depends on. Loaded from a JSON file; relative
/// paths are resolved against the directory of that file.
struct PipelineConfig {
  std::string input;
  ColumnSchema schema = ColumnSchema::standard();
  std::vector<std::string> scheme;  // empty: categories in order of appearance
  std::string scheme_path;
  std::string aggregate_path;
  InteractionPolicy interactions;
  FitOptions fit;
  ClipBounds clip;
  std::uint64_t seed = 0;
  std::string out_dir = "ipwkit-out";
  FamilyMap families;
  bool single_category_only = false;
};

PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::string& base_dir = ".");
PipelineConfig load_pipeline_config(const std::string& path);

/// Canonical JSON (sorted keys, fixed number formatting). Equal configs give
/// equal strings; the run hash is FNV-1a 64 of this text.
std::string canonical_json(const PipelineConfig& config);

GeneratorConfig parse_generator_config(std::string_view json_text);
GeneratorConfig load_generator_config(const std::string& path);
std::string canonical_json(const GeneratorConfig& config);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace ipwkit
