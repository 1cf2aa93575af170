#pragma once

#include <string>

#include "ipwkit/propensity.hpp"

namespace ipwkit {

/// Box plots of the propensity scores: one panel per assigned category,
/// one box per scored category. Output depends only on the summary, so
/// identical input yields identical bytes.
std::string render_overlap_svg(const OverlapSummary& summary,
                               const std::string& comment = {});

}  // namespace ipwkit
