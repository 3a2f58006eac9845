#pragma once

#include <string>

#include "covshap/analysis.hpp"

namespace covshap {

// Horizontal bar chart of mean |S_v| sorted by rank; dark bars positive
// effect, light bars negative, grey neutral. One rect element per feature.
std::string importance_bar_svg(const ImportanceReport& report, const std::string& title);

// Strip chart of the S_I distribution per feature across shuffled orderings,
// with the base ordering's S_I marked. One group element per feature.
std::string robustness_strip_svg(const RobustnessReport& report, const std::string& title);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace covshap
