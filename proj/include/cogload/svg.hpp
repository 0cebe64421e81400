#pragma once

#include <span>
#include <string>

#include "cogload/proxy.hpp"

namespace cogload {

// Heatmap of per-learner measure means: one row per measure (standardized
// difficulty, reported intrinsic load, reported cognitive load, combined
// proxy), one column per learner in the given order, learner identifiers
// along the bottom edge. One rect per cell; the fill ramp is documented in
// a comment at the top of the file. Output is deterministic for a given
// input.
std::string heatmap_svg(std::span<const LearnerRow> rows);

// Line chart of the trend series against administration index, one
// polyline per measure plus a legend.
std::string trend_svg(std::span<const TrendPoint> points);

}  // namespace cogload
