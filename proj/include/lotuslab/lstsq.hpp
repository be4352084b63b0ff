#pragma once

#include <optional>

#include "lotuslab/grid.hpp"

namespace lotuslab {

struct ScaleShift {
    double scale = 1.0;
    double shift = 0.0;
};

/// Closed-form minimizer of sum mask*(scale*pred + shift - gt)^2 via the
/// 2x2 normal equations. Returns nullopt when the system is degenerate
/// (fewer than 2 valid pixels, or constant pred under the mask).
std::optional<ScaleShift> lstsq_scale_shift(const Grid& pred, const Grid& gt, const Grid& mask);

}  // namespace lotuslab
