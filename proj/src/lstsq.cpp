#include "lotuslab/lstsq.hpp"

#include <cmath>

namespace lotuslab {

std::optional<ScaleShift> lstsq_scale_shift(const Grid& pred, const Grid& gt, const Grid& mask) {
    require_same_shape(pred, gt, "lstsq_scale_shift");
    require_same_shape(pred, mask, "lstsq_scale_shift");
    if (pred.channels() != 1) throw std::invalid_argument("lstsq_scale_shift: single-channel grids required");

    double n = 0.0, sp = 0.0, sg = 0.0, spp = 0.0, spg = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (mask[i] == 0.0) continue;
        const double p = pred[i], g = gt[i];
        n += 1.0;
        sp += p;
        sg += g;
        spp += p * p;
        spg += p * g;
    }
    if (n < 2.0) return std::nullopt;
    const double det = n * spp - sp * sp;
    // det == 0 iff pred is constant under the mask
    const double det_floor = 1e-12 * std::max(1.0, n * spp);
    if (std::abs(det) <= det_floor) return std::nullopt;
    ScaleShift r;
    r.scale = (n * spg - sp * sg) / det;
    r.shift = (sg - r.scale * sp) / n;
    return r;
}

}  // namespace lotuslab
