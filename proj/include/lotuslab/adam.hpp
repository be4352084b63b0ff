#pragma once

#include <map>
#include <string>

#include "lotuslab/grid.hpp"

namespace lotuslab {

/// Named parameter set; iteration order (and thus every update order)
/// follows the map's key ordering.
using ParamMap = std::map<std::string, Grid>;

struct AdamState {
    ParamMap first_moment;
    ParamMap second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam_state(const ParamMap& params, double beta1 = 0.9, double beta2 = 0.999,
                          double eps = 1e-8);

/// Standard bias-corrected Adam update, applied in place.
void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr);

}  // namespace lotuslab
