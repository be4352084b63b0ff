#include "lotuslab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace lotuslab {

AdamState make_adam_state(const ParamMap& params, double beta1, double beta2, double eps) {
    AdamState s;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    for (const auto& [name, p] : params) {
        s.first_moment.emplace(name, Grid(p.height(), p.width(), p.channels()));
        s.second_moment.emplace(name, Grid(p.height(), p.width(), p.channels()));
    }
    return s;
}

void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
    const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
    for (auto& [name, p] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) throw std::invalid_argument("adam_step: missing gradient for " + name);
        const Grid& g = git->second;
        require_same_shape(p, g, "adam_step");
        Grid& m = state.first_moment.at(name);
        Grid& v = state.second_moment.at(name);
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace lotuslab
