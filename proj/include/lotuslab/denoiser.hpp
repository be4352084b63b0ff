#pragma once

#include <map>
#include <string>

#include "lotuslab/adam.hpp"
#include "lotuslab/diffusion.hpp"
#include "lotuslab/grid.hpp"
#include "lotuslab/rng.hpp"
#include "lotuslab/tape.hpp"

namespace lotuslab {

/// Discrete conditioning signal selecting the output domain.
enum class TaskSwitch : int {
    ReconstructImage = 0,  // s_x
    PredictAnnotation = 1, // s_y
};

struct DenoiserConfig {
    int image_channels = 1;
    int anno_channels = 1;
    Variant variant = Variant::Generative;
    int base_width = 16;
    int mid_width = 32;
    int bottleneck_width = 64;
    int embed_dim = 32;
    int t_max = 1000;

    int input_channels() const {
        return variant == Variant::Generative ? image_channels + anno_channels : image_channels;
    }
};

enum class InitMode { Fresh, DuplicatedInput };

/// Sinusoidal position encoding as a (1, dim, 1) row vector; dim must be even.
Grid sinusoidal_encoding(double pos, int dim);

/// Raw positional encoding of the switch id, added to the time embedding
/// by the caller.
Grid switch_embedding(TaskSwitch s, int embed_dim);

/// Small convolutional encoder-decoder: two stride-2 stages down, a
/// bottleneck, two nearest-upsample stages back with additive skips.
/// Conditioning enters as a per-channel bias after each stage's first conv.
class DenoiserNet {
public:
    DenoiserConfig cfg;
    ParamMap params;

    long param_count() const;

    /// Time embedding after the learned 2-layer map (no tape).
    Grid time_embedding(int t) const;

    /// Build the forward graph on an existing tape. Parameter leaves are
    /// created on demand and reused through `param_ids`, so several
    /// branches (e.g. both switcher tasks) share one parameter set.
    int build_forward(Tape& tape, std::map<std::string, int>& param_ids, const Grid* noisy,
                      const Grid& image, int t, TaskSwitch s) const;

    /// One forward pass on a private tape; returns the output value.
    Grid apply(const Grid* noisy, const Grid& image, int t, TaskSwitch s) const;

    /// Adapter for the diffusion sampling loop.
    DenoiseFn as_denoise_fn(TaskSwitch s = TaskSwitch::PredictAnnotation) const;
};

DenoiserNet init_denoiser(const DenoiserConfig& cfg, RandomSource& rng,
                          InitMode mode = InitMode::Fresh);

/// Validated single forward pass (channel counts, variant usage, t range).
Grid denoise_apply(const DenoiserNet& net, const Grid* noisy_annotation, const Grid& z_x, int t,
                   TaskSwitch s);

}  // namespace lotuslab
