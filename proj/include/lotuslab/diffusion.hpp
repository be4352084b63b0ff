#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lotuslab/grid.hpp"
#include "lotuslab/rng.hpp"
#include "lotuslab/schedule.hpp"

namespace lotuslab {

/// What the denoiser regresses: the added noise, the clean sample, or
/// their combination v = sqrt(abar)*eps - sqrt(1-abar)*z.
enum class Parameterization { Epsilon, X0, V };

Parameterization parameterization_from_string(const std::string& s);
std::string to_string(Parameterization p);

/// One denoiser evaluation at step t. `noisy` is null for noise-free
/// (discriminative) nets.
using DenoiseFn = std::function<Grid(const Grid* noisy, const Grid& image, int t)>;

struct SampleOptions {
    bool clamp_zhat = true;  // clamp predicted clean samples to [-1, 1]
    double clamp_lo = -1.0;
    double clamp_hi = 1.0;
    bool deterministic = true;  // sigma_tau = 0 throughout
};

/// Predicted clean samples and noisy samples along a denoising run,
/// steps in descending tau order.
struct TrajectoryRecord {
    std::vector<int> taus;
    std::vector<Grid> zhat;
    std::vector<Grid> ztau;

    /// Writes one PFM pair per step plus an index CSV
    /// "step_tau,zhat_path,ztau_path".
    void save(const std::filesystem::path& dir) const;
};

/// sqrt(abar)*z + sqrt(1-abar)*eps
Grid forward_noise(const Grid& z, const Grid& eps, double abar_t);

/// Regression target under the given parameterization.
Grid target_for(Parameterization p, const Grid& z, const Grid& eps, double abar_t);

/// Recover the clean-sample estimate from a model output.
Grid predict_clean(Parameterization p, const Grid& model_out, const Grid& z_t, double abar_tau);

/// Direction component of the denoising step.
Grid direction_term(Parameterization p, const Grid& model_out, const Grid& z_tau,
                    const Grid& z_hat, double abar_tau, const DdimCoeffs& coeffs);

/// sqrt(abar_prev)*z_hat + dir (+ sigma*noise when stochastic).
Grid ddim_step(const Grid& z_hat, const Grid& dir, const DdimCoeffs& coeffs, const Grid* noise);

struct SampleResult {
    Grid output;
    std::optional<TrajectoryRecord> trajectory;
};

/// Full denoising run: starts from Gaussian noise of the annotation
/// shape, walks the subsequence downward, returns the final estimate.
SampleResult sample(const DenoiseFn& net, const Grid& z_x, int anno_channels,
                    const NoiseSchedule& sched, const StepSubsequence& subseq, Parameterization p,
                    RandomSource& rng, bool record, const SampleOptions& opts = {});

enum class Variant { Generative, Discriminative };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

/// One denoiser call. Generative draws pure noise for the annotation
/// input; discriminative feeds the image alone and requires x0
/// parameterization. `t` defaults to T but may be overridden to probe
/// other single-step choices.
Grid single_step_infer(const DenoiseFn& net, const Grid& z_x, int anno_channels,
                       const NoiseSchedule& sched, RandomSource* rng, Variant variant,
                       Parameterization p, int t = 0, const SampleOptions& opts = {});

}  // namespace lotuslab
