#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lotuslab/metrics.hpp"
#include "lotuslab/spectral.hpp"
#include "lotuslab/train.hpp"

namespace lotuslab {

/// Metric bundle over an evaluation set. Depth runs fill the depth block,
/// normals runs the angular block; per_image carries the primary metric.
struct EvalReport {
    double absrel = 0.0;
    double absrel_depth_aligned = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double mean_angular_deg = 0.0;
    double pct_below_11_25 = 0.0;
    double pct_below_30 = 0.0;
    long n_pixels = 0;
    long excluded_pixels = 0;
    std::vector<double> per_image;  // primary metric per scene

    void write_csv(const std::filesystem::path& path) const;   // "metric,value,n"
    void write_json(const std::filesystem::path& path) const;
};

/// Held-out evaluation of a trained protocol; generative inference uses
/// one fixed noise stream per scene derived from eval_seed.
EvalReport evaluate_model(const DenoiserNet& net, const ProtocolConfig& cfg,
                          const std::vector<Sample>& scenes, uint64_t eval_seed, int threads = 0);

struct TrajectoryRow {
    int tau = 0;
    double mean_absrel = 0.0;
    double std_absrel = 0.0;
};

/// Per-step quality of the predicted clean samples along the denoising
/// run: mean AbsRel over scenes per tau, spread across seeds. Predictions
/// are aligned per step.
std::vector<TrajectoryRow> trajectory_metrics(const DenoiseFn& net, const NoiseSchedule& sched,
                                              const StepSubsequence& subseq, Parameterization p,
                                              const std::vector<Sample>& scenes,
                                              const AnnotationCodec& codec,
                                              const std::vector<uint64_t>& seeds,
                                              const SampleOptions& opts, int threads = 0);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows, const std::string& param_label);

/// Per-pixel standard deviation of single-step inferences across noise
/// seeds; rejects discriminative nets, whose output cannot vary.
Grid uncertainty_map(const DenoiseFn& net, const Grid& image_enc, int anno_channels,
                     const NoiseSchedule& sched, Variant variant, Parameterization p,
                     const std::vector<uint64_t>& seeds, int fixed_t = 0,
                     const SampleOptions& opts = {});

/// Pixels within `band_px` of a depth discontinuity (gradient magnitude
/// above 10% of the local depth range), grown by dilation.
Grid depth_edge_band(const Grid& depth, int band_px = 2);

struct EdgeInteriorMeans {
    double edge = 0.0;
    double interior = 0.0;
};

EdgeInteriorMeans edge_interior_means(const Grid& map, const Grid& edge_band);

struct BandRatioReport {
    BandMap bands;
    std::vector<double> image_energy;
    std::vector<double> pred_energy;
    std::vector<double> gt_energy;
    std::vector<double> pred_gt_ratio;   // -1 marks an empty group
    std::vector<double> image_gt_ratio;

    void write_csv(const std::filesystem::path& path) const;
};

/// Mean per-band spectral energy of predictions, ground truths and input
/// images (padded to powers of two), with pred/gt and image/gt ratios.
BandRatioReport band_ratio_report(const std::vector<Grid>& preds, const std::vector<Grid>& gts,
                                  const std::vector<Grid>& images, double base = 2.0,
                                  int group_count = 8);

struct AblateRow {
    std::string label;
    double value = 0.0;   // swept value, when meaningful
    double absrel = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
};

/// Trains one model per swept value (shared seed and data) and evaluates
/// on the held-out slice. Axes: T_prime_sweep, t_choice_sweep, ladder.
std::vector<AblateRow> ablate(const std::string& axis, const ProtocolConfig& base_cfg,
                              const std::vector<int>& values, const std::vector<SamplePool>& pools,
                              uint64_t eval_seed);

void write_ablate_csv(const std::filesystem::path& path, const std::string& axis,
                      const std::vector<AblateRow>& rows);

}  // namespace lotuslab
