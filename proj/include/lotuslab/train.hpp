#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lotuslab/checkpoint.hpp"
#include "lotuslab/codec.hpp"
#include "lotuslab/denoiser.hpp"
#include "lotuslab/diffusion.hpp"
#include "lotuslab/scenes.hpp"
#include "lotuslab/schedule.hpp"
#include "lotuslab/tape.hpp"

namespace lotuslab {

/// One named training protocol; the canonical ladder rows differ only in
/// the documented fields.
struct ProtocolConfig {
    std::string name = "custom";
    Parameterization param = Parameterization::X0;
    int T_prime = 1;
    bool preserver = false;
    Variant variant = Variant::Generative;
    std::string annotation_task = "depth_disparity";  // depth_disparity | normals
    std::string space = "depth";                      // depth | disparity
    std::vector<double> mixture_probs = {1.0, 0.0};
    bool per_sample_mixture = false;
    int steps = 3000;
    int batch_size = 8;
    double lr = 1e-3;  // toy-net rate; the base-model rate 3e-5 is far too small here
    uint64_t seed = 0;
    InitMode init = InitMode::Fresh;
    int fixed_t = 0;  // single-step training step; 0 means T
    int image_channels = 1;
    int schedule_T = kDefaultT;
    double beta_start = kDefaultBetaStart;
    double beta_end = kDefaultBetaEnd;
    ScheduleKind schedule_kind = ScheduleKind::ScaledLinear;
    bool clamp_zhat = true;
    int val_every = 250;
    int threads = 0;  // execution detail; results are thread-count independent

    bool operator==(const ProtocolConfig&) const = default;

    bool is_canonical() const;
    AnnotationCodec codec() const;
    NoiseSchedule schedule() const { return make_schedule(schedule_T, beta_start, beta_end, schedule_kind); }
    int train_t(RandomSource& rng, const StepSubsequence& sub) const;
    SampleOptions sample_options() const {
        SampleOptions o;
        o.clamp_zhat = clamp_zhat;
        return o;
    }
};

nlohmann::json protocol_to_json(const ProtocolConfig& cfg);
ProtocolConfig protocol_from_json(const nlohmann::json& j);

/// Canonical ladder presets: direct_adaptation, plus_x0, plus_single_step,
/// plus_preserver, plus_mixture, lotus_g, lotus_d.
ProtocolConfig protocol_preset(const std::string& name);
const std::vector<std::string>& canonical_protocol_names();

struct LossNodes {
    int loss = -1;
    int recon = -1;  // -1 when the protocol has no reconstruction term
    int anno = -1;
};

/// Standard diffusion objective at step t: noise the annotation by the
/// forward process and regress the parameterization target.
LossNodes standard_loss(const DenoiserNet& net, Tape& tape, std::map<std::string, int>& param_ids,
                        Parameterization p, const Grid& z_x, const Grid& z_y, int t,
                        const NoiseSchedule& sched, RandomSource& rng);

/// Reconstruction + annotation objective gated by the task switcher; one
/// shared noise draw feeds both branches (generative wiring only).
LossNodes preserver_loss(const DenoiserNet& net, Tape& tape, std::map<std::string, int>& param_ids,
                         Parameterization p, const Grid& z_x, const Grid& z_y, int t,
                         const NoiseSchedule& sched, RandomSource& rng);

struct TrainLogRow {
    int step = 0;
    double loss = 0.0;
    double recon_loss = 0.0;
    double anno_loss = 0.0;
    double val_absrel = -1.0;  // < 0 when no validation ran this step
    double seconds = 0.0;
};

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

struct TrainResult {
    ProtocolConfig cfg;
    DenoiserNet net;
    AdamState opt;
    std::vector<TrainLogRow> log;
};

/// Full training loop: mixture batches, per-config loss, Adam updates,
/// periodic validation on the held-out slice. Deterministic per seed for
/// any thread count. Throws on NaN loss.
TrainResult train_protocol(const ProtocolConfig& cfg, const std::vector<SamplePool>& pools);

/// Held-out slice used for validation: the trailing eighth of each pool
/// (at least 4, at most 16 samples per pool). Training never draws these.
std::vector<Sample> held_out_slice(const std::vector<SamplePool>& pools);
int train_limit(const SamplePool& pool);

Checkpoint make_checkpoint(const TrainResult& result);
void restore_from_checkpoint(const Checkpoint& ckpt, DenoiserNet& net, ProtocolConfig& cfg);

/// One model inference in the normalized annotation space, following the
/// protocol's variant and step rule.
Grid infer_model_space(const DenoiserNet& net, const ProtocolConfig& cfg,
                       const NoiseSchedule& sched, const Grid& image_enc, RandomSource* rng);

}  // namespace lotuslab
