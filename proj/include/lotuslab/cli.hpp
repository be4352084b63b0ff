#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lotuslab::cli {

struct CommonFlags {
    std::string out_override;
    std::optional<uint64_t> seed_override;
    int threads = 0;
};

/// Materialize a dataset directory from a spec file; idempotent per seed.
void cmd_generate_data(const std::string& spec_path, const CommonFlags& flags);

/// Train the experiment's protocol; writes checkpoint.ckpt,
/// train_log.csv and the resolved experiment config to the output dir.
void cmd_train(const std::string& exp_path, const CommonFlags& flags);

struct InferFlags {
    std::string ckpt_path;
    std::string image_path;
    std::string out_dir;
    int n_seeds = 1;
    uint64_t seed_base = 0;
};

/// Run inference on one PFM image; one output per seed for generative
/// checkpoints, a single output (plus a warning if seeds were requested)
/// for discriminative ones. Outputs are denormalized to the annotation
/// units recorded in the checkpoint.
void cmd_infer(const InferFlags& flags);

struct AnalyzeFlags {
    std::string kind;  // trajectory | uncertainty | frequency | ablate | eval
    std::string exp_path;
    std::string ckpt_path;  // uncertainty / frequency / eval
    std::string axis;       // ablate: T_prime_sweep | t_choice_sweep | ladder
    std::vector<int> values;
    CommonFlags common;
};

void cmd_analyze(const AnalyzeFlags& flags);

}  // namespace lotuslab::cli
