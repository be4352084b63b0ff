#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "lotuslab/cli.hpp"
#include "lotuslab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lotuslab: desk-scale diffusion lab for dense prediction"};
    app.require_subcommand(1);

    lotuslab::cli::CommonFlags common;
    std::string exp_path, spec_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", common.out_override, "override the output directory");
        cmd->add_option("--seed", common.seed_override, "override the top-level seed");
        cmd->add_option("--threads", common.threads, "cap worker threads");
    };

    CLI::App* gen = app.add_subcommand("generate-data", "materialize a dataset directory");
    gen->add_option("--exp", spec_path, "data spec JSON")->required();
    add_common(gen);

    CLI::App* train = app.add_subcommand("train", "train a protocol from an experiment file");
    train->add_option("--exp", exp_path, "experiment JSON")->required();
    add_common(train);

    lotuslab::cli::InferFlags infer_flags;
    CLI::App* infer = app.add_subcommand("infer", "run a checkpoint on one PFM image");
    infer->add_option("--ckpt", infer_flags.ckpt_path, "checkpoint path")->required();
    infer->add_option("--image", infer_flags.image_path, "input image PFM")->required();
    infer->add_option("--out", infer_flags.out_dir, "output directory")->required();
    infer->add_option("--seeds", infer_flags.n_seeds, "number of noise seeds (generative)");
    infer->add_option("--seed", infer_flags.seed_base, "base seed");

    lotuslab::cli::AnalyzeFlags analyze_flags;
    CLI::App* analyze = app.add_subcommand("analyze", "produce analysis artifacts");
    analyze->add_option("kind", analyze_flags.kind,
                        "trajectory | uncertainty | frequency | ablate | eval")
        ->required();
    analyze->add_option("--exp", analyze_flags.exp_path, "experiment JSON")->required();
    analyze->add_option("--ckpt", analyze_flags.ckpt_path, "checkpoint (uncertainty/frequency/eval)");
    analyze->add_option("--axis", analyze_flags.axis, "ablate axis");
    analyze->add_option("--values", analyze_flags.values, "ablate sweep values");
    add_common(analyze);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            lotuslab::cli::cmd_generate_data(spec_path, common);
        } else if (train->parsed()) {
            lotuslab::cli::cmd_train(exp_path, common);
        } else if (infer->parsed()) {
            lotuslab::cli::cmd_infer(infer_flags);
        } else if (analyze->parsed()) {
            analyze_flags.common = common;
            lotuslab::cli::cmd_analyze(analyze_flags);
        }
    } catch (const lotuslab::UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
