#include "lotuslab/cli.hpp"

#include <fstream>
#include <iostream>

#include "lotuslab/eval.hpp"
#include "lotuslab/experiment.hpp"
#include "lotuslab/pfm.hpp"
#include "lotuslab/svg.hpp"

namespace lotuslab::cli {

namespace {

std::vector<SamplePool> load_pools(const ExperimentFile& exp) {
    if (exp.dataset_pools.empty()) throw UserError("experiment lists no dataset pools");
    std::vector<SamplePool> pools;
    for (const auto& dir : exp.dataset_pools) {
        if (!std::filesystem::exists(std::filesystem::path(dir) / "manifest.json"))
            throw UserError("dataset pool missing: " + dir + " (run generate-data first)");
        pools.push_back(load_dataset(dir));
    }
    return pools;
}

ExperimentFile resolve_experiment(const std::string& exp_path, const CommonFlags& flags) {
    ExperimentFile exp = load_experiment(exp_path);
    if (!flags.out_override.empty()) exp.output_dir = flags.out_override;
    if (flags.seed_override) exp.protocol.seed = *flags.seed_override;
    if (flags.threads > 0) exp.protocol.threads = flags.threads;
    if (exp.output_dir.empty()) throw UserError("experiment has no output_dir (use --out)");
    return exp;
}

void write_resolved(const ExperimentFile& exp) {
    std::filesystem::create_directories(exp.output_dir);
    save_experiment(std::filesystem::path(exp.output_dir) / "experiment.resolved.json", exp);
}

struct LoadedModel {
    DenoiserNet net;
    ProtocolConfig cfg;
};

LoadedModel load_model(const std::string& ckpt_path) {
    if (ckpt_path.empty()) throw UserError("this command requires --ckpt");
    if (!std::filesystem::exists(ckpt_path)) throw UserError("checkpoint not found: " + ckpt_path);
    LoadedModel m;
    restore_from_checkpoint(load_checkpoint(ckpt_path), m.net, m.cfg);
    return m;
}

}  // namespace

void cmd_generate_data(const std::string& spec_path, const CommonFlags& flags) {
    DataSpecFile spec_file = load_data_spec(spec_path);
    if (!flags.out_override.empty()) spec_file.output_dir = flags.out_override;
    if (flags.seed_override) spec_file.spec.seed = *flags.seed_override;
    if (spec_file.output_dir.empty()) throw UserError("data spec has no output_dir (use --out)");
    write_dataset(spec_file.output_dir, spec_file.spec);
    std::ofstream resolved(std::filesystem::path(spec_file.output_dir) / "spec.resolved.json");
    resolved << data_spec_to_json(spec_file).dump(2) << "\n";
    std::cout << "wrote " << spec_file.spec.count << " samples to " << spec_file.output_dir << "\n";
}

void cmd_train(const std::string& exp_path, const CommonFlags& flags) {
    const ExperimentFile exp = resolve_experiment(exp_path, flags);
    const std::vector<SamplePool> pools = load_pools(exp);
    write_resolved(exp);
    TrainResult result = train_protocol(exp.protocol, pools);
    const std::filesystem::path out(exp.output_dir);
    save_checkpoint(out / "checkpoint.ckpt", make_checkpoint(result));
    write_train_log_csv(out / "train_log.csv", result.log);
    std::cout << "trained '" << exp.protocol.name << "' for " << exp.protocol.steps
              << " steps; checkpoint at " << (out / "checkpoint.ckpt").string() << "\n";
}

void cmd_infer(const InferFlags& flags) {
    LoadedModel m = load_model(flags.ckpt_path);
    if (flags.image_path.empty() || !std::filesystem::exists(flags.image_path))
        throw UserError("image not found: " + flags.image_path);
    const Grid image = read_pfm(flags.image_path);
    if (image.channels() != m.cfg.image_channels)
        throw UserError("image channel count does not match the checkpoint");
    std::filesystem::create_directories(flags.out_dir);
    const NoiseSchedule sched = m.cfg.schedule();
    const AnnotationCodec codec = m.cfg.codec();
    const Grid image_enc = encode_image(image);

    auto decode_units = [&](const Grid& pred) {
        if (codec.task == "normals") return codec.decode_normals(pred);
        if (codec.space == "disparity")
            return denormalize_annotation(pred, 1.0 / codec.d_max, 1.0 / codec.d_min);
        return denormalize_annotation(pred, codec.d_min, codec.d_max);
    };

    const std::filesystem::path out(flags.out_dir);
    if (m.cfg.variant == Variant::Discriminative) {
        if (flags.n_seeds > 1)
            std::cerr << "warning: discriminative checkpoint ignores --seeds; emitting one output\n";
        const Grid pred = infer_model_space(m.net, m.cfg, sched, image_enc, nullptr);
        write_pfm(out / "prediction.pfm", decode_units(pred));
        std::cout << "wrote " << (out / "prediction.pfm").string() << "\n";
        return;
    }
    for (int i = 0; i < std::max(1, flags.n_seeds); ++i) {
        RandomSource rng(flags.seed_base + static_cast<uint64_t>(i), 0x1F);
        const Grid pred = infer_model_space(m.net, m.cfg, sched, image_enc, &rng);
        const std::string name = "prediction_seed" + std::to_string(i) + ".pfm";
        write_pfm(out / name, decode_units(pred));
        std::cout << "wrote " << (out / name).string() << "\n";
    }
}

namespace {

void analyze_trajectory(const ExperimentFile& exp, const std::vector<SamplePool>& pools) {
    const std::filesystem::path out(exp.output_dir);
    const std::vector<Sample> held_out = held_out_slice(pools);
    const NoiseSchedule sched = exp.protocol.schedule();
    const AnnotationCodec codec = exp.protocol.codec();
    const StepSubsequence sub = inference_subsequence(exp.protocol.schedule_T, 50);
    std::vector<uint64_t> seeds;
    for (int i = 0; i < exp.eval_n_seeds; ++i) seeds.push_back(exp.eval_seed_base + i);

    std::vector<SvgSeries> curves;
    for (const auto param : {Parameterization::Epsilon, Parameterization::X0, Parameterization::V}) {
        ProtocolConfig cfg = exp.protocol;
        cfg.param = param;
        cfg.name = exp.protocol.name + "_" + to_string(param);
        TrainResult result = train_protocol(cfg, pools);
        const auto rows = trajectory_metrics(result.net.as_denoise_fn(), sched, sub, param,
                                             held_out, codec, seeds, cfg.sample_options(),
                                             cfg.threads);
        write_trajectory_csv(out / ("trajectory_" + to_string(param) + ".csv"), rows,
                             to_string(param));
        SvgSeries series;
        series.name = to_string(param);
        for (const auto& r : rows) series.points.emplace_back(double(r.tau), r.mean_absrel);
        curves.push_back(std::move(series));
    }
    write_svg_lineplot(out / "trajectory.svg", "AbsRel of predicted clean samples per step", "tau",
                       "AbsRel", curves);
}

void analyze_uncertainty(const ExperimentFile& exp, const std::vector<SamplePool>& pools,
                         const std::string& ckpt_path) {
    LoadedModel m = load_model(ckpt_path);
    const std::filesystem::path out(exp.output_dir);
    const std::vector<Sample> held_out = held_out_slice(pools);
    const NoiseSchedule sched = m.cfg.schedule();
    std::vector<uint64_t> seeds;
    for (int i = 0; i < exp.eval_n_seeds; ++i) seeds.push_back(exp.eval_seed_base + i);
    std::ofstream csv(out / "uncertainty.csv");
    csv << "scene,edge_mean,interior_mean\n";
    for (size_t i = 0; i < held_out.size(); ++i) {
        const Grid u = uncertainty_map(m.net.as_denoise_fn(), encode_image(held_out[i].image),
                                       m.net.cfg.anno_channels, sched, m.cfg.variant, m.cfg.param,
                                       seeds, m.cfg.fixed_t, m.cfg.sample_options());
        write_pfm(out / ("uncertainty_" + std::to_string(i) + ".pfm"), u);
        const auto means = edge_interior_means(u, depth_edge_band(held_out[i].depth));
        csv << i << "," << means.edge << "," << means.interior << "\n";
    }
}

void analyze_frequency(const ExperimentFile& exp, const std::vector<SamplePool>& pools,
                       const std::string& ckpt_path) {
    LoadedModel m = load_model(ckpt_path);
    const std::filesystem::path out(exp.output_dir);
    const std::vector<Sample> held_out = held_out_slice(pools);
    const NoiseSchedule sched = m.cfg.schedule();
    const AnnotationCodec codec = m.cfg.codec();
    std::vector<Grid> preds, gts, images;
    for (size_t i = 0; i < held_out.size(); ++i) {
        RandomSource rng(exp.eval_seed_base, 0xF0E9 + i);
        const Grid pred = infer_model_space(m.net, m.cfg, sched, encode_image(held_out[i].image),
                                            &rng);
        preds.push_back(codec.task == "normals" ? channel(pred, 0)
                                                : codec.decode_depth(pred));
        gts.push_back(held_out[i].depth);
        images.push_back(held_out[i].image.channels() == 1 ? held_out[i].image
                                                           : channel(held_out[i].image, 0));
    }
    band_ratio_report(preds, gts, images).write_csv(out / "frequency_bands.csv");
}

void analyze_ablate(const ExperimentFile& exp, const std::vector<SamplePool>& pools,
                    const std::string& axis, std::vector<int> values) {
    if (axis.empty()) throw UserError("analyze ablate requires --axis");
    if (values.empty()) {
        if (axis == "T_prime_sweep") values = {1000, 100, 10, 1};
        else if (axis == "t_choice_sweep") values = {1000, 750, 500, 250, 1};
    }
    const auto rows = ablate(axis, exp.protocol, values, pools, exp.eval_seed_base);
    const std::filesystem::path out(exp.output_dir);
    write_ablate_csv(out / ("ablate_" + axis + ".csv"), axis, rows);
    if (axis != "ladder") {
        SvgSeries series;
        series.name = "AbsRel";
        for (const auto& r : rows) series.points.emplace_back(r.value, r.absrel);
        write_svg_lineplot(out / ("ablate_" + axis + ".svg"), axis, "value", "AbsRel", {series});
    }
}

void analyze_eval(const ExperimentFile& exp, const std::vector<SamplePool>& pools,
                  const std::string& ckpt_path) {
    LoadedModel m = load_model(ckpt_path);
    const std::filesystem::path out(exp.output_dir);
    const std::vector<Sample> held_out = held_out_slice(pools);
    const EvalReport report =
        evaluate_model(m.net, m.cfg, held_out, exp.eval_seed_base, exp.protocol.threads);
    report.write_csv(out / "eval_report.csv");
    report.write_json(out / "eval_report.json");
}

}  // namespace

void cmd_analyze(const AnalyzeFlags& flags) {
    const ExperimentFile exp = resolve_experiment(flags.exp_path, flags.common);
    const std::vector<SamplePool> pools = load_pools(exp);
    write_resolved(exp);
    if (flags.kind == "trajectory") {
        analyze_trajectory(exp, pools);
    } else if (flags.kind == "uncertainty") {
        analyze_uncertainty(exp, pools, flags.ckpt_path);
    } else if (flags.kind == "frequency") {
        analyze_frequency(exp, pools, flags.ckpt_path);
    } else if (flags.kind == "ablate") {
        analyze_ablate(exp, pools, flags.axis, flags.values);
    } else if (flags.kind == "eval") {
        analyze_eval(exp, pools, flags.ckpt_path);
    } else {
        throw UserError("unknown analyze kind: " + flags.kind);
    }
    std::cout << "analysis artifacts written to " << exp.output_dir << "\n";
}

}  // namespace lotuslab::cli
