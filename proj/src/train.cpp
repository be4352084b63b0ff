#include "lotuslab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "lotuslab/metrics.hpp"
#include "lotuslab/parallel.hpp"

namespace lotuslab {

namespace {

// stream ids fanned out from the protocol seed
constexpr uint64_t kInitStream = 1;
constexpr uint64_t kMixtureStream = 2;
constexpr uint64_t kValStream = 3;
constexpr uint64_t kNoiseStreamBase = 0x100000;

Grid replicate_channels(const Grid& g, int channels) {
    if (g.channels() == channels) return g;
    Grid out(g.height(), g.width(), channels);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            for (int c = 0; c < channels; ++c) out.at(y, x, c) = g.at(y, x, c % g.channels());
    return out;
}

int mse_node(Tape& tape, int pred, const Grid& target) {
    int diff = tape.sub(pred, tape.leaf(target));
    int sq = tape.mul(diff, diff);
    return tape.scale(tape.reduce_sum(sq), 1.0 / double(target.size()));
}

}  // namespace

bool ProtocolConfig::is_canonical() const {
    if (preserver && T_prime != 1) return false;
    if (variant == Variant::Discriminative && param != Parameterization::X0) return false;
    return true;
}

AnnotationCodec ProtocolConfig::codec() const {
    AnnotationCodec c;
    c.task = annotation_task;
    c.space = space;
    return c;
}

int ProtocolConfig::train_t(RandomSource& rng, const StepSubsequence& sub) const {
    if (T_prime == 1) return fixed_t > 0 ? fixed_t : schedule_T;
    return sub.steps[rng.next_below(static_cast<uint64_t>(sub.T_prime))];
}

nlohmann::json protocol_to_json(const ProtocolConfig& cfg) {
    return nlohmann::json{{"name", cfg.name},
                          {"parameterization", to_string(cfg.param)},
                          {"T_prime", cfg.T_prime},
                          {"preserver", cfg.preserver},
                          {"variant", to_string(cfg.variant)},
                          {"annotation_task", cfg.annotation_task},
                          {"space", cfg.space},
                          {"mixture_probs", cfg.mixture_probs},
                          {"per_sample_mixture", cfg.per_sample_mixture},
                          {"steps", cfg.steps},
                          {"batch_size", cfg.batch_size},
                          {"lr", cfg.lr},
                          {"seed", cfg.seed},
                          {"init", cfg.init == InitMode::Fresh ? "fresh" : "duplicated_input"},
                          {"fixed_t", cfg.fixed_t},
                          {"image_channels", cfg.image_channels},
                          {"schedule", {{"T", cfg.schedule_T},
                                        {"beta_start", cfg.beta_start},
                                        {"beta_end", cfg.beta_end},
                                        {"kind", to_string(cfg.schedule_kind)}}},
                          {"clamp_zhat", cfg.clamp_zhat},
                          {"val_every", cfg.val_every}};
}

ProtocolConfig protocol_from_json(const nlohmann::json& j) {
    ProtocolConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.param = parameterization_from_string(j.at("parameterization").get<std::string>());
    cfg.T_prime = j.at("T_prime").get<int>();
    cfg.preserver = j.at("preserver").get<bool>();
    cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    cfg.annotation_task = j.at("annotation_task").get<std::string>();
    cfg.space = j.at("space").get<std::string>();
    cfg.mixture_probs = j.at("mixture_probs").get<std::vector<double>>();
    cfg.per_sample_mixture = j.at("per_sample_mixture").get<bool>();
    cfg.steps = j.at("steps").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.lr = j.at("lr").get<double>();
    cfg.seed = j.at("seed").get<uint64_t>();
    const std::string init = j.at("init").get<std::string>();
    if (init != "fresh" && init != "duplicated_input")
        throw std::invalid_argument("protocol_from_json: unknown init " + init);
    cfg.init = init == "fresh" ? InitMode::Fresh : InitMode::DuplicatedInput;
    cfg.fixed_t = j.at("fixed_t").get<int>();
    cfg.image_channels = j.at("image_channels").get<int>();
    const auto& s = j.at("schedule");
    cfg.schedule_T = s.at("T").get<int>();
    cfg.beta_start = s.at("beta_start").get<double>();
    cfg.beta_end = s.at("beta_end").get<double>();
    cfg.schedule_kind = schedule_kind_from_string(s.at("kind").get<std::string>());
    cfg.clamp_zhat = j.at("clamp_zhat").get<bool>();
    cfg.val_every = j.at("val_every").get<int>();
    return cfg;
}

const std::vector<std::string>& canonical_protocol_names() {
    static const std::vector<std::string> names = {
        "direct_adaptation", "plus_x0", "plus_single_step", "plus_preserver",
        "plus_mixture",      "lotus_g", "lotus_d"};
    return names;
}

ProtocolConfig protocol_preset(const std::string& name) {
    ProtocolConfig cfg;
    cfg.name = name;
    if (name == "direct_adaptation") {
        cfg.param = Parameterization::Epsilon;
        cfg.T_prime = kDefaultT;
        cfg.init = InitMode::DuplicatedInput;
    } else if (name == "plus_x0") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = kDefaultT;
    } else if (name == "plus_single_step") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = 1;
    } else if (name == "plus_preserver") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = 1;
        cfg.preserver = true;
    } else if (name == "plus_mixture") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = 1;
        cfg.preserver = true;
        cfg.mixture_probs = {0.9, 0.1};
    } else if (name == "lotus_g") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = 1;
        cfg.preserver = true;
        cfg.mixture_probs = {0.9, 0.1};
        cfg.space = "disparity";
    } else if (name == "lotus_d") {
        cfg.param = Parameterization::X0;
        cfg.T_prime = 1;
        cfg.preserver = true;
        cfg.mixture_probs = {0.9, 0.1};
        cfg.space = "disparity";
        cfg.variant = Variant::Discriminative;
    } else {
        throw std::invalid_argument("protocol_preset: unknown preset " + name);
    }
    return cfg;
}

LossNodes standard_loss(const DenoiserNet& net, Tape& tape, std::map<std::string, int>& param_ids,
                        Parameterization p, const Grid& z_x, const Grid& z_y, int t,
                        const NoiseSchedule& sched, RandomSource& rng) {
    LossNodes nodes;
    if (net.cfg.variant == Variant::Generative) {
        Grid eps = gaussian_grid(rng, z_y.height(), z_y.width(), z_y.channels());
        const double abar = sched.alpha_bar(t);
        Grid z_t = forward_noise(z_y, eps, abar);
        Grid target = target_for(p, z_y, eps, abar);
        int out = net.build_forward(tape, param_ids, &z_t, z_x, t, TaskSwitch::PredictAnnotation);
        nodes.anno = mse_node(tape, out, target);
    } else {
        if (p != Parameterization::X0)
            throw std::invalid_argument("standard_loss: discriminative nets require x0");
        int out = net.build_forward(tape, param_ids, nullptr, z_x, t, TaskSwitch::PredictAnnotation);
        nodes.anno = mse_node(tape, out, z_y);
    }
    nodes.loss = nodes.anno;
    return nodes;
}

LossNodes preserver_loss(const DenoiserNet& net, Tape& tape, std::map<std::string, int>& param_ids,
                         Parameterization p, const Grid& z_x, const Grid& z_y, int t,
                         const NoiseSchedule& sched, RandomSource& rng) {
    LossNodes nodes;
    const Grid recon_target = replicate_channels(z_x, net.cfg.anno_channels);
    if (net.cfg.variant == Variant::Generative) {
        Grid eps = gaussian_grid(rng, z_y.height(), z_y.width(), z_y.channels());
        const double abar = sched.alpha_bar(t);
        Grid z_t = forward_noise(z_y, eps, abar);
        Grid target = target_for(p, z_y, eps, abar);
        int out_x = net.build_forward(tape, param_ids, &z_t, z_x, t, TaskSwitch::ReconstructImage);
        nodes.recon = mse_node(tape, out_x, recon_target);
        int out_y = net.build_forward(tape, param_ids, &z_t, z_x, t, TaskSwitch::PredictAnnotation);
        nodes.anno = mse_node(tape, out_y, target);
    } else {
        if (p != Parameterization::X0)
            throw std::invalid_argument("preserver_loss: discriminative nets require x0");
        int out_x = net.build_forward(tape, param_ids, nullptr, z_x, t, TaskSwitch::ReconstructImage);
        nodes.recon = mse_node(tape, out_x, recon_target);
        int out_y = net.build_forward(tape, param_ids, nullptr, z_x, t, TaskSwitch::PredictAnnotation);
        nodes.anno = mse_node(tape, out_y, z_y);
    }
    nodes.loss = tape.add(nodes.recon, nodes.anno);
    return nodes;
}

std::vector<Sample> held_out_slice(const std::vector<SamplePool>& pools) {
    std::vector<Sample> out;
    for (const auto& pool : pools) {
        const int limit = train_limit(pool);
        for (int i = limit; i < static_cast<int>(pool.samples.size()); ++i)
            out.push_back(pool.samples[i]);
    }
    return out;
}

int train_limit(const SamplePool& pool) {
    const int n = static_cast<int>(pool.samples.size());
    int held = std::min(16, std::max(4, n / 8));
    if (held >= n) held = std::max(0, n - 1);
    return n - held;
}

Grid infer_model_space(const DenoiserNet& net, const ProtocolConfig& cfg,
                       const NoiseSchedule& sched, const Grid& image_enc, RandomSource* rng) {
    const DenoiseFn fn = net.as_denoise_fn();
    const SampleOptions opts = cfg.sample_options();
    if (cfg.T_prime == 1 || cfg.variant == Variant::Discriminative) {
        const int t = cfg.fixed_t > 0 ? cfg.fixed_t : sched.T;
        return single_step_infer(fn, image_enc, net.cfg.anno_channels, sched, rng, cfg.variant,
                                 cfg.param, t, opts);
    }
    if (rng == nullptr) throw std::invalid_argument("infer_model_space: multi-step needs an rng");
    const StepSubsequence sub = inference_subsequence(sched.T, cfg.T_prime);
    return sample(fn, image_enc, net.cfg.anno_channels, sched, sub, cfg.param, *rng, false, opts)
        .output;
}

namespace {

double validate(const DenoiserNet& net, const ProtocolConfig& cfg, const NoiseSchedule& sched,
                const AnnotationCodec& codec, const std::vector<Sample>& val,
                const RandomSource& root) {
    if (val.empty()) return -1.0;
    std::vector<double> scores(val.size(), 0.0);
    parallel_for(static_cast<int>(val.size()), cfg.threads, [&](int i) {
        RandomSource rng = root.substream(kValStream).substream(static_cast<uint64_t>(i));
        const Grid pred = infer_model_space(net, cfg, sched, encode_image(val[i].image), &rng);
        if (codec.task == "normals") {
            scores[i] = normal_metrics(codec.decode_normals(pred), val[i].normals, val[i].mask).mean_deg;
        } else {
            scores[i] = eval_depth_prediction(pred, val[i], codec).absrel;
        }
    });
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / double(scores.size());
}

}  // namespace

TrainResult train_protocol(const ProtocolConfig& cfg, const std::vector<SamplePool>& pools) {
    if (pools.empty()) throw std::invalid_argument("train_protocol: no sample pools");
    if (cfg.mixture_probs.size() != pools.size())
        throw std::invalid_argument("train_protocol: mixture_probs must match the pool count");
    if (cfg.variant == Variant::Discriminative && cfg.T_prime != 1)
        throw std::invalid_argument("train_protocol: discriminative training is single-step");
    if (!cfg.is_canonical())
        std::cerr << "[train] note: configuration '" << cfg.name << "' is non-canonical\n";

    const NoiseSchedule sched = cfg.schedule();
    const AnnotationCodec codec = cfg.codec();
    const StepSubsequence sub = subsequence(cfg.schedule_T, cfg.T_prime);
    const RandomSource root(cfg.seed, 0);

    DenoiserConfig net_cfg;
    net_cfg.image_channels = cfg.image_channels;
    net_cfg.anno_channels = codec.channels();
    net_cfg.variant = cfg.variant;
    net_cfg.t_max = cfg.schedule_T;
    RandomSource init_rng = root.substream(kInitStream);
    DenoiserNet net = init_denoiser(net_cfg, init_rng, cfg.init);
    AdamState opt = make_adam_state(net.params);

    // encoded training views; the trailing slice of each pool is held out
    struct Encoded {
        Grid z_x, z_y;
    };
    std::vector<std::vector<Encoded>> enc(pools.size());
    std::vector<int> limits(pools.size());
    for (size_t pi = 0; pi < pools.size(); ++pi) {
        limits[pi] = train_limit(pools[pi]);
        enc[pi].reserve(limits[pi]);
        for (int i = 0; i < limits[pi]; ++i) {
            const Sample& s = pools[pi].samples[i];
            if (s.image.channels() != cfg.image_channels)
                throw std::invalid_argument("train_protocol: dataset image channels mismatch");
            enc[pi].push_back({encode_image(s.image), codec.encode(s)});
        }
    }
    const std::vector<Sample> val = held_out_slice(pools);

    RandomSource mix_rng = root.substream(kMixtureStream);
    TrainResult result;
    result.cfg = cfg;
    result.log.reserve(cfg.steps);

    const int B = cfg.batch_size;

    for (int step = 0; step < cfg.steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();

        // all batch-level draws happen up front, in a fixed order
        std::vector<std::pair<int, int>> picks =
            mixture_batch_indices(pools, cfg.mixture_probs, mix_rng, B, cfg.per_sample_mixture,
                                  limits);
        std::vector<int> ts(B);
        for (int i = 0; i < B; ++i) ts[i] = cfg.train_t(mix_rng, sub);

        std::vector<ParamMap> elem_grads(B);
        std::vector<double> elem_loss(B), elem_recon(B), elem_anno(B);
        parallel_for(B, cfg.threads, [&](int i) {
            const auto [pool, idx] = picks[i];
            const Encoded& e = enc[pool][idx];
            RandomSource noise_rng = root.substream(
                kNoiseStreamBase + static_cast<uint64_t>(step) * static_cast<uint64_t>(B) +
                static_cast<uint64_t>(i));
            Tape tape;
            std::map<std::string, int> ids;
            const LossNodes nodes =
                cfg.preserver
                    ? preserver_loss(net, tape, ids, cfg.param, e.z_x, e.z_y, ts[i], sched, noise_rng)
                    : standard_loss(net, tape, ids, cfg.param, e.z_x, e.z_y, ts[i], sched, noise_rng);
            elem_loss[i] = tape.value(nodes.loss)[0];
            elem_recon[i] = nodes.recon >= 0 ? tape.value(nodes.recon)[0] : 0.0;
            elem_anno[i] = nodes.anno >= 0 ? tape.value(nodes.anno)[0] : 0.0;
            std::vector<Grid> grads = tape.backward(nodes.loss);
            ParamMap pg;
            for (const auto& [name, node] : ids) pg.emplace(name, std::move(grads[node]));
            elem_grads[i] = std::move(pg);
        });

        // fixed-order reduction keeps results identical for any thread count
        ParamMap grad_mean;
        for (const auto& [name, p] : net.params)
            grad_mean.emplace(name, Grid(p.height(), p.width(), p.channels()));
        for (int i = 0; i < B; ++i)
            for (auto& [name, g] : grad_mean) {
                const Grid& eg = elem_grads[i].at(name);
                for (size_t k = 0; k < g.size(); ++k) g[k] += eg[k] / double(B);
            }

        double loss = 0.0, recon = 0.0, anno = 0.0;
        for (int i = 0; i < B; ++i) {
            loss += elem_loss[i] / double(B);
            recon += elem_recon[i] / double(B);
            anno += elem_anno[i] / double(B);
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("train_protocol: training diverged (NaN loss) at step " +
                                     std::to_string(step));

        adam_step(net.params, grad_mean, opt, cfg.lr);

        TrainLogRow row;
        row.step = step;
        row.loss = loss;
        row.recon_loss = recon;
        row.anno_loss = anno;
        if (cfg.val_every > 0 && ((step + 1) % cfg.val_every == 0 || step + 1 == cfg.steps))
            row.val_absrel = validate(net, cfg, sched, codec, val, root);
        row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(row);
    }

    result.net = std::move(net);
    result.opt = std::move(opt);
    return result;
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_train_log_csv: cannot open " + path.string());
    out << "step,loss,recon_loss,anno_loss,val_absrel,seconds\n";
    for (const auto& r : log) {
        out << r.step << "," << r.loss << "," << r.recon_loss << "," << r.anno_loss << ",";
        if (r.val_absrel >= 0.0) out << r.val_absrel;
        out << "," << r.seconds << "\n";
    }
}

Checkpoint make_checkpoint(const TrainResult& result) {
    Checkpoint ckpt;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["protocol"] = protocol_to_json(result.cfg);
    j["net"] = {{"image_channels", result.net.cfg.image_channels},
                {"anno_channels", result.net.cfg.anno_channels},
                {"variant", to_string(result.net.cfg.variant)},
                {"base_width", result.net.cfg.base_width},
                {"mid_width", result.net.cfg.mid_width},
                {"bottleneck_width", result.net.cfg.bottleneck_width},
                {"embed_dim", result.net.cfg.embed_dim},
                {"t_max", result.net.cfg.t_max}};
    j["param_count"] = result.net.param_count();
    ckpt.config_json = j.dump();
    ckpt.params = result.net.params;
    ckpt.opt = result.opt;
    return ckpt;
}

void restore_from_checkpoint(const Checkpoint& ckpt, DenoiserNet& net, ProtocolConfig& cfg) {
    const nlohmann::json j = nlohmann::json::parse(ckpt.config_json);
    cfg = protocol_from_json(j.at("protocol"));
    const auto& n = j.at("net");
    net.cfg.image_channels = n.at("image_channels").get<int>();
    net.cfg.anno_channels = n.at("anno_channels").get<int>();
    net.cfg.variant = variant_from_string(n.at("variant").get<std::string>());
    net.cfg.base_width = n.at("base_width").get<int>();
    net.cfg.mid_width = n.at("mid_width").get<int>();
    net.cfg.bottleneck_width = n.at("bottleneck_width").get<int>();
    net.cfg.embed_dim = n.at("embed_dim").get<int>();
    net.cfg.t_max = n.at("t_max").get<int>();
    net.params = ckpt.params;
}

}  // namespace lotuslab
