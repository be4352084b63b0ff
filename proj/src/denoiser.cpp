#include "lotuslab/denoiser.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lotuslab {

Grid sinusoidal_encoding(double pos, int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("sinusoidal_encoding: dim must be even and >= 2");
    Grid enc(1, dim, 1);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -double(i) / double(half));
        enc.at(0, 2 * i, 0) = std::sin(pos * freq);
        enc.at(0, 2 * i + 1, 0) = std::cos(pos * freq);
    }
    return enc;
}

Grid switch_embedding(TaskSwitch s, int embed_dim) {
    return sinusoidal_encoding(static_cast<double>(static_cast<int>(s)), embed_dim);
}

namespace {

// Weight shapes per stage, derived from the config.
std::vector<std::pair<std::string, std::array<int, 3>>> shape_table(const DenoiserConfig& cfg) {
    const int cin = cfg.input_channels();
    const int b = cfg.base_width, m = cfg.mid_width, bt = cfg.bottleneck_width;
    const int e = cfg.embed_dim, co = cfg.anno_channels;
    return {
        {"stem.w", {9, cin, b}},   {"stem.b", {1, b, 1}},
        {"down1.w", {9, b, b}},    {"down1.b", {1, b, 1}},
        {"down2.w", {9, b, m}},    {"down2.b", {1, m, 1}},
        {"mid1.w", {9, m, bt}},    {"mid1.b", {1, bt, 1}},
        {"mid2.w", {9, bt, m}},    {"mid2.b", {1, m, 1}},
        {"up1.w", {9, m, b}},      {"up1.b", {1, b, 1}},
        {"up2.w", {9, b, b}},      {"up2.b", {1, b, 1}},
        {"head.w", {9, b, co}},    {"head.b", {1, co, 1}},
        {"temb.w1", {e, e, 1}},    {"temb.b1", {1, e, 1}},
        {"temb.w2", {e, e, 1}},    {"temb.b2", {1, e, 1}},
        {"cond.stem.w", {e, b, 1}},  {"cond.down1.w", {e, b, 1}},
        {"cond.down2.w", {e, m, 1}}, {"cond.mid1.w", {e, bt, 1}},
        {"cond.up1.w", {e, b, 1}},   {"cond.up2.w", {e, b, 1}},
    };
}

int fan_in(const std::string& name, const std::array<int, 3>& shape) {
    if (name.find(".b") != std::string::npos) return 0;  // biases start at zero
    if (name.rfind("cond.", 0) == 0 || name.rfind("temb.w", 0) == 0) return shape[0];
    return shape[0] * shape[1];  // conv: k*k * ci
}

}  // namespace

long DenoiserNet::param_count() const {
    long n = 0;
    for (const auto& [name, g] : params) n += static_cast<long>(g.size());
    return n;
}

DenoiserNet init_denoiser(const DenoiserConfig& cfg, RandomSource& rng, InitMode mode) {
    if (cfg.base_width < 1 || cfg.mid_width < 1 || cfg.bottleneck_width < 1)
        throw std::invalid_argument("init_denoiser: channel widths must be >= 1");
    DenoiserNet net;
    net.cfg = cfg;
    for (const auto& [name, shape] : shape_table(cfg)) {
        Grid g(shape[0], shape[1], shape[2]);
        const int fin = fan_in(name, shape);
        if (fin > 0) {
            const double std = std::sqrt(2.0 / fin);
            for (size_t i = 0; i < g.size(); ++i) g[i] = std * rng.next_normal();
        }
        net.params.emplace(name, std::move(g));
    }
    if (mode == InitMode::DuplicatedInput) {
        if (cfg.variant != Variant::Generative)
            throw std::invalid_argument("init_denoiser: duplicated_input needs the generative wiring");
        // Annotation-channel kernels copy the image-channel ones, then the
        // whole input layer is halved.
        Grid& stem = net.params.at("stem.w");
        const int anno = cfg.anno_channels, img = cfg.image_channels;
        for (int kk = 0; kk < stem.height(); ++kk)
            for (int j = 0; j < anno; ++j)
                for (int o = 0; o < stem.channels(); ++o)
                    stem.at(kk, j, o) = stem.at(kk, anno + (j % img), o);
        for (size_t i = 0; i < stem.size(); ++i) stem[i] *= 0.5;
    }
    return net;
}

Grid DenoiserNet::time_embedding(int t) const {
    if (t < 1 || t > cfg.t_max) throw std::out_of_range("time_embedding: t out of range");
    Tape tape;
    std::map<std::string, int> ids;
    auto p = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        int id = tape.leaf(params.at(name));
        ids.emplace(name, id);
        return id;
    };
    int enc = tape.leaf(sinusoidal_encoding(static_cast<double>(t), cfg.embed_dim));
    int h = tape.act(tape.add(tape.matmul(enc, p("temb.w1")), p("temb.b1")), ActKind::Silu);
    int out = tape.add(tape.matmul(h, p("temb.w2")), p("temb.b2"));
    return tape.value(out);
}

int DenoiserNet::build_forward(Tape& tape, std::map<std::string, int>& param_ids,
                               const Grid* noisy, const Grid& image, int t, TaskSwitch s) const {
    if (t < 1 || t > cfg.t_max) throw std::out_of_range("denoiser forward: t out of range");
    if (image.channels() != cfg.image_channels)
        throw std::invalid_argument("denoiser forward: image channel mismatch");
    if (image.height() % 4 != 0 || image.width() % 4 != 0)
        throw std::invalid_argument("denoiser forward: dims must be divisible by 4");
    Grid input;
    if (cfg.variant == Variant::Generative) {
        if (noisy == nullptr)
            throw std::invalid_argument("denoiser forward: generative net requires a noisy annotation");
        if (noisy->channels() != cfg.anno_channels)
            throw std::invalid_argument("denoiser forward: annotation channel mismatch");
        input = concat_channels(*noisy, image);
    } else {
        if (noisy != nullptr)
            throw std::invalid_argument("denoiser forward: discriminative net takes no noisy input");
        input = image;
    }

    auto p = [&](const std::string& name) {
        auto it = param_ids.find(name);
        if (it != param_ids.end()) return it->second;
        int id = tape.leaf(params.at(name));
        param_ids.emplace(name, id);
        return id;
    };

    // conditioning vector: learned map of the time encoding plus the raw
    // switcher encoding
    int enc_t = tape.leaf(sinusoidal_encoding(static_cast<double>(t), cfg.embed_dim));
    int enc_s = tape.leaf(switch_embedding(s, cfg.embed_dim));
    int h = tape.act(tape.add(tape.matmul(enc_t, p("temb.w1")), p("temb.b1")), ActKind::Silu);
    int cond = tape.add(tape.add(tape.matmul(h, p("temb.w2")), p("temb.b2")), enc_s);

    const int H = input.height(), W = input.width();
    auto stage = [&](int x, const char* name, int stride, int h_out, int w_out, bool conditioned) {
        int y = tape.conv2d(x, p(std::string(name) + ".w"), stride, 1);
        y = tape.add(y, tape.broadcast_c(p(std::string(name) + ".b"), h_out, w_out));
        if (conditioned) {
            int bias = tape.matmul(cond, p(std::string("cond.") + name + ".w"));
            y = tape.add(y, tape.broadcast_c(bias, h_out, w_out));
        }
        return tape.act(y, ActKind::Silu);
    };

    int in_leaf = tape.leaf(std::move(input));
    int f0 = stage(in_leaf, "stem", 1, H, W);
    int f1 = stage(f0, "down1", 2, H / 2, W / 2);
    int f2 = stage(f1, "down2", 2, H / 4, W / 4);
    int m = stage(f2, "mid1", 1, H / 4, W / 4);
    {
        int y = tape.conv2d(m, p("mid2.w"), 1, 1);
        y = tape.add(y, tape.broadcast_c(p("mid2.b"), H / 4, W / 4));
        m = tape.act(y, ActKind::Silu);
    }
    m = tape.add(m, f2);

    int u1 = stage(tape.upsample2x(m), "up1", 1, H / 2, W / 2);
    u1 = tape.add(u1, f1);
    int u2 = stage(tape.upsample2x(u1), "up2", 1, H, W);
    u2 = tape.add(u2, f0);

    int out = tape.conv2d(u2, p("head.w"), 1, 1);
    out = tape.add(out, tape.broadcast_c(p("head.b"), H, W));
    return out;
}

Grid DenoiserNet::apply(const Grid* noisy, const Grid& image, int t, TaskSwitch s) const {
    Tape tape;
    std::map<std::string, int> ids;
    int out = build_forward(tape, ids, noisy, image, t, s);
    return tape.value(out);
}

DenoiseFn DenoiserNet::as_denoise_fn(TaskSwitch s) const {
    return [this, s](const Grid* noisy, const Grid& image, int t) {
        return denoise_apply(*this, noisy, image, t, s);
    };
}

Grid denoise_apply(const DenoiserNet& net, const Grid* noisy_annotation, const Grid& z_x, int t,
                   TaskSwitch s) {
    return net.apply(noisy_annotation, z_x, t, s);
}

}  // namespace lotuslab
