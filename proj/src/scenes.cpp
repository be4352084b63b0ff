#include "lotuslab/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "lotuslab/pfm.hpp"

namespace lotuslab {

Domain domain_from_string(const std::string& s) {
    if (s == "A_indoor_like") return Domain::AIndoorLike;
    if (s == "B_outdoor_like") return Domain::BOutdoorLike;
    throw std::invalid_argument("unknown domain: " + s);
}

std::string to_string(Domain d) {
    return d == Domain::AIndoorLike ? "A_indoor_like" : "B_outdoor_like";
}

DetailLevel detail_from_string(const std::string& s) {
    if (s == "plain") return DetailLevel::Plain;
    if (s == "detail_rich") return DetailLevel::DetailRich;
    throw std::invalid_argument("unknown detail level: " + s);
}

std::string to_string(DetailLevel d) {
    return d == DetailLevel::Plain ? "plain" : "detail_rich";
}

namespace scene_parts {

namespace {

void set_normal(Grid& normals, int y, int x, double nx, double ny, double nz) {
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    normals.at(y, x, 0) = nx / len;
    normals.at(y, x, 1) = ny / len;
    normals.at(y, x, 2) = nz / len;
}

}  // namespace

Surfaces flat_background(int h, int w, double z) {
    Surfaces s;
    s.depth = Grid(h, w, 1, z);
    s.normals = Grid(h, w, 3);
    s.object.assign(static_cast<size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) set_normal(s.normals, y, x, 0.0, 0.0, 1.0);
    return s;
}

void render_sphere(Surfaces& s, int id, double cx, double cy, double r, double z_front) {
    const int h = s.depth.height(), w = s.depth.width();
    const double zc = z_front + r;
    const int y0 = std::max(0, int(std::floor(cy - r))), y1 = std::min(h - 1, int(std::ceil(cy + r)));
    const int x0 = std::max(0, int(std::floor(cx - r))), x1 = std::min(w - 1, int(std::ceil(cx + r)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double d2 = dx * dx + dy * dy;
            if (d2 > r * r) continue;
            const double sz = std::sqrt(r * r - d2);
            const double z = zc - sz;
            if (z >= s.depth.at(y, x, 0)) continue;
            s.depth.at(y, x, 0) = z;
            set_normal(s.normals, y, x, dx / r, dy / r, sz / r);
            s.object[static_cast<size_t>(y) * w + x] = id;
        }
}

void render_box(Surfaces& s, int id, int x0, int y0, int x1, int y1, double z0) {
    const int h = s.depth.height(), w = s.depth.width();
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) {
            if (z0 >= s.depth.at(y, x, 0)) continue;
            s.depth.at(y, x, 0) = z0;
            set_normal(s.normals, y, x, 0.0, 0.0, 1.0);
            s.object[static_cast<size_t>(y) * w + x] = id;
        }
}

}  // namespace scene_parts

Sample gen_scene(Domain domain, DetailLevel detail, RandomSource rng, int h, int w,
                 int image_channels, int primitive_count_override) {
    if (h < 16 || w < 16) throw std::invalid_argument("gen_scene: dims must be >= 16");
    if (image_channels != 1 && image_channels != 3)
        throw std::invalid_argument("gen_scene: image must have 1 or 3 channels");

    RandomSource geom = rng.substream(1);
    RandomSource app = rng.substream(2);
    const bool outdoor = domain == Domain::BOutdoorLike;

    // background ramp plane, near at the bottom row
    scene_parts::Surfaces s;
    s.depth = Grid(h, w, 1);
    s.normals = Grid(h, w, 3);
    s.object.assign(static_cast<size_t>(h) * w, 0);
    const double z_bottom = outdoor ? geom.uniform_in(8.0, 15.0) : geom.uniform_in(3.0, 5.0);
    const double z_top = outdoor ? geom.uniform_in(55.0, 80.0) : geom.uniform_in(8.0, 10.0);
    const double dz_dy = (z_bottom - z_top) / double(h - 1);
    const double nlen = std::sqrt(dz_dy * dz_dy + 1.0);
    for (int y = 0; y < h; ++y) {
        const double z = z_top + (z_bottom - z_top) * double(y) / double(h - 1);
        for (int x = 0; x < w; ++x) {
            s.depth.at(y, x, 0) = z;
            s.normals.at(y, x, 0) = 0.0;
            s.normals.at(y, x, 1) = dz_dy / nlen;
            s.normals.at(y, x, 2) = 1.0 / nlen;
        }
    }

    // primitives, nearest depth wins
    int n_prims = outdoor ? 3 + int(geom.next_below(4)) : 5 + int(geom.next_below(6));
    if (primitive_count_override >= 0) n_prims = primitive_count_override;
    int next_id = 1;
    for (int i = 0; i < n_prims; ++i) {
        const bool sphere = geom.next_uniform() < 0.5;
        const double cx = geom.uniform_in(0.0, w - 1.0);
        const double cy = geom.uniform_in(0.0, h - 1.0);
        const double z_front =
            outdoor ? geom.uniform_in(2.0, 45.0) : geom.uniform_in(1.5, 7.0);
        if (sphere) {
            const double r = outdoor ? geom.uniform_in(4.0, 14.0) : geom.uniform_in(3.0, 8.0);
            scene_parts::render_sphere(s, next_id++, cx, cy, r, z_front);
        } else {
            const double hx = outdoor ? geom.uniform_in(3.0, 12.0) : geom.uniform_in(2.0, 7.0);
            const double hy = outdoor ? geom.uniform_in(3.0, 12.0) : geom.uniform_in(2.0, 7.0);
            scene_parts::render_box(s, next_id++, int(cx - hx), int(cy - hy), int(cx + hx), int(cy + hy),
                       z_front);
        }
    }
    if (outdoor) {
        // thin vertical bars, near the camera
        const int n_bars = 1 + int(geom.next_below(3));
        for (int i = 0; i < n_bars; ++i) {
            const int bx = int(geom.next_below(static_cast<uint64_t>(w)));
            const int bw = 1 + int(geom.next_below(2));
            const double z0 = geom.uniform_in(1.5, 6.0);
            scene_parts::render_box(s, next_id++, bx, 0, bx + bw - 1, h - 1, z0);
        }
    }

    // appearance: Lambertian shading under one random light
    const double lz = app.uniform_in(0.5, 0.9);
    const double phi = app.uniform_in(0.0, 2.0 * M_PI);
    const double lm = std::sqrt(1.0 - lz * lz);
    const double lx = lm * std::cos(phi), ly = lm * std::sin(phi);
    std::vector<std::array<double, 3>> albedo(next_id);
    for (int id = 0; id < next_id; ++id)
        for (int c = 0; c < 3; ++c) albedo[id][c] = app.uniform_in(0.25, 0.95);
    if (image_channels == 1)
        for (int id = 0; id < next_id; ++id) albedo[id][1] = albedo[id][2] = albedo[id][0];

    std::vector<int> tex_kind(next_id, 0);  // 0 none, 1 checker, 2 stripes
    std::vector<int> tex_period(next_id, 2);
    std::vector<double> tex_amp(next_id, 0.0);
    int n_image_bars = 0;
    std::vector<std::array<double, 3>> image_bars;  // x0, width, gain
    if (detail == DetailLevel::DetailRich) {
        for (int id = 0; id < next_id; ++id) {
            if (id != 0 && app.next_uniform() >= 0.7) continue;  // background always textured
            tex_kind[id] = 1 + int(app.next_below(2));
            tex_period[id] = 2 + int(app.next_below(3));
            tex_amp[id] = app.uniform_in(0.25, 0.5);
        }
        n_image_bars = 2 + int(app.next_below(4));
        for (int i = 0; i < n_image_bars; ++i)
            image_bars.push_back({app.uniform_in(0.0, w - 2.0), 1.0 + app.next_below(2),
                                  app.uniform_in(0.3, 1.7)});
    }

    Sample out;
    out.domain = domain;
    out.detail_level = detail;
    out.depth = clamp(s.depth, kDepthMin, kDepthMax);
    out.normals = std::move(s.normals);
    out.mask = Grid(h, w, 1, 1.0);
    out.disparity = to_disparity(out.depth, kDepthMin, kDepthMax);
    out.image = Grid(h, w, image_channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int id = s.object[static_cast<size_t>(y) * w + x];
            const double ndotl = out.normals.at(y, x, 0) * lx + out.normals.at(y, x, 1) * ly +
                                 out.normals.at(y, x, 2) * lz;
            const double shade = 0.2 + 0.8 * std::max(0.0, ndotl);
            double tex = 1.0;
            if (tex_kind[id] == 1) {
                const int cell = (x / tex_period[id] + y / tex_period[id]) % 2;
                tex = cell ? 1.0 + tex_amp[id] : 1.0 - tex_amp[id];
            } else if (tex_kind[id] == 2) {
                const int cell = (x / tex_period[id]) % 2;
                tex = cell ? 1.0 + tex_amp[id] : 1.0 - tex_amp[id];
            }
            double bar_gain = 1.0;
            for (const auto& b : image_bars)
                if (x >= int(b[0]) && x < int(b[0] + b[1])) bar_gain = b[2];
            for (int c = 0; c < image_channels; ++c)
                out.image.at(y, x, c) =
                    std::clamp(albedo[id][c] * tex * shade * bar_gain, 0.0, 1.0);
        }
    return out;
}

Sample generate_sample(const DatasetSpec& spec, int index) {
    RandomSource rng(spec.seed, 0x5CE0 + static_cast<uint64_t>(index));
    double u = rng.next_uniform();
    Domain domain = Domain::AIndoorLike;
    double acc = 0.0;
    for (size_t d = 0; d < spec.domain_probs.size(); ++d) {
        acc += spec.domain_probs[d];
        if (u < acc) {
            domain = d == 0 ? Domain::AIndoorLike : Domain::BOutdoorLike;
            break;
        }
        if (d + 1 == spec.domain_probs.size()) domain = Domain::BOutdoorLike;
    }
    const DetailLevel detail =
        rng.next_uniform() < spec.detail_rich_fraction ? DetailLevel::DetailRich : DetailLevel::Plain;
    return gen_scene(domain, detail, rng.substream(9), spec.height, spec.width,
                     spec.image_channels);
}

Grid to_disparity(const Grid& depth, double d_min, double d_max) {
    if (depth.channels() != 1) throw std::invalid_argument("to_disparity: single-channel depth");
    if (!(d_min > 0.0 && d_max > d_min)) throw std::invalid_argument("to_disparity: bad range");
    Grid out = depth;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i] <= 0.0) throw std::invalid_argument("to_disparity: nonpositive depth");
        out[i] = 1.0 / std::clamp(out[i], d_min, d_max);
    }
    return out;
}

Grid normalize_annotation(const Grid& g, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("normalize_annotation: degenerate range");
    Grid out = g;
    const double s = 2.0 / (hi - lo);
    for (size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - lo) * s - 1.0;
    return out;
}

Grid denormalize_annotation(const Grid& g, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("denormalize_annotation: degenerate range");
    Grid out = g;
    const double s = (hi - lo) / 2.0;
    for (size_t i = 0; i < out.size(); ++i) out[i] = (out[i] + 1.0) * s + lo;
    return out;
}

SamplePool generate_pool(const DatasetSpec& spec) {
    SamplePool pool;
    pool.spec = spec;
    pool.samples.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) pool.samples.push_back(generate_sample(spec, i));
    return pool;
}

std::vector<std::pair<int, int>> mixture_batch_indices(const std::vector<SamplePool>& pools,
                                                       const std::vector<double>& probs,
                                                       RandomSource& rng, int n, bool per_sample,
                                                       const std::vector<int>& pool_limits) {
    if (pools.empty()) throw std::invalid_argument("mixture_batch: no pools");
    if (probs.size() != pools.size())
        throw std::invalid_argument("mixture_batch: probs/pools size mismatch");
    if (!pool_limits.empty() && pool_limits.size() != pools.size())
        throw std::invalid_argument("mixture_batch: pool_limits size mismatch");
    double sum = 0.0;
    for (double p : probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mixture_batch: probs must sum to 1");

    auto pick_pool = [&]() {
        const double u = rng.next_uniform();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    };
    auto pool_size = [&](int pi) {
        int sz = static_cast<int>(pools[pi].samples.size());
        if (!pool_limits.empty() && pool_limits[pi] > 0) sz = std::min(sz, pool_limits[pi]);
        if (sz < 1) throw std::invalid_argument("mixture_batch: empty pool selected");
        return sz;
    };

    std::vector<std::pair<int, int>> out;
    out.reserve(n);
    int pool = per_sample ? 0 : pick_pool();
    for (int i = 0; i < n; ++i) {
        if (per_sample) pool = pick_pool();
        out.emplace_back(pool, static_cast<int>(rng.next_below(pool_size(pool))));
    }
    return out;
}

std::vector<Sample> mixture_batch(const std::vector<SamplePool>& pools,
                                  const std::vector<double>& probs, RandomSource& rng, int n,
                                  bool per_sample) {
    std::vector<Sample> out;
    out.reserve(n);
    for (auto [pool, idx] : mixture_batch_indices(pools, probs, rng, n, per_sample))
        out.push_back(pools[pool].samples[idx]);
    return out;
}

namespace {

nlohmann::json spec_to_json(const DatasetSpec& spec) {
    return nlohmann::json{{"domain_probs", spec.domain_probs},
                          {"count", spec.count},
                          {"height", spec.height},
                          {"width", spec.width},
                          {"image_channels", spec.image_channels},
                          {"detail_rich_fraction", spec.detail_rich_fraction},
                          {"seed", spec.seed}};
}

DatasetSpec spec_from_json(const nlohmann::json& j) {
    DatasetSpec spec;
    spec.domain_probs = j.at("domain_probs").get<std::vector<double>>();
    spec.count = j.at("count").get<int>();
    spec.height = j.at("height").get<int>();
    spec.width = j.at("width").get<int>();
    spec.image_channels = j.at("image_channels").get<int>();
    spec.detail_rich_fraction = j.at("detail_rich_fraction").get<double>();
    spec.seed = j.at("seed").get<uint64_t>();
    return spec;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["spec"] = spec_to_json(spec);
    auto entries = nlohmann::json::array();
    for (int i = 0; i < spec.count; ++i) {
        Sample s = generate_sample(spec, i);
        const std::string base = "sample_" + std::to_string(i);
        write_pfm(dir / (base + "_image.pfm"), s.image);
        write_pfm(dir / (base + "_depth.pfm"), s.depth);
        write_pfm(dir / (base + "_disparity.pfm"), s.disparity);
        write_pfm(dir / (base + "_normals.pfm"), s.normals);
        write_pfm(dir / (base + "_mask.pfm"), s.mask);
        entries.push_back({{"id", i},
                           {"domain", to_string(s.domain)},
                           {"detail_level", to_string(s.detail_level)},
                           {"image", base + "_image.pfm"},
                           {"depth", base + "_depth.pfm"},
                           {"disparity", base + "_disparity.pfm"},
                           {"normals", base + "_normals.pfm"},
                           {"mask", base + "_mask.pfm"}});
    }
    manifest["samples"] = std::move(entries);
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("write_dataset: cannot open manifest");
    out << manifest.dump(2) << "\n";
}

SamplePool load_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("load_dataset: missing manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(in);
    SamplePool pool;
    pool.spec = spec_from_json(manifest.at("spec"));
    for (const auto& e : manifest.at("samples")) {
        Sample s;
        s.domain = domain_from_string(e.at("domain").get<std::string>());
        s.detail_level = detail_from_string(e.at("detail_level").get<std::string>());
        s.image = read_pfm(dir / e.at("image").get<std::string>());
        s.depth = read_pfm(dir / e.at("depth").get<std::string>());
        s.disparity = read_pfm(dir / e.at("disparity").get<std::string>());
        s.normals = read_pfm(dir / e.at("normals").get<std::string>());
        s.mask = read_pfm(dir / e.at("mask").get<std::string>());
        pool.samples.push_back(std::move(s));
    }
    return pool;
}

}  // namespace lotuslab
