#include "lotuslab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lotuslab/parallel.hpp"

namespace lotuslab {

void EvalReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EvalReport::write_csv: cannot open " + path.string());
    out << "metric,value,n\n";
    out << "absrel," << absrel << "," << n_pixels << "\n";
    out << "absrel_depth_aligned," << absrel_depth_aligned << "," << n_pixels << "\n";
    out << "delta1," << delta1 << "," << n_pixels << "\n";
    out << "delta2," << delta2 << "," << n_pixels << "\n";
    out << "mean_angular_deg," << mean_angular_deg << "," << n_pixels << "\n";
    out << "pct_below_11_25," << pct_below_11_25 << "," << n_pixels << "\n";
    out << "pct_below_30," << pct_below_30 << "," << n_pixels << "\n";
    out << "excluded_pixels," << excluded_pixels << "," << n_pixels << "\n";
}

void EvalReport::write_json(const std::filesystem::path& path) const {
    nlohmann::json j{{"absrel", absrel},
                     {"absrel_depth_aligned", absrel_depth_aligned},
                     {"delta1", delta1},
                     {"delta2", delta2},
                     {"mean_angular_deg", mean_angular_deg},
                     {"pct_below_11_25", pct_below_11_25},
                     {"pct_below_30", pct_below_30},
                     {"n_pixels", n_pixels},
                     {"excluded_pixels", excluded_pixels},
                     {"per_image", per_image}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EvalReport::write_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

EvalReport evaluate_model(const DenoiserNet& net, const ProtocolConfig& cfg,
                          const std::vector<Sample>& scenes, uint64_t eval_seed, int threads) {
    if (scenes.empty()) throw std::invalid_argument("evaluate_model: no scenes");
    const NoiseSchedule sched = cfg.schedule();
    const AnnotationCodec codec = cfg.codec();
    const bool depth_task = codec.task == "depth_disparity";

    struct Row {
        DepthEval d;
        NormalMetrics n;
        long pixels = 0;
    };
    std::vector<Row> rows(scenes.size());
    parallel_for(static_cast<int>(scenes.size()), threads, [&](int i) {
        RandomSource rng(eval_seed, 0xE7A1 + static_cast<uint64_t>(i));
        const Grid pred = infer_model_space(net, cfg, sched, encode_image(scenes[i].image), &rng);
        if (depth_task) {
            rows[i].d = eval_depth_prediction(pred, scenes[i], codec);
            rows[i].pixels = rows[i].d.n_pixels;
        } else {
            rows[i].n = normal_metrics(codec.decode_normals(pred), scenes[i].normals, scenes[i].mask);
            long n = 0;
            for (size_t k = 0; k < scenes[i].mask.size(); ++k)
                if (scenes[i].mask[k] != 0.0) ++n;
            rows[i].pixels = n;
        }
    });

    EvalReport report;
    for (const auto& r : rows) {
        report.n_pixels += r.pixels;
        if (depth_task) {
            report.absrel += r.d.absrel;
            report.absrel_depth_aligned += r.d.absrel_depth_aligned;
            report.delta1 += r.d.delta1;
            report.delta2 += r.d.delta2;
            report.per_image.push_back(r.d.absrel);
        } else {
            report.mean_angular_deg += r.n.mean_deg;
            report.pct_below_11_25 += r.n.pct_below_11_25;
            report.pct_below_30 += r.n.pct_below_30;
            report.excluded_pixels += r.n.excluded;
            report.per_image.push_back(r.n.mean_deg);
        }
    }
    const double inv = 1.0 / double(scenes.size());
    report.absrel *= inv;
    report.absrel_depth_aligned *= inv;
    report.delta1 *= inv;
    report.delta2 *= inv;
    report.mean_angular_deg *= inv;
    report.pct_below_11_25 *= inv;
    report.pct_below_30 *= inv;
    return report;
}

std::vector<TrajectoryRow> trajectory_metrics(const DenoiseFn& net, const NoiseSchedule& sched,
                                              const StepSubsequence& subseq, Parameterization p,
                                              const std::vector<Sample>& scenes,
                                              const AnnotationCodec& codec,
                                              const std::vector<uint64_t>& seeds,
                                              const SampleOptions& opts, int threads) {
    if (seeds.size() < 2) throw std::invalid_argument("trajectory_metrics: need >= 2 seeds");
    if (scenes.empty()) throw std::invalid_argument("trajectory_metrics: no scenes");
    const int S = static_cast<int>(seeds.size());
    const int I = static_cast<int>(scenes.size());
    const int K = subseq.T_prime;

    // absrel[seed][scene][step]
    std::vector<std::vector<std::vector<double>>> acc(
        S, std::vector<std::vector<double>>(I, std::vector<double>(K, 0.0)));
    parallel_for(S * I, threads, [&](int job) {
        const int si = job / I, ii = job % I;
        RandomSource rng = RandomSource(seeds[si], 0).substream(0xAB00 + static_cast<uint64_t>(ii));
        const Sample& scene = scenes[ii];
        SampleResult run = sample(net, encode_image(scene.image), codec.channels(), sched, subseq,
                                  p, rng, true, opts);
        const TrajectoryRecord& tr = *run.trajectory;
        for (int k = 0; k < K; ++k)
            acc[si][ii][k] = eval_depth_prediction(tr.zhat[k], scene, codec).absrel;
    });

    std::vector<TrajectoryRow> rows(K);
    for (int k = 0; k < K; ++k) {
        // taus descend along the recorded run
        rows[k].tau = subseq.steps[K - 1 - k];
        std::vector<double> per_seed(S, 0.0);
        for (int si = 0; si < S; ++si) {
            for (int ii = 0; ii < I; ++ii) per_seed[si] += acc[si][ii][k];
            per_seed[si] /= double(I);
        }
        double mean = 0.0;
        for (double v : per_seed) mean += v;
        mean /= double(S);
        double var = 0.0;
        for (double v : per_seed) var += (v - mean) * (v - mean);
        var /= double(S - 1);
        rows[k].mean_absrel = mean;
        rows[k].std_absrel = std::sqrt(var);
    }
    return rows;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows, const std::string& param_label) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path.string());
    out << "tau,mean_absrel,std_absrel,param\n";
    for (const auto& r : rows)
        out << r.tau << "," << r.mean_absrel << "," << r.std_absrel << "," << param_label << "\n";
}

Grid uncertainty_map(const DenoiseFn& net, const Grid& image_enc, int anno_channels,
                     const NoiseSchedule& sched, Variant variant, Parameterization p,
                     const std::vector<uint64_t>& seeds, int fixed_t, const SampleOptions& opts) {
    if (variant != Variant::Generative)
        throw std::invalid_argument("uncertainty_map: discriminative nets have no noise to vary");
    if (seeds.size() < 2) throw std::invalid_argument("uncertainty_map: need >= 2 seeds");
    std::vector<Grid> preds;
    preds.reserve(seeds.size());
    for (uint64_t s : seeds) {
        RandomSource rng(s, 0x7E11);
        preds.push_back(single_step_infer(net, image_enc, anno_channels, sched, &rng, variant, p,
                                          fixed_t, opts));
    }
    Grid mean(preds[0].height(), preds[0].width(), preds[0].channels());
    for (const Grid& g : preds)
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += g[i] / double(preds.size());
    Grid var(mean.height(), mean.width(), mean.channels());
    for (const Grid& g : preds)
        for (size_t i = 0; i < var.size(); ++i) {
            const double d = g[i] - mean[i];
            var[i] += d * d / double(preds.size());
        }
    // reduce over channels to one std map
    Grid out(mean.height(), mean.width(), 1);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            double v = 0.0;
            for (int c = 0; c < var.channels(); ++c) v += var.at(y, x, c);
            out.at(y, x, 0) = std::sqrt(v / var.channels());
        }
    return out;
}

Grid depth_edge_band(const Grid& depth, int band_px) {
    if (depth.channels() != 1) throw std::invalid_argument("depth_edge_band: single channel");
    const int h = depth.height(), w = depth.width();
    double lo = depth[0], hi = depth[0];
    for (size_t i = 0; i < depth.size(); ++i) {
        lo = std::min(lo, depth[i]);
        hi = std::max(hi, depth[i]);
    }
    const double thresh = 0.1 * std::max(1e-12, hi - lo);
    Grid edges(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x + 1 < w ? depth.at(y, x + 1, 0) - depth.at(y, x, 0) : 0.0;
            const double dy = y + 1 < h ? depth.at(y + 1, x, 0) - depth.at(y, x, 0) : 0.0;
            if (std::hypot(dx, dy) > thresh) edges.at(y, x, 0) = 1.0;
        }
    // dilate
    Grid band = edges;
    for (int it = 0; it < band_px; ++it) {
        Grid next = band;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (band.at(y, x, 0) != 0.0) continue;
                for (int dy = -1; dy <= 1 && next.at(y, x, 0) == 0.0; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xx = x + dx;
                        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                        if (band.at(yy, xx, 0) != 0.0) {
                            next.at(y, x, 0) = 1.0;
                            break;
                        }
                    }
            }
        band = std::move(next);
    }
    return band;
}

EdgeInteriorMeans edge_interior_means(const Grid& map, const Grid& edge_band) {
    require_same_shape(map, edge_band, "edge_interior_means");
    EdgeInteriorMeans m;
    long ne = 0, ni = 0;
    for (size_t i = 0; i < map.size(); ++i) {
        if (edge_band[i] != 0.0) {
            m.edge += map[i];
            ++ne;
        } else {
            m.interior += map[i];
            ++ni;
        }
    }
    if (ne > 0) m.edge /= double(ne);
    if (ni > 0) m.interior /= double(ni);
    return m;
}

void BandRatioReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("BandRatioReport::write_csv: cannot open " + path.string());
    out << "group,radius_lo,radius_hi,image_energy,pred_energy,gt_energy,pred_gt_ratio,image_gt_"
           "ratio\n";
    for (int g = 0; g < bands.group_count; ++g) {
        const double lo = g == 0 ? 0.0 : bands.radii[g - 1];
        out << g << "," << lo << "," << bands.radii[g] << "," << image_energy[g] << ","
            << pred_energy[g] << "," << gt_energy[g] << "," << pred_gt_ratio[g] << ","
            << image_gt_ratio[g] << "\n";
    }
}

BandRatioReport band_ratio_report(const std::vector<Grid>& preds, const std::vector<Grid>& gts,
                                  const std::vector<Grid>& images, double base, int group_count) {
    if (preds.size() != gts.size() || preds.size() != images.size() || preds.empty())
        throw std::invalid_argument("band_ratio_report: list sizes must match and be nonempty");
    auto next_pow2 = [](int n) {
        int p = 1;
        while (p < n) p <<= 1;
        return p;
    };
    int target = 1;
    for (const Grid& g : preds) target = std::max(target, next_pow2(std::max(g.height(), g.width())));
    for (const Grid& g : gts) target = std::max(target, next_pow2(std::max(g.height(), g.width())));
    for (const Grid& g : images)
        target = std::max(target, next_pow2(std::max(g.height(), g.width())));

    BandRatioReport report;
    report.bands = band_partition(target, target, base, group_count);
    report.image_energy.assign(group_count, 0.0);
    report.pred_energy.assign(group_count, 0.0);
    report.gt_energy.assign(group_count, 0.0);

    auto accumulate = [&](const Grid& g, std::vector<double>& dst) {
        Grid mono = g.channels() == 1 ? g : channel(g, 0);
        const Grid power = fft2_power(pad_pow2(mono, target, target));
        const auto energy = band_energy(power, report.bands);
        for (int k = 0; k < group_count; ++k) dst[k] += energy[k] / double(preds.size());
    };
    for (size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].height() != gts[i].height() || preds[i].width() != gts[i].width())
            throw std::invalid_argument("band_ratio_report: pred/gt shape mismatch");
        accumulate(preds[i], report.pred_energy);
        accumulate(gts[i], report.gt_energy);
        accumulate(images[i], report.image_energy);
    }
    report.pred_gt_ratio.assign(group_count, -1.0);
    report.image_gt_ratio.assign(group_count, -1.0);
    for (int g = 0; g < group_count; ++g)
        if (report.gt_energy[g] > 0.0) {
            report.pred_gt_ratio[g] = report.pred_energy[g] / report.gt_energy[g];
            report.image_gt_ratio[g] = report.image_energy[g] / report.gt_energy[g];
        }
    return report;
}

std::vector<AblateRow> ablate(const std::string& axis, const ProtocolConfig& base_cfg,
                              const std::vector<int>& values, const std::vector<SamplePool>& pools,
                              uint64_t eval_seed) {
    std::vector<std::pair<std::string, ProtocolConfig>> runs;
    if (axis == "T_prime_sweep") {
        for (int v : values) {
            ProtocolConfig cfg = base_cfg;
            cfg.name = "T_prime_" + std::to_string(v);
            cfg.T_prime = v;
            runs.emplace_back(cfg.name, cfg);
        }
    } else if (axis == "t_choice_sweep") {
        for (int v : values) {
            ProtocolConfig cfg = base_cfg;
            cfg.name = "t_" + std::to_string(v);
            cfg.T_prime = 1;
            cfg.fixed_t = v;
            runs.emplace_back(cfg.name, cfg);
        }
    } else if (axis == "ladder") {
        for (const std::string& name : canonical_protocol_names()) {
            ProtocolConfig cfg = protocol_preset(name);
            cfg.steps = base_cfg.steps;
            cfg.batch_size = base_cfg.batch_size;
            cfg.lr = base_cfg.lr;
            cfg.seed = base_cfg.seed;
            cfg.threads = base_cfg.threads;
            cfg.val_every = base_cfg.val_every;
            runs.emplace_back(name, cfg);
        }
    } else {
        throw std::invalid_argument("ablate: unknown axis " + axis);
    }

    const std::vector<Sample> held_out = held_out_slice(pools);
    std::vector<AblateRow> rows;
    for (auto& [label, cfg] : runs) {
        TrainResult result = train_protocol(cfg, pools);
        EvalReport report = evaluate_model(result.net, cfg, held_out, eval_seed, cfg.threads);
        AblateRow row;
        row.label = label;
        row.value = axis == "T_prime_sweep" ? cfg.T_prime : cfg.fixed_t;
        row.absrel = report.absrel;
        row.delta1 = report.delta1;
        row.delta2 = report.delta2;
        rows.push_back(row);
    }
    return rows;
}

void write_ablate_csv(const std::filesystem::path& path, const std::string& axis,
                      const std::vector<AblateRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ablate_csv: cannot open " + path.string());
    out << "axis,label,value,absrel,delta1,delta2\n";
    for (const auto& r : rows)
        out << axis << "," << r.label << "," << r.value << "," << r.absrel << "," << r.delta1
            << "," << r.delta2 << "\n";
}

}  // namespace lotuslab
