#include "lotuslab/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace lotuslab {

Grid align_affine(const Grid& pred, const Grid& gt, const Grid& mask) {
    auto fit = lstsq_scale_shift(pred, gt, mask);
    if (!fit) throw std::runtime_error("align_affine: degenerate least-squares fit");
    Grid out = pred;
    for (size_t i = 0; i < out.size(); ++i) out[i] = fit->scale * out[i] + fit->shift;
    return out;
}

double absrel(const Grid& pred, const Grid& gt, const Grid& mask) {
    require_same_shape(pred, gt, "absrel");
    require_same_shape(pred, mask, "absrel");
    double sum = 0.0;
    long n = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (mask[i] == 0.0) continue;
        if (gt[i] <= 0.0) throw std::invalid_argument("absrel: nonpositive ground truth under mask");
        sum += std::abs(pred[i] - gt[i]) / gt[i];
        ++n;
    }
    if (n == 0) throw std::invalid_argument("absrel: empty mask");
    return sum / double(n);
}

double delta_acc(const Grid& pred, const Grid& gt, const Grid& mask, double thresh) {
    require_same_shape(pred, gt, "delta_acc");
    require_same_shape(pred, mask, "delta_acc");
    long n = 0, ok = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (mask[i] == 0.0) continue;
        if (pred[i] <= 0.0 || gt[i] <= 0.0)
            throw std::invalid_argument("delta_acc: nonpositive values under mask");
        const double r = std::max(pred[i] / gt[i], gt[i] / pred[i]);
        ++n;
        if (r < thresh) ++ok;
    }
    if (n == 0) throw std::invalid_argument("delta_acc: empty mask");
    return double(ok) / double(n);
}

NormalMetrics normal_metrics(const Grid& pred, const Grid& gt, const Grid& mask) {
    if (pred.channels() != 3 || gt.channels() != 3)
        throw std::invalid_argument("normal_metrics: 3-channel grids required");
    if (pred.height() != gt.height() || pred.width() != gt.width() ||
        mask.height() != gt.height() || mask.width() != gt.width() || mask.channels() != 1)
        throw std::invalid_argument("normal_metrics: shape mismatch");
    NormalMetrics m;
    double sum = 0.0;
    long n = 0, below1 = 0, below2 = 0;
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x) {
            if (mask.at(y, x, 0) == 0.0) continue;
            const double px = pred.at(y, x, 0), py = pred.at(y, x, 1), pz = pred.at(y, x, 2);
            const double len = std::sqrt(px * px + py * py + pz * pz);
            if (len < 1e-12) {
                ++m.excluded;
                continue;
            }
            double dot = (px * gt.at(y, x, 0) + py * gt.at(y, x, 1) + pz * gt.at(y, x, 2)) / len;
            dot = std::min(1.0, std::max(-1.0, dot));
            const double deg = std::acos(dot) * 180.0 / M_PI;
            sum += deg;
            ++n;
            if (deg < 11.25) ++below1;
            if (deg < 30.0) ++below2;
        }
    if (n == 0) throw std::invalid_argument("normal_metrics: no valid pixels");
    m.mean_deg = sum / double(n);
    m.pct_below_11_25 = double(below1) / double(n);
    m.pct_below_30 = double(below2) / double(n);
    return m;
}

DepthEval eval_depth_prediction(const Grid& pred_model_space, const Sample& s,
                                const AnnotationCodec& codec) {
    const Grid pred_depth = codec.decode_depth(pred_model_space);

    // primary: align in disparity space, invert, measure on depth
    Grid pred_disp = pred_depth;
    for (size_t i = 0; i < pred_disp.size(); ++i) pred_disp[i] = 1.0 / pred_depth[i];
    Grid aligned_disp = align_affine(pred_disp, s.disparity, s.mask);
    const double disp_floor = 1.0 / (4.0 * codec.d_max);
    const double disp_ceil = 4.0 / codec.d_min;
    Grid depth_a(aligned_disp.height(), aligned_disp.width(), 1);
    for (size_t i = 0; i < depth_a.size(); ++i)
        depth_a[i] = 1.0 / std::min(disp_ceil, std::max(disp_floor, aligned_disp[i]));

    DepthEval e;
    e.absrel = absrel(depth_a, s.depth, s.mask);
    e.delta1 = delta_acc(depth_a, s.depth, s.mask, 1.25);
    e.delta2 = delta_acc(depth_a, s.depth, s.mask, 1.25 * 1.25);

    // secondary: align directly in depth space
    Grid aligned_depth = align_affine(pred_depth, s.depth, s.mask);
    const double depth_floor = codec.d_min / 4.0;
    for (size_t i = 0; i < aligned_depth.size(); ++i)
        aligned_depth[i] = std::max(depth_floor, aligned_depth[i]);
    e.absrel_depth_aligned = absrel(aligned_depth, s.depth, s.mask);

    long n = 0;
    for (size_t i = 0; i < s.mask.size(); ++i)
        if (s.mask[i] != 0.0) ++n;
    e.n_pixels = n;
    return e;
}

}  // namespace lotuslab
