#pragma once

#include "lotuslab/codec.hpp"
#include "lotuslab/grid.hpp"
#include "lotuslab/lstsq.hpp"

namespace lotuslab {

/// Least-squares affine alignment of pred onto gt; throws on a
/// degenerate fit.
Grid align_affine(const Grid& pred, const Grid& gt, const Grid& mask);

/// Masked mean of |pred - gt| / gt.
double absrel(const Grid& pred, const Grid& gt, const Grid& mask);

/// Fraction of masked pixels with max(pred/gt, gt/pred) strictly below
/// thresh; ties count as failures.
double delta_acc(const Grid& pred, const Grid& gt, const Grid& mask, double thresh);

struct NormalMetrics {
    double mean_deg = 0.0;
    double pct_below_11_25 = 0.0;
    double pct_below_30 = 0.0;
    long excluded = 0;  // zero-vector predictions dropped from the mean
};

/// Angular error metrics; pred is renormalized before comparison.
NormalMetrics normal_metrics(const Grid& pred, const Grid& gt, const Grid& mask);

struct DepthEval {
    double absrel = 0.0;                // aligned in disparity space, error on depth
    double absrel_depth_aligned = 0.0;  // aligned directly in depth space
    double delta1 = 0.0;
    double delta2 = 0.0;
    long n_pixels = 0;
};

/// Affine-invariant depth evaluation of a model-space prediction. The
/// primary AbsRel aligns in disparity space and inverts; the depth-space
/// alignment variant is reported alongside.
DepthEval eval_depth_prediction(const Grid& pred_model_space, const Sample& s,
                                const AnnotationCodec& codec);

}  // namespace lotuslab
