#include "lotuslab/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace lotuslab {

Grid AnnotationCodec::encode(const Sample& s) const {
    if (task == "normals") return s.normals;
    if (task != "depth_disparity") throw std::invalid_argument("AnnotationCodec: unknown task " + task);
    if (space == "depth") return normalize_annotation(clamp(s.depth, d_min, d_max), d_min, d_max);
    if (space == "disparity")
        return normalize_annotation(to_disparity(s.depth, d_min, d_max), 1.0 / d_max, 1.0 / d_min);
    throw std::invalid_argument("AnnotationCodec: unknown space " + space);
}

Grid AnnotationCodec::decode_depth(const Grid& pred) const {
    if (task != "depth_disparity")
        throw std::invalid_argument("AnnotationCodec::decode_depth: task is not depth");
    if (space == "depth") return clamp(denormalize_annotation(pred, d_min, d_max), d_min, d_max);
    Grid disp = denormalize_annotation(pred, 1.0 / d_max, 1.0 / d_min);
    Grid out = disp;
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = 1.0 / std::clamp(disp[i], 1.0 / d_max, 1.0 / d_min);
    return out;
}

Grid AnnotationCodec::decode_normals(const Grid& pred) const {
    if (task != "normals")
        throw std::invalid_argument("AnnotationCodec::decode_normals: task is not normals");
    if (pred.channels() != 3) throw std::invalid_argument("decode_normals: 3 channels required");
    Grid out = pred;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const double nx = out.at(y, x, 0), ny = out.at(y, x, 1), nz = out.at(y, x, 2);
            const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
            if (len > 1e-12) {
                out.at(y, x, 0) = nx / len;
                out.at(y, x, 1) = ny / len;
                out.at(y, x, 2) = nz / len;
            }
        }
    return out;
}

}  // namespace lotuslab
