#pragma once

#include <string>

#include "lotuslab/grid.hpp"
#include "lotuslab/scenes.hpp"

namespace lotuslab {

/// Identity codec seam: where a latent autoencoder would sit, the lab
/// maps pixels straight into the model's working range and back.
inline Grid encode_image(const Grid& image) {
    Grid out = image;
    for (size_t i = 0; i < out.size(); ++i) out[i] = out[i] * 2.0 - 1.0;
    return out;
}

inline Grid decode_image(const Grid& z) {
    Grid out = z;
    for (size_t i = 0; i < out.size(); ++i) out[i] = (out[i] + 1.0) * 0.5;
    return out;
}

/// Maps annotations to and from the [-1, 1] training range. Depth can
/// train either directly or in disparity space; normals are already
/// range-native.
struct AnnotationCodec {
    std::string task = "depth_disparity";  // depth_disparity | normals
    std::string space = "depth";           // depth | disparity (depth task only)
    double d_min = kDepthMin;
    double d_max = kDepthMax;

    int channels() const { return task == "normals" ? 3 : 1; }

    Grid encode(const Sample& s) const;

    /// Model-space prediction back to depth units (depth task only).
    Grid decode_depth(const Grid& pred) const;

    /// Model-space prediction to renormalized unit vectors (normals task).
    Grid decode_normals(const Grid& pred) const;
};

}  // namespace lotuslab
