#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lotuslab/grid.hpp"
#include "lotuslab/rng.hpp"

namespace lotuslab {

enum class Domain { AIndoorLike, BOutdoorLike };
enum class DetailLevel { Plain, DetailRich };

Domain domain_from_string(const std::string& s);
std::string to_string(Domain d);
DetailLevel detail_from_string(const std::string& s);
std::string to_string(DetailLevel d);

// Global depth limits; domain A stays well inside, domain B reaches the
// far plane.
inline constexpr double kDepthMin = 1.0;
inline constexpr double kDepthMax = 80.0;

/// One synthetic scene with exact ground truth. Normals use the viewer
/// convention n = normalize(dz/dx, dz/dy, 1), so a fronto-parallel face
/// maps to (0, 0, 1).
struct Sample {
    Grid image;      // [0,1], 1 or 3 channels
    Grid depth;      // scene units, > 0
    Grid disparity;  // 1 / depth after clamping
    Grid normals;    // unit vectors, 3 channels
    Grid mask;       // {0,1}
    Domain domain = Domain::AIndoorLike;
    DetailLevel detail_level = DetailLevel::Plain;
};

struct DatasetSpec {
    std::vector<double> domain_probs = {1.0, 0.0};  // P(A), P(B)
    int count = 256;
    int height = 48;
    int width = 48;
    int image_channels = 1;
    double detail_rich_fraction = 0.0;
    uint64_t seed = 0;
};

/// Procedural scene: background ramp plane plus 3-10 primitives (boxes,
/// spheres) composited by nearest depth, Lambertian shading. detail_rich
/// adds thin image-space bars and checker/stripe albedo textures that
/// leave the geometry untouched. primitive_count_override forces an exact
/// primitive count (0 keeps the background alone); -1 uses the domain mix.
Sample gen_scene(Domain domain, DetailLevel detail, RandomSource rng, int h, int w,
                 int image_channels = 1, int primitive_count_override = -1);

/// Analytic surface rasterizers behind gen_scene, exposed so ground-truth
/// math can be checked in isolation.
namespace scene_parts {

struct Surfaces {
    Grid depth;
    Grid normals;
    std::vector<int> object;  // per-pixel object id, 0 = background
};

Surfaces flat_background(int h, int w, double z);
void render_sphere(Surfaces& s, int id, double cx, double cy, double r, double z_front);
void render_box(Surfaces& s, int id, int x0, int y0, int x1, int y1, double z0);

}  // namespace scene_parts

/// Pure function of (spec, index); the spec's seed fans out per sample.
Sample generate_sample(const DatasetSpec& spec, int index);

/// Clamp depth into [d_min, d_max] and return the reciprocal.
Grid to_disparity(const Grid& depth, double d_min, double d_max);

/// Affine map [lo, hi] -> [-1, 1] and its inverse.
Grid normalize_annotation(const Grid& g, double lo, double hi);
Grid denormalize_annotation(const Grid& g, double lo, double hi);

struct SamplePool {
    DatasetSpec spec;
    std::vector<Sample> samples;
};

SamplePool generate_pool(const DatasetSpec& spec);

/// Per-batch dataset choice: one pool is picked by probability, then n
/// samples are drawn from it. per_sample instead re-picks the pool for
/// every element (sensitivity option, off by default).
std::vector<Sample> mixture_batch(const std::vector<SamplePool>& pools,
                                  const std::vector<double>& probs, RandomSource& rng, int n,
                                  bool per_sample = false);

/// Index draws only; exposed so training can draw without copying
/// samples. pool_limits, when non-empty, caps the drawable index range
/// per pool (training uses it to skip held-out slices).
std::vector<std::pair<int, int>> mixture_batch_indices(const std::vector<SamplePool>& pools,
                                                       const std::vector<double>& probs,
                                                       RandomSource& rng, int n, bool per_sample,
                                                       const std::vector<int>& pool_limits = {});

// Dataset directory: PFM files plus a manifest.json.
void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec);
SamplePool load_dataset(const std::filesystem::path& dir);

}  // namespace lotuslab
