#pragma once

#include <cmath>
#include <cstdint>

#include "lotuslab/grid.hpp"

namespace lotuslab {

/// Counter-based random source: every value is a pure function of
/// (seed, stream, counter), so copies and thread layouts cannot change
/// the sequence. Streams are cheap to derive; one top-level seed fans
/// out to every consumer in the project.
class RandomSource {
public:
    RandomSource() : RandomSource(0, 0) {}
    RandomSource(uint64_t seed, uint64_t stream_id)
        : seed_(seed), stream_(stream_id), key_(derive_key(seed, stream_id)) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_; }

    /// Independent child stream; the child starts at counter 0.
    RandomSource substream(uint64_t id) const {
        return RandomSource(seed_, mix64(stream_ ^ mix64(id + 0x9e3779b97f4a7c15ULL)));
    }

    uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        // keep log argument strictly positive
        double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

private:
    static uint64_t mix64(uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }
    static uint64_t derive_key(uint64_t seed, uint64_t stream) {
        return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(stream * 0xda942042e4dd58b5ULL + 1));
    }

    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t key_ = 0;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Grid of i.i.d. standard normal values, deterministic under the source.
inline Grid gaussian_grid(RandomSource& rng, int h, int w, int c) {
    Grid g(h, w, c);
    for (size_t i = 0; i < g.size(); ++i) g[i] = rng.next_normal();
    return g;
}

}  // namespace lotuslab
