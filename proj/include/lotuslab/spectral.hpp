#pragma once

#include <filesystem>
#include <vector>

#include "lotuslab/grid.hpp"

namespace lotuslab {

/// Partition of the 2D frequency plane into exponentially growing annuli.
/// Group 0 covers radius <= base; group g covers (base^g, base^(g+1)];
/// the last group also absorbs everything out to the Nyquist corner.
struct BandMap {
    int height = 0;
    int width = 0;
    int group_count = 0;
    std::vector<double> radii;       // upper boundary per group, ascending
    std::vector<int> assignment;     // group index per frequency bin, row-major
};

/// |DFT|^2 of a single-channel grid, DC at the corner (unshifted).
/// Dimensions must be powers of two; see pad_pow2.
Grid fft2_power(const Grid& g);

/// Zero-pad a grid (top-left anchored) up to the next powers of two,
/// or to explicit target dims when given.
Grid pad_pow2(const Grid& g, int target_h = 0, int target_w = 0);

BandMap band_partition(int h, int w, double base, int group_count);

/// Per-group sum of spectral power; groups sum to the total power.
std::vector<double> band_energy(const Grid& power, const BandMap& bands);

/// CSV with header "group,radius_lo,radius_hi,energy".
void write_band_csv(const std::filesystem::path& path, const BandMap& bands,
                    const std::vector<double>& energies);

}  // namespace lotuslab
