#include "lotuslab/spectral.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>

namespace lotuslab {

namespace {

bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// In-place radix-2 Cooley-Tukey on a stride-able view.
void fft1d(std::complex<double>* a, int n, size_t stride) {
    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i * stride], a[j * stride]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                auto u = a[(i + k) * stride];
                auto v = a[(i + k + len / 2) * stride] * w;
                a[(i + k) * stride] = u + v;
                a[(i + k + len / 2) * stride] = u - v;
                w *= wl;
            }
        }
    }
}

// wrap-aware distance of a frequency index from DC
double bin_radius(int fy, int fx, int h, int w) {
    const double dy = std::min(fy, h - fy);
    const double dx = std::min(fx, w - fx);
    return std::hypot(dy, dx);
}

}  // namespace

Grid fft2_power(const Grid& g) {
    if (g.channels() != 1) throw std::invalid_argument("fft2_power: single-channel input required");
    const int h = g.height(), w = g.width();
    if (!is_pow2(h) || !is_pow2(w))
        throw std::invalid_argument("fft2_power: dims must be powers of two (use pad_pow2)");

    std::vector<std::complex<double>> buf(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) buf[static_cast<size_t>(y) * w + x] = g.at(y, x, 0);

    for (int y = 0; y < h; ++y) fft1d(buf.data() + static_cast<size_t>(y) * w, w, 1);
    for (int x = 0; x < w; ++x) fft1d(buf.data() + x, h, w);

    Grid power(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) power.at(y, x, 0) = std::norm(buf[static_cast<size_t>(y) * w + x]);
    return power;
}

Grid pad_pow2(const Grid& g, int target_h, int target_w) {
    auto next_pow2 = [](int n) {
        int p = 1;
        while (p < n) p <<= 1;
        return p;
    };
    const int th = target_h > 0 ? target_h : next_pow2(g.height());
    const int tw = target_w > 0 ? target_w : next_pow2(g.width());
    if (th < g.height() || tw < g.width() || !is_pow2(th) || !is_pow2(tw))
        throw std::invalid_argument("pad_pow2: target dims must be powers of two covering the input");
    Grid out(th, tw, g.channels());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            for (int ch = 0; ch < g.channels(); ++ch) out.at(y, x, ch) = g.at(y, x, ch);
    return out;
}

BandMap band_partition(int h, int w, double base, int group_count) {
    if (base <= 1.0) throw std::invalid_argument("band_partition: base must be > 1");
    if (group_count < 1) throw std::invalid_argument("band_partition: group_count must be >= 1");
    BandMap bm;
    bm.height = h;
    bm.width = w;
    bm.group_count = group_count;
    bm.radii.resize(group_count);
    for (int g = 0; g < group_count; ++g) bm.radii[g] = std::pow(base, g + 1);
    bm.assignment.resize(static_cast<size_t>(h) * w);
    for (int fy = 0; fy < h; ++fy)
        for (int fx = 0; fx < w; ++fx) {
            const double r = bin_radius(fy, fx, h, w);
            int grp = group_count - 1;  // last group absorbs the tail
            for (int g = 0; g < group_count; ++g)
                if (r <= bm.radii[g]) {
                    grp = g;
                    break;
                }
            bm.assignment[static_cast<size_t>(fy) * w + fx] = grp;
        }
    return bm;
}

std::vector<double> band_energy(const Grid& power, const BandMap& bands) {
    if (power.height() != bands.height || power.width() != bands.width || power.channels() != 1)
        throw std::invalid_argument("band_energy: power grid does not match the band map");
    std::vector<double> energy(bands.group_count, 0.0);
    for (size_t i = 0; i < power.size(); ++i) energy[bands.assignment[i]] += power[i];
    return energy;
}

void write_band_csv(const std::filesystem::path& path, const BandMap& bands,
                    const std::vector<double>& energies) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_band_csv: cannot open " + path.string());
    out << "group,radius_lo,radius_hi,energy\n";
    for (int g = 0; g < bands.group_count; ++g) {
        const double lo = g == 0 ? 0.0 : bands.radii[g - 1];
        out << g << "," << lo << "," << bands.radii[g] << "," << energies[g] << "\n";
    }
}

}  // namespace lotuslab
