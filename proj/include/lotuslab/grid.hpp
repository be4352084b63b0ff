#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lotuslab {

/// Dense H x W x C map of real values, row-major with channels innermost.
/// Carries images, annotations, noise, spectra and gradients alike.
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, int channels, double fill = 0.0)
        : h_(height), w_(width), c_(channels),
          data_(static_cast<size_t>(check_dims(height, width, channels)), fill) {}

    static Grid from_data(int height, int width, int channels, std::vector<double> data) {
        if (data.size() != static_cast<size_t>(check_dims(height, width, channels)))
            throw std::invalid_argument("Grid::from_data: size mismatch");
        Grid g;
        g.h_ = height;
        g.w_ = width;
        g.c_ = channels;
        g.data_ = std::move(data);
        return g;
    }

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool same_shape(const Grid& o) const { return h_ == o.h_ && w_ == o.w_ && c_ == o.c_; }

    double& at(int y, int x, int ch) { return data_[idx(y, x, ch)]; }
    double at(int y, int x, int ch) const { return data_[idx(y, x, ch)]; }

    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const std::string& what) const {
        if (!all_finite()) throw std::runtime_error(what + ": non-finite values in grid");
    }

    bool operator==(const Grid& o) const {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_ && data_ == o.data_;
    }

private:
    static long long check_dims(int h, int w, int c) {
        if (h < 1 || w < 1 || c < 1) throw std::invalid_argument("Grid: dims must be >= 1");
        return static_cast<long long>(h) * w * c;
    }
    size_t idx(int y, int x, int ch) const {
        return (static_cast<size_t>(y) * w_ + x) * c_ + ch;
    }

    int h_ = 0, w_ = 0, c_ = 0;
    std::vector<double> data_;
};

// -- elementwise helpers shared by the math modules --

inline void require_same_shape(const Grid& a, const Grid& b, const char* who) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

inline Grid add(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "add");
    Grid out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

inline Grid sub(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "sub");
    Grid out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

inline Grid scale(const Grid& a, double s) {
    Grid out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

/// out = sa*a + sb*b
inline Grid lincomb(double sa, const Grid& a, double sb, const Grid& b) {
    require_same_shape(a, b, "lincomb");
    Grid out(a.height(), a.width(), a.channels());
    for (size_t i = 0; i < out.size(); ++i) out[i] = sa * a[i] + sb * b[i];
    return out;
}

inline Grid clamp(const Grid& a, double lo, double hi) {
    Grid out = a;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i] < lo) out[i] = lo;
        if (out[i] > hi) out[i] = hi;
    }
    return out;
}

inline double max_abs_diff(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Extract one channel as a single-channel grid.
inline Grid channel(const Grid& g, int ch) {
    if (ch < 0 || ch >= g.channels()) throw std::invalid_argument("channel: index out of range");
    Grid out(g.height(), g.width(), 1);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            out.at(y, x, 0) = g.at(y, x, ch);
    return out;
}

/// Concatenate along channels; heights/widths must agree.
inline Grid concat_channels(const Grid& a, const Grid& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw std::invalid_argument("concat_channels: spatial shape mismatch");
    Grid out(a.height(), a.width(), a.channels() + b.channels());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            for (int ch = 0; ch < a.channels(); ++ch) out.at(y, x, ch) = a.at(y, x, ch);
            for (int ch = 0; ch < b.channels(); ++ch)
                out.at(y, x, a.channels() + ch) = b.at(y, x, ch);
        }
    return out;
}

}  // namespace lotuslab
