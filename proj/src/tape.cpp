#include "lotuslab/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace lotuslab {

namespace kernels {

double act_forward(ActKind k, double x) {
    switch (k) {
        case ActKind::Relu: return x > 0.0 ? x : 0.0;
        case ActKind::Silu: return x / (1.0 + std::exp(-x));
        case ActKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return 0.0;
}

double act_derivative(ActKind k, double x) {
    switch (k) {
        case ActKind::Relu: return x > 0.0 ? 1.0 : 0.0;
        case ActKind::Silu: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        }
        case ActKind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
    }
    return 0.0;
}

// Weights laid out (ky*K+kx, ci, co) so the co loop streams contiguously.
void conv2d_forward(const Grid& x, const Grid& w, int kk, int co, int stride, int pad, Grid& out) {
    const int h = x.height(), ww = x.width(), ci = x.channels();
    const int k = static_cast<int>(std::lround(std::sqrt(double(kk))));
    const int ho = (h + 2 * pad - k) / stride + 1;
    const int wo = (ww + 2 * pad - k) / stride + 1;
    out = Grid(ho, wo, co);
    const double* xd = x.data();
    const double* wd = w.data();
    double* od = out.data();
    for (int yo = 0; yo < ho; ++yo) {
        for (int xo = 0; xo < wo; ++xo) {
            double* acc = od + (static_cast<size_t>(yo) * wo + xo) * co;
            for (int ky = 0; ky < k; ++ky) {
                const int yi = yo * stride - pad + ky;
                if (yi < 0 || yi >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int xi = xo * stride - pad + kx;
                    if (xi < 0 || xi >= ww) continue;
                    const double* xrow = xd + (static_cast<size_t>(yi) * ww + xi) * ci;
                    const double* wrow = wd + (static_cast<size_t>(ky * k + kx) * ci) * co;
                    for (int c = 0; c < ci; ++c) {
                        const double xs = xrow[c];
                        const double* wv = wrow + static_cast<size_t>(c) * co;
                        for (int o = 0; o < co; ++o) acc[o] += xs * wv[o];
                    }
                }
            }
        }
    }
}

void conv2d_backward(const Grid& x, const Grid& w, const Grid& dout, int kk, int co, int stride,
                     int pad, Grid& dx, Grid& dw) {
    const int h = x.height(), ww = x.width(), ci = x.channels();
    const int k = static_cast<int>(std::lround(std::sqrt(double(kk))));
    const int ho = dout.height(), wo = dout.width();
    dx = Grid(h, ww, ci);
    dw = Grid(w.height(), w.width(), w.channels());
    const double* xd = x.data();
    const double* wd = w.data();
    const double* gd = dout.data();
    double* dxd = dx.data();
    double* dwd = dw.data();
    for (int yo = 0; yo < ho; ++yo) {
        for (int xo = 0; xo < wo; ++xo) {
            const double* gv = gd + (static_cast<size_t>(yo) * wo + xo) * co;
            for (int ky = 0; ky < k; ++ky) {
                const int yi = yo * stride - pad + ky;
                if (yi < 0 || yi >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int xi = xo * stride - pad + kx;
                    if (xi < 0 || xi >= ww) continue;
                    const double* xrow = xd + (static_cast<size_t>(yi) * ww + xi) * ci;
                    double* dxrow = dxd + (static_cast<size_t>(yi) * ww + xi) * ci;
                    const size_t wbase = (static_cast<size_t>(ky * k + kx) * ci) * co;
                    for (int c = 0; c < ci; ++c) {
                        const double xs = xrow[c];
                        const double* wv = wd + wbase + static_cast<size_t>(c) * co;
                        double* dwv = dwd + wbase + static_cast<size_t>(c) * co;
                        double accx = 0.0;
                        for (int o = 0; o < co; ++o) {
                            accx += gv[o] * wv[o];
                            dwv[o] += xs * gv[o];
                        }
                        dxrow[c] += accx;
                    }
                }
            }
        }
    }
}

}  // namespace kernels

int Tape::check(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: node id out of range");
    return id;
}

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Grid v) {
    Node n;
    n.op = Op::Leaf;
    n.val = std::move(v);
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    require_same_shape(value(a), value(b), "Tape::add");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val = lotuslab::add(value(a), value(b));
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    require_same_shape(value(a), value(b), "Tape::mul");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    const Grid& va = value(a);
    const Grid& vb = value(b);
    Grid out = va;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    n.val = std::move(out);
    return push(std::move(n));
}

int Tape::scale(int a, double s) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.scalar = s;
    n.val = lotuslab::scale(value(a), s);
    return push(std::move(n));
}

int Tape::conv2d(int input, int weights, int stride, int pad) {
    const Grid& x = value(check(input));
    const Grid& w = value(check(weights));
    const int kk = w.height();
    const int k = static_cast<int>(std::lround(std::sqrt(double(kk))));
    if (k * k != kk) throw std::invalid_argument("Tape::conv2d: weight rows must be a square kernel");
    if (w.width() != x.channels())
        throw std::invalid_argument("Tape::conv2d: weight input channels mismatch");
    if (stride != 1 && stride != 2) throw std::invalid_argument("Tape::conv2d: stride must be 1 or 2");
    Node n;
    n.op = Op::Conv2d;
    n.a = input;
    n.b = weights;
    n.stride = stride;
    n.pad = pad;
    kernels::conv2d_forward(x, w, kk, w.channels(), stride, pad, n.val);
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    const Grid& va = value(check(a));
    const Grid& vb = value(check(b));
    if (va.channels() != 1 || vb.channels() != 1 || va.width() != vb.height())
        throw std::invalid_argument("Tape::matmul: expects (m,k,1) x (k,n,1)");
    const int m = va.height(), kdim = va.width(), nn = vb.width();
    Node n;
    n.op = Op::Matmul;
    n.a = a;
    n.b = b;
    Grid out(m, nn, 1);
    for (int i = 0; i < m; ++i)
        for (int kq = 0; kq < kdim; ++kq) {
            const double s = va.at(i, kq, 0);
            for (int j = 0; j < nn; ++j) out.at(i, j, 0) += s * vb.at(kq, j, 0);
        }
    n.val = std::move(out);
    return push(std::move(n));
}

int Tape::act(int a, ActKind kind) {
    Node n;
    n.op = Op::Act;
    n.a = a;
    n.act = kind;
    const Grid& v = value(check(a));
    Grid out = v;
    for (size_t i = 0; i < out.size(); ++i) out[i] = kernels::act_forward(kind, v[i]);
    n.val = std::move(out);
    return push(std::move(n));
}

int Tape::reduce_sum(int a) {
    Node n;
    n.op = Op::ReduceSum;
    n.a = a;
    const Grid& v = value(check(a));
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) s += v[i];
    n.val = Grid(1, 1, 1, s);
    return push(std::move(n));
}

int Tape::broadcast_c(int vec, int h, int w) {
    const Grid& v = value(check(vec));
    if (v.height() != 1 || v.channels() != 1)
        throw std::invalid_argument("Tape::broadcast_c: expects a (1, C, 1) row vector");
    Node n;
    n.op = Op::BroadcastC;
    n.a = vec;
    n.bh = h;
    n.bw = w;
    const int c = v.width();
    Grid out(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) out.at(y, x, ch) = v.at(0, ch, 0);
    n.val = std::move(out);
    return push(std::move(n));
}

int Tape::upsample2x(int a) {
    const Grid& v = value(check(a));
    Node n;
    n.op = Op::Upsample2x;
    n.a = a;
    Grid out(v.height() * 2, v.width() * 2, v.channels());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int ch = 0; ch < v.channels(); ++ch) out.at(y, x, ch) = v.at(y / 2, x / 2, ch);
    n.val = std::move(out);
    return push(std::move(n));
}

std::vector<Grid> Tape::backward(int loss_id) const {
    const Grid& loss = value(check(loss_id));
    if (loss.height() != 1 || loss.width() != 1 || loss.channels() != 1)
        throw std::invalid_argument("Tape::backward: loss must be scalar (1x1x1)");

    std::vector<Grid> grads(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const Grid& v = nodes_[i].val;
        grads[i] = Grid(v.height(), v.width(), v.channels());
    }
    grads[loss_id][0] = 1.0;

    for (int id = loss_id; id >= 0; --id) {
        const Node& n = nodes_[id];
        const Grid& g = grads[id];
        switch (n.op) {
            case Op::Leaf: break;
            case Op::Add: {
                Grid& ga = grads[n.a];
                Grid& gb = grads[n.b];
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case Op::Mul: {
                const Grid& va = nodes_[n.a].val;
                const Grid& vb = nodes_[n.b].val;
                Grid& ga = grads[n.a];
                Grid& gb = grads[n.b];
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * vb[i];
                    gb[i] += g[i] * va[i];
                }
                break;
            }
            case Op::Scale: {
                Grid& ga = grads[n.a];
                for (size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
                break;
            }
            case Op::Conv2d: {
                const Grid& x = nodes_[n.a].val;
                const Grid& w = nodes_[n.b].val;
                Grid dx, dw;
                kernels::conv2d_backward(x, w, g, w.height(), w.channels(), n.stride, n.pad, dx, dw);
                Grid& ga = grads[n.a];
                Grid& gb = grads[n.b];
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += dx[i];
                for (size_t i = 0; i < gb.size(); ++i) gb[i] += dw[i];
                break;
            }
            case Op::Matmul: {
                const Grid& va = nodes_[n.a].val;
                const Grid& vb = nodes_[n.b].val;
                Grid& ga = grads[n.a];
                Grid& gb = grads[n.b];
                const int m = va.height(), kdim = va.width(), nn = vb.width();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < nn; ++j) {
                        const double gij = g.at(i, j, 0);
                        for (int kq = 0; kq < kdim; ++kq) {
                            ga.at(i, kq, 0) += gij * vb.at(kq, j, 0);
                            gb.at(kq, j, 0) += gij * va.at(i, kq, 0);
                        }
                    }
                break;
            }
            case Op::Act: {
                const Grid& x = nodes_[n.a].val;
                Grid& ga = grads[n.a];
                for (size_t i = 0; i < g.size(); ++i)
                    ga[i] += g[i] * kernels::act_derivative(n.act, x[i]);
                break;
            }
            case Op::ReduceSum: {
                Grid& ga = grads[n.a];
                const double gs = g[0];
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
                break;
            }
            case Op::BroadcastC: {
                Grid& ga = grads[n.a];
                const int c = nodes_[n.a].val.width();
                for (int y = 0; y < n.bh; ++y)
                    for (int x = 0; x < n.bw; ++x)
                        for (int ch = 0; ch < c; ++ch) ga.at(0, ch, 0) += g.at(y, x, ch);
                break;
            }
            case Op::Upsample2x: {
                Grid& ga = grads[n.a];
                for (int y = 0; y < g.height(); ++y)
                    for (int x = 0; x < g.width(); ++x)
                        for (int ch = 0; ch < g.channels(); ++ch)
                            ga.at(y / 2, x / 2, ch) += g.at(y, x, ch);
                break;
            }
        }
    }
    return grads;
}

}  // namespace lotuslab
