#pragma once

#include <vector>

#include "lotuslab/grid.hpp"

namespace lotuslab {

enum class Op {
    Leaf,
    Add,         // elementwise a + b
    Mul,         // elementwise a * b
    Scale,       // constant * a
    Conv2d,      // a: H x W x Ci, b: K*K x Ci x Co weights
    Matmul,      // a: m x k x 1, b: k x n x 1
    Act,         // relu-family pointwise nonlinearity
    ReduceSum,   // -> 1 x 1 x 1
    BroadcastC,  // row vector (1, C, 1) -> H x W x C channel bias
    Upsample2x,  // nearest-neighbor 2x
};

enum class ActKind { Relu, Silu, Sigmoid };

/// Reverse-mode tape over grid-valued primitives. Nodes are appended in
/// topological order; one backward pass fills a gradient for every node
/// reachable from the loss, zeros elsewhere.
class Tape {
public:
    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1;
        Grid val;
        double scalar = 0.0;                // Scale
        ActKind act = ActKind::Relu;        // Act
        int stride = 1, pad = 0;            // Conv2d
        int bh = 0, bw = 0;                 // BroadcastC target dims
    };

    int leaf(Grid v);
    int add(int a, int b);
    int mul(int a, int b);
    int scale(int a, double s);
    int conv2d(int input, int weights, int stride, int pad);
    int matmul(int a, int b);
    int act(int a, ActKind kind);
    int reduce_sum(int a);
    int broadcast_c(int vec, int h, int w);
    int upsample2x(int a);

    int sub(int a, int b) { return add(a, scale(b, -1.0)); }

    const Grid& value(int id) const { return nodes_[check(id)].val; }
    size_t node_count() const { return nodes_.size(); }

    /// Gradients of a scalar loss node w.r.t. every node, aligned by id.
    std::vector<Grid> backward(int loss_id) const;

private:
    int check(int id) const;
    int push(Node n);

    std::vector<Node> nodes_;
};

// Raw kernels, shared with the gradient-check oracle in tests.
namespace kernels {
void conv2d_forward(const Grid& x, const Grid& w, int kk, int co, int stride, int pad, Grid& out);
void conv2d_backward(const Grid& x, const Grid& w, const Grid& dout, int kk, int co, int stride,
                     int pad, Grid& dx, Grid& dw);
double act_forward(ActKind k, double x);
double act_derivative(ActKind k, double x);
}  // namespace kernels

}  // namespace lotuslab
