#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "radtag/tensor.hpp"

namespace radtag::ad {

enum class OpKind {
    Leaf, Add, Mul, Scale, Sigmoid, Tanh, Relu, Affine, Affine2, MatmulNT,
    MatmulTN, RowDot, SoftmaxCols, SoftmaxVec, Slice, Concat, StackRows,
    Row, Flatten, Conv1d, MaxPoolTime, Mask, BceSum, SumSq
};

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor v;
    Tensor g;  // allocated lazily, same shape as v
    bool requires_grad = false;
    OpKind kind = OpKind::Leaf;
    std::vector<Var> parents;
    std::function<void()> back;

    void ensure_grad() {
        if (g.data.size() != v.data.size()) {
            g.shape = v.shape;
            g.data.assign(v.data.size(), 0.0);
        }
    }
    void zero_grad() {
        if (!g.data.empty()) g.data.assign(g.data.size(), 0.0);
    }
};

Var leaf(Tensor value, bool requires_grad = false);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var sigmoid(Var a);      // output clamped to [1e-12, 1 - 1e-12]
Var tanh_op(Var a);
Var relu(Var a);

// y = W x + b, W:[m,n] x:[n] b:[m]
Var affine(Var W, Var x, Var b);
// y = Wx x + Wh h + b (fused recurrent gate block)
Var affine2(Var Wx, Var x, Var Wh, Var h, Var b);

Var matmul_nt(Var A, Var B);  // A:[m,k] B:[l,k] -> A B^T [m,l]
Var matmul_tn(Var A, Var B);  // A:[m,k] B:[m,n] -> A^T B [k,n]
Var rowdot(Var A, Var B);     // A:[l,d] B:[d,l] -> z[l], z_i = A_i . B_:,i

Var softmax_cols(Var S);  // softmax over rows, per column
Var softmax_vec(Var x);

Var slice(Var x, size_t offset, size_t len);
Var concat(Var a, Var b);
Var stack_rows(const std::vector<Var>& rows);
Var row(Var X, size_t i);
Var flatten(Var X);

// X:[n,din], W:[f,k,din], b:[f] -> [n-k+1, f]
Var conv1d(Var X, Var W, Var b, size_t kernel);
Var maxpool_time(Var X, size_t kernel, size_t stride);

// elementwise multiply by a constant mask (dropout)
Var mask(Var x, Tensor m);

// binary cross entropy, summed over labels; log arguments clamped at
// 1e-12. When `probs` was produced by sigmoid, the backward pass fuses
// through it so d loss / d logit equals (p - y) exactly.
Var bce_sum(Var probs, Tensor targets);

Var sum_sq(Var x);  // scalar sum of squares

// Runs reverse-mode accumulation from a scalar root.
void backward(const Var& root);

}  // namespace radtag::ad
