#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "synclip/autodiff/tensor.hpp"

// Differentiable tensor operations. Each op records itself on the active tape
// (see TapeScope) when any input requires a gradient. Binary elementwise ops
// broadcast with the usual right-aligned rules.
namespace synclip::autodiff::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// [..., m, k] x [..., k, n]. The right operand may be rank 2 and is then
/// shared across the left operand's leading dimensions.
Tensor matmul(const Tensor& a, const Tensor& b);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// input [B, C, H, W], weight [O, C, kh, kw], bias [O] -> [B, O, H', W'].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dOptions options = {});
Tensor conv2d(const Tensor& input, const Tensor& weight, Conv2dOptions options = {});

Tensor relu(const Tensor& x);
/// Exact (erf) GELU.
Tensor gelu(const Tensor& x);
Tensor exp(const Tensor& x);
/// Natural log; every element must be > 0.
Tensor log(const Tensor& x);

/// Normalizes over the last axis.
Tensor layer_norm(const Tensor& x, double epsilon = 1e-5);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double epsilon = 1e-5);

Tensor softmax(const Tensor& x, std::ptrdiff_t axis = -1);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::ptrdiff_t axis);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::ptrdiff_t axis);

/// Swaps the last two axes.
Tensor transpose(const Tensor& x);
/// General axis permutation: output axis i is input axis `axes[i]`.
Tensor permute(const Tensor& x, std::span<const std::size_t> axes);
Tensor reshape(const Tensor& x, Shape shape);
Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis);

/// Gathers rows of `table` [V, D]; output shape is index_shape + [D].
Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> indices, Shape index_shape);

/// x / max(||x||, epsilon) along `axis`.
Tensor l2_normalize(const Tensor& x, std::ptrdiff_t axis = -1, double epsilon = 1e-12);

}  // namespace synclip::autodiff::ops
