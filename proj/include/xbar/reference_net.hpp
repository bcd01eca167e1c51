#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xbar/network.hpp"
#include "xbar/tensor.hpp"

// Digital float64 reference for every layer. Analog results are checked
// against these functions.
namespace xbar::ref {

/// input (C_in, H, W), kernel (C_out, C_in, F_r, F_c), bias empty or C_out.
/// Zero padding.
Tensor conv2d(const Tensor& input, const Tensor& kernel, std::span<const double> bias, std::size_t stride,
              std::size_t padding);

/// input (C, H, W), kernel (C, F_r, F_c); no cross-channel sum.
Tensor depthwise_conv(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding);

/// y = (x - mean) / sqrt(var + eps) * gamma + beta per channel. Channel axis is
/// dim 0 for rank-3 input, the only axis for rank-1 input.
Tensor batchnorm(const Tensor& x, const BatchNormWeights& p);

double relu(double x);
double hard_sigmoid(double x);
double hard_swish(double x);
double activation(double x, Activation kind);
Tensor activation(const Tensor& x, Activation kind);

/// (C, H, W) -> (C); rank-1 input is treated as (L, 1, 1).
Tensor gap(const Tensor& input);

/// y = W x + b with x flattened.
Tensor fc(const Tensor& x, const Tensor& weight, std::span<const double> bias);

/// s = hard_sigmoid(fc2(relu(fc1(gap(x))))); channel c scaled by s_c.
Tensor se_block(const Tensor& input, const FcWeights& fc1, const FcWeights& fc2);

/// Whole network; returns the flattened final tensor (class scores).
Tensor forward(const BoundNetwork& net, const Tensor& image);

/// Lowest index wins ties.
std::size_t argmax(std::span<const double> scores);

}  // namespace xbar::ref
