// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "watermamba/tensor.hpp"

namespace wm {

/// 2D convolution geometry. "Same" spatial size at stride 1 means
/// padding = (k - 1) / 2, which same() fills in.
struct ConvSpec {
    int64_t in_channels = 0;
    int64_t out_channels = 0;
    int kernel = 3;
    int stride = 1;
    int padding = 1;
    int64_t groups = 1;
    bool bias = true;

    static ConvSpec same(int64_t in, int64_t out, int k, int stride = 1, int64_t groups = 1,
                         bool bias = true);
    static ConvSpec depthwise(int64_t channels, int k, bool bias = true);
    void validate() const;
    int64_t out_h(int64_t in_h) const;
    int64_t out_w(int64_t in_w) const;
};

/// Cross-correlation (no kernel flip) with zero padding; accumulates in
/// 64-bit per output site in fixed (ci, kh, kw) order.
Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weight,
              const Tensor* bias = nullptr);

enum class Act { silu, relu, sigmoid };

Tensor activation(const Tensor& input, Act kind);
Tensor silu(const Tensor& input);
Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

enum class Axis { batch = 0, channel = 1, height = 2, width = 3 };

/// Max-subtracted softmax along one axis of a rank-4 tensor.
Tensor softmax(const Tensor& input, Axis axis);

/// Per-site normalization over the channel axis, epsilon 1e-5, population
/// variance, then the gamma/beta affine.
Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta);

/// Inference-mode BatchNorm against stored running statistics.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  const Tensor& running_mean, const Tensor& running_var);

/// Mean-pool one spatial axis down to extent 1: (N,C,H,W) -> (N,C,1,W) for
/// Axis::height, (N,C,H,1) for Axis::width.
Tensor pool_mean(const Tensor& input, Axis axis);

/// Bilinear resize with the half-pixel (align-corners-false) convention:
///   src = (dst + 0.5) * in/out - 0.5, clamped to [0, in-1],
/// then the usual two-tap lerp along each axis.
Tensor resize_bilinear(const Tensor& input, int64_t out_h, int64_t out_w);

/// (N, C*r^2, H, W) -> (N, C, r*H, r*W) with
///   out[n][c][h*r+dy][w*r+dx] = in[n][c*r^2 + dy*r + dx][h][w].
Tensor pixel_shuffle(const Tensor& input, int factor);

/// Exact inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& input, int factor);

/// Reflect-pad (edge not repeated) on the right/bottom to reach the target
/// spatial size; used by the CLI pad-to-multiple-of-8 policy.
Tensor reflect_pad_to(const Tensor& input, int64_t out_h, int64_t out_w);

Tensor crop_to(const Tensor& input, int64_t out_h, int64_t out_w);

constexpr double kNormEps = 1e-5;

}  // namespace wm
