// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>

#include "watermamba/nn.hpp"
#include "watermamba/ssm.hpp"
#include "watermamba/tensor.hpp"

namespace wm {

enum class MsffnFuse { sum, concat_proj };

/// Spatial omnidirectional scan block: two expanded branches, the gated
/// four-direction 2D scan on the first, Hadamard fusion, projection back to
/// the input width, plus the residual.
struct SossWeights {
    Tensor in1_w, in1_b;  // (D, C, 1, 1), (D) with D = expand * C
    Tensor in2_w, in2_b;
    Tensor dw_w, dw_b;  // depth-wise 3x3 on D
    std::array<S6Weights, 4> scans;
    Tensor norm_gamma, norm_beta;  // (D)
    Tensor out_w, out_b;           // (C, D, 1, 1), (C)
};

Tensor soss_forward(const Tensor& x, const SossWeights& w, const SsmOptions& opt);

/// Channel coordinate scan block: per-axis pooled maps, shared conv+BN+ReLU
/// trunk, forward/backward channel scans on each axis, sigmoid attention
/// masks, softmax-modulated Hadamard gate, plus the residual.
struct CcossWeights {
    Tensor conv_w, conv_b;                    // 1x1, C -> C
    Tensor bn_gamma, bn_beta, bn_mean, bn_var;  // (C)
    S6Weights h_fwd, h_bwd;                   // scans over the height-pooled map
    S6Weights w_fwd, w_bwd;                   // scans over the width-pooled map
    Tensor dw_w, dw_b;                        // depth-wise 1x1 on C
};

Tensor ccoss_forward(const Tensor& y, const CcossWeights& w, const SsmOptions& opt);

struct MsffnBranch {
    Tensor conv1_w, conv1_b;  // k x k dense, C -> C
    Tensor dw1_w, dw1_b;      // k x k depth-wise
    Tensor conv2_w, conv2_b;
    Tensor dw2_w, dw2_b;
};

/// Multi-scale feedforward: shared LayerNorm, then 1/3/5 branches of
/// conv -> depthwise -> ReLU -> conv -> depthwise, fused by sum (or by
/// concat + 1x1 projection when configured).
struct MsffnWeights {
    Tensor norm_gamma, norm_beta;
    MsffnBranch b1, b3, b5;
    Tensor fuse_w, fuse_b;  // only for MsffnFuse::concat_proj, (C, 3C, 1, 1)
};

Tensor msffn_forward(const Tensor& z, const MsffnWeights& w, MsffnFuse fuse);

/// One SCOSS block. Absent sub-blocks (ablation variants) act as identity
/// stages.
struct ScossWeights {
    std::optional<SossWeights> soss;
    std::optional<CcossWeights> ccoss;
    std::optional<MsffnWeights> msffn;
};

/// z = ccoss(soss(x)) + x; out = msffn(z) + z.
Tensor scoss_forward(const Tensor& x, const ScossWeights& w, const SsmOptions& opt,
                     MsffnFuse fuse);

}  // namespace wm
