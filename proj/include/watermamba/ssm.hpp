// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "watermamba/tensor.hpp"

namespace wm {

/// Zero-order-hold discretization of one diagonal state entry:
///   a_bar = exp(delta * a)
///   b_bar = ((exp(delta * a) - 1) / a) * b = phi(delta * a) * delta * b
/// with phi(z) = (e^z - 1)/z evaluated through a Taylor branch below
/// kTaylorSwitch to avoid cancellation. Requires delta > 0 and a < 0, which
/// makes 0 < a_bar < 1.
struct Discrete {
    double a_bar;
    double b_bar;
};

constexpr double kTaylorSwitch = 1e-4;

/// Lower clamp applied where delta is produced (softplus underflows to zero
/// in float for arguments below about -745); keeps the strict positivity
/// invariant with a well-defined ZOH limit (a_bar -> 1, b_bar -> 0).
constexpr double kDeltaMin = 1e-20;

/// (e^z - 1) / z; switches to 1 + z/2 + z^2/6 for |z| < kTaylorSwitch.
double expm1_over(double z);

Discrete discretize(double delta, double a, double b, bool euler = false);

/// Per-step inputs of a selective scan: u and delta are (B, D, L), b and c
/// are (B, N, L). delta must be strictly positive.
struct ScanInput {
    const Tensor* u = nullptr;
    const Tensor* delta = nullptr;
    const Tensor* b = nullptr;
    const Tensor* c = nullptr;
};

struct ScanStats {
    uint64_t steps = 0;  // channel-steps executed
};

/// Plain per-step recurrence h_t = A_bar_t h_{t-1} + B_bar_t u_t,
/// y_t = sum_n c_t[n] h_t[n] + d_skip u_t. This is the correctness oracle
/// for the blocked scan. a_log is (D, N) storing log(-A); d_skip is (D).
Tensor selective_scan_ref(const ScanInput& in, const Tensor& a_log, const Tensor& d_skip,
                          bool euler = false, ScanStats* stats = nullptr);

/// Mathematically identical to selective_scan_ref, evaluated chunk by chunk:
/// the per-step affine maps h -> a_bar h + b_bar u of one chunk are
/// precomputed in a flat buffer, then composed onto the carry state in order
/// ((a2,b2)∘(a1,b1) = (a2 a1, a2 b1 + b2)). Output is bit-identical for any
/// chunk_len.
Tensor selective_scan_fast(const ScanInput& in, const Tensor& a_log, const Tensor& d_skip,
                           bool euler = false, int chunk_len = 64);

/// Weights of one selective (S6) scan unit over D inner channels.
/// in_proj is (1 + 2N, D): row 0 feeds the scalar-rank delta bottleneck,
/// rows 1..N produce per-step b, rows N+1..2N produce per-step c.
struct S6Weights {
    Tensor a_log;      // (D, N)
    Tensor d_skip;     // (D)
    Tensor in_proj;    // (1 + 2N, D)
    Tensor dt_weight;  // (D)
    Tensor dt_bias;    // (D)
};

struct SsmOptions {
    bool euler = false;  // simplified b_bar = delta * b instead of full ZOH
    int chunk_len = 64;
};

/// Input-dependent scan layer: delta = softplus(dt_weight * (row0 . x) +
/// dt_bias), b/c from the remaining in_proj rows, then selective_scan_fast.
/// Shape-preserving on (B, D, L).
Tensor s6_layer(const Tensor& x, const S6Weights& w, const SsmOptions& opt);

/// Channel-axis scan units: sequences are (B, 1, L) where L is the channel
/// count of the pooled map. cbssm is reversal around a forward scan with its
/// own weights: reverse(s6(reverse(x))).
Tensor cfssm(const Tensor& seq, const S6Weights& w, const SsmOptions& opt);
Tensor cbssm(const Tensor& seq, const S6Weights& w, const SsmOptions& opt);

double softplus(double x);

}  // namespace wm
