// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "watermamba/network.hpp"
#include "watermamba/rng.hpp"
#include "watermamba/ssm.hpp"

namespace wm {
namespace selfcheck {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// One randomly drawn scan instance; delta is log-uniform across decades so
/// both the Taylor and the regular discretization branches are exercised.
struct ScanCase {
    Tensor u, delta, b, c;  // (B,D,L), (B,D,L), (B,N,L), (B,N,L)
    Tensor a_log, d_skip;   // (D,N), (D)
};

ScanCase random_scan_case(Rng& rng, int64_t batch, int64_t d, int64_t l, int64_t n);

using ScanFn = std::function<Tensor(const ScanInput&, const Tensor& a_log, const Tensor& d_skip,
                                    bool euler, int chunk_len)>;

/// Blocked scan vs. per-step reference over `instances` random cases with the
/// spec's length distribution; also checks chunk-length invariance and the
/// L = 1 bit-for-bit case.
std::vector<PropertyResult> scan_oracle_suite(uint64_t seed, int instances, double tol = 1e-5);

/// Constant-parameter scans vs. the unrolled convolution kernel
/// K_j = c . A_bar^j B_bar (+ d_skip at j = 0). `scan` defaults to the
/// production blocked scan; tests may inject a broken implementation.
std::vector<PropertyResult> lti_suite(uint64_t seed, int instances, double tol = 1e-4,
                                      const ScanFn& scan = {});

/// Residual identities: zeroed SOSS projection and zeroed output conv are
/// exact identities; FR - I equals the captured DR.
std::vector<PropertyResult> residual_suite(uint64_t seed);

/// Flatten/merge and coordinate concat/split round-trips on random shapes.
std::vector<PropertyResult> layout_suite(uint64_t seed, int shapes);

/// Metric invariants: PSNR closed forms, SSIM identity/symmetry, constant
/// image zeros, flip invariance.
std::vector<PropertyResult> metrics_suite(uint64_t seed);

/// Scan + stability/causality/linearity property pack (the module invariants
/// not covered by the oracle suites).
std::vector<PropertyResult> scan_property_suite(uint64_t seed, int instances);

bool all_pass(const std::vector<PropertyResult>& results);

}  // namespace selfcheck
}  // namespace wm
