// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "watermamba/census.hpp"
#include "watermamba/config.hpp"
#include "watermamba/weights.hpp"

namespace wm {

/// Seeded deterministic store with every tensor the config requires:
/// conv/linear weights uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero,
/// scan A ramps and delta biases per the scan unit conventions.
WeightStore init_weights(const ModelConfig& config, uint64_t seed);

/// Immutable inference model: shallow conv, three encoder stages, bottleneck,
/// three decoder stages with skips, refinement, output conv, global residual.
struct Model {
    ModelConfig config;
    SsmOptions ssm;

    Tensor stem_w, stem_b;
    struct Enc {
        Tensor down_w, down_b;
        ScossWeights block;
    };
    std::array<Enc, 3> enc;
    ScossWeights bottleneck;
    struct Dec {
        Tensor up_w, up_b;
        Tensor fuse_w, fuse_b;  // concat skip fusion only
        ScossWeights block;
    };
    std::array<Dec, 3> dec;
    ScossWeights refine;
    Tensor head_w, head_b;
};

/// Validates the store against the config (every required tensor present with
/// the exact shape, no extras) and assembles the model.
Model build(const ModelConfig& config, const WeightStore& store);

/// (N,3,H,W) -> (N,3,H,W), H and W divisible by 8. Output is DR + input;
/// dr_capture, when given, receives the DR intermediate.
Tensor forward(const Model& model, const Tensor& image, Tensor* dr_capture = nullptr);

}  // namespace wm
