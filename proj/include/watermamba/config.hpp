// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "watermamba/blocks.hpp"

namespace wm {

enum class SkipFuse { concat, add };

/// Everything that determines the weight set. base_width 16 is calibrated so
/// the default parameter census lands on the published 3.69M figure (see
/// README, "Parameter and MAC accounting").
struct ModelConfig {
    int64_t base_width = 16;
    int64_t state_size = 16;
    int64_t expand = 2;
    MsffnFuse msffn_fuse = MsffnFuse::sum;
    SkipFuse skip_fuse = SkipFuse::concat;
    bool euler_discretization = false;  // simplified b_bar = delta*b instead of full ZOH
    bool use_soss = true;
    bool use_ccoss = true;
    bool use_msffn = true;

    /// Widths of the F1..F4 feature levels: {C, 2C, 4C, 8C}.
    std::array<int64_t, 4> level_widths() const {
        return {base_width, 2 * base_width, 4 * base_width, 8 * base_width};
    }

    void validate() const;

    /// Canonical key=value text, embedded verbatim in weight files.
    std::string canonical_text() const;
    static ModelConfig parse(const std::string& text);
    static ModelConfig load_file(const std::string& path);
};

}  // namespace wm
