// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace wm {

// Worker count used by parallel_for. 0 means "resolve from the
// WATERMAMBA_THREADS env var, else hardware_concurrency".
void set_thread_count(int n);
int thread_count();

/// Splits [begin, end) into contiguous ranges, one per worker. Each index is
/// processed by exactly one worker and every per-index computation keeps its
/// own sequential reduction order, so results are bit-identical for any
/// worker count.
void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& body);

}  // namespace wm
