// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wm {

static int g_threads = 0;

void set_thread_count(int n) {
    g_threads = n < 0 ? 0 : n;
}

int thread_count() {
    if (g_threads > 0) return g_threads;
    if (const char* env = std::getenv("WATERMAMBA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& body) {
    const int64_t n = end - begin;
    if (n <= 0) return;
    const int64_t workers = std::min<int64_t>(thread_count(), n);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    const int64_t chunk = (n + workers - 1) / workers;
    for (int64_t w = 0; w < workers; ++w) {
        const int64_t lo = begin + w * chunk;
        const int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace wm
