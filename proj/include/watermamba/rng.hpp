// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace wm {

/// Deterministic xoshiro256++ stream seeded through splitmix64.
///
/// Seeding: state[i] = splitmix64(seed), i = 0..3, where splitmix64 advances
///   z = (x += 0x9E3779B97F4A7C15)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
/// Update (xoshiro256++): result = rotl(s0 + s3, 23) + s0, then
///   t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t;
///   s3 = rotl(s3, 45)
/// Pure 64-bit integer arithmetic, so identical seeds give identical streams
/// on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_double();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    float uniform_f32(float lo, float hi);

private:
    uint64_t s_[4];
};

}  // namespace wm
