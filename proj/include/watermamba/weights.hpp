// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "watermamba/tensor.hpp"

namespace wm {

class WeightsError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, bad_version, truncated, bad_checksum, bad_layout };
    WeightsError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

/// Ordered name -> tensor container plus the canonical config text snapshot.
/// Iteration order is insertion order and defines the on-disk tensor order.
class WeightStore {
public:
    void put(const std::string& name, Tensor t);
    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    const Tensor* find(const std::string& name) const;
    const Tensor& get(const std::string& name) const;  // throws naming the absentee
    Tensor& get_mutable(const std::string& name);

    size_t size() const { return items_.size(); }
    int64_t total_values() const;
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }

    const std::string& config_text() const { return config_text_; }
    void set_config_text(std::string text) { config_text_ = std::move(text); }

private:
    std::vector<std::pair<std::string, Tensor>> items_;
    std::unordered_map<std::string, size_t> index_;
    std::string config_text_;
};

/// Binary format (little-endian):
///   "WMBA" | u32 version=1 | u32 config length | config text |
///   u32 tensor count | per tensor: u16 name length, name, u8 dtype (0=f32),
///   u8 rank, u64 dims[rank], raw f32 values | u32 CRC32 of everything prior.
void save_weights(const WeightStore& store, const std::string& path);
WeightStore load_weights(const std::string& path);

// In-memory codecs (the file functions wrap these; handy for tests).
std::string encode_weights(const WeightStore& store);
WeightStore decode_weights(const std::string& bytes);

constexpr uint32_t kWeightsVersion = 1;

}  // namespace wm
