// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wm {

/// Dense rank-1..4 float32 tensor in (N, C, H, W) channel-major layout,
/// W fastest. The single value carrier for the whole engine.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape);
    Tensor(std::initializer_list<int64_t> shape);

    static Tensor zeros(std::vector<int64_t> shape);
    static Tensor full(std::vector<int64_t> shape, float value);

    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // rank-4 (n,c,h,w) and rank-3 (b,d,l) accessors
    float& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
        return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    float at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    float& at3(int64_t b, int64_t d, int64_t l) {
        return data_[static_cast<size_t>((b * shape_[1] + d) * shape_[2] + l)];
    }
    float at3(int64_t b, int64_t d, int64_t l) const {
        return data_[static_cast<size_t>((b * shape_[1] + d) * shape_[2] + l)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    Tensor reshaped(std::vector<int64_t> new_shape) const;

    std::string shape_str() const;

private:
    std::vector<int64_t> shape_;
    std::vector<float> data_;
};

std::string shape_str(const std::vector<int64_t>& shape);

// Elementwise arithmetic on equal-shape tensors.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
void add_inplace(Tensor& a, const Tensor& b);

// Hadamard product with broadcast over singleton H/W extents; N and C must
// match (the Eq. 15 use: (N,C,1,W) x (N,C,H,1) x (N,C,H,W)).
Tensor hadamard_broadcast(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& t);
bool bitwise_equal(const Tensor& a, const Tensor& b);
float max_abs_diff(const Tensor& a, const Tensor& b);

[[noreturn]] void fail(const std::string& msg);
inline void check(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

}  // namespace wm
