// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace wm {

void fail(const std::string& msg) {
    throw std::invalid_argument(msg);
}

static int64_t checked_numel(const std::vector<int64_t>& shape) {
    check(!shape.empty() && shape.size() <= 4, "tensor rank must be 1..4, got " + shape_str(shape));
    int64_t n = 1;
    for (int64_t d : shape) {
        check(d >= 1, "tensor extents must be >= 1, got " + shape_str(shape));
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(checked_numel(shape_)), 0.0f);
}

Tensor::Tensor(std::initializer_list<int64_t> shape) : Tensor(std::vector<int64_t>(shape)) {}

Tensor Tensor::zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
}

Tensor Tensor::reshaped(std::vector<int64_t> new_shape) const {
    check(checked_numel(new_shape) == numel(),
          "reshape " + shape_str() + " -> " + wm::shape_str(new_shape) + " changes element count");
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
}

std::string Tensor::shape_str() const {
    return wm::shape_str(shape_);
}

std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    check(a.same_shape(b), std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    const float* pb = b.data();
    float* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a;
    const float* pb = b.data();
    float* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "hadamard");
    Tensor out = a;
    const float* pb = b.data();
    float* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
    return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add_inplace");
    const float* pb = b.data();
    float* pa = a.data();
    for (int64_t i = 0; i < a.numel(); ++i) pa[i] += pb[i];
}

Tensor hadamard_broadcast(const Tensor& a, const Tensor& b) {
    check(a.rank() == 4 && b.rank() == 4, "hadamard_broadcast: rank-4 tensors required");
    check(a.dim(0) == b.dim(0) && a.dim(1) == b.dim(1),
          "hadamard_broadcast: N/C mismatch " + a.shape_str() + " vs " + b.shape_str());
    auto bcast = [](int64_t x, int64_t y) {
        check(x == y || x == 1 || y == 1, "hadamard_broadcast: incompatible extents");
        return x > y ? x : y;
    };
    const int64_t n = a.dim(0), c = a.dim(1);
    const int64_t h = bcast(a.dim(2), b.dim(2));
    const int64_t w = bcast(a.dim(3), b.dim(3));
    Tensor out({n, c, h, w});
    const int64_t ah = a.dim(2) == 1 ? 0 : 1, aw = a.dim(3) == 1 ? 0 : 1;
    const int64_t bh = b.dim(2) == 1 ? 0 : 1, bw = b.dim(3) == 1 ? 0 : 1;
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < c; ++j)
            for (int64_t y = 0; y < h; ++y)
                for (int64_t x = 0; x < w; ++x)
                    out.at4(i, j, y, x) = a.at4(i, j, y * ah, x * aw) * b.at4(i, j, y * bh, x * bw);
    return out;
}

bool all_finite(const Tensor& t) {
    const float* p = t.data();
    for (int64_t i = 0; i < t.numel(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    const float* pa = a.data();
    const float* pb = b.data();
    for (int64_t i = 0; i < a.numel(); ++i) {
        // bit compare, so that -0.0 vs 0.0 or NaN patterns are caught
        if (std::memcmp(&pa[i], &pb[i], sizeof(float)) != 0) return false;
    }
    return true;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "max_abs_diff");
    float m = 0.0f;
    const float* pa = a.data();
    const float* pb = b.data();
    for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(pa[i] - pb[i]));
    return m;
}

}  // namespace wm
