// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <utility>

#include "watermamba/tensor.hpp"

namespace wm {

/// The four corner-to-corner traversal orders. Each is a bijection between
/// (h, w) sites and sequence index i on an H x W map:
///   tl_br: i = h*W + w                 (row-major, top-left start)
///   br_tl: i = H*W - 1 - (h*W + w)     (reverse of tl_br)
///   tr_bl: i = (W-1-w)*H + h           (column-major from the top-right)
///   bl_tr: i = H*W - 1 - ((W-1-w)*H+h) (reverse of tr_bl)
enum class ScanDirection { tl_br = 0, br_tl = 1, tr_bl = 2, bl_tr = 3 };

constexpr int kNumDirections = 4;

int64_t scan_index(ScanDirection dir, int64_t h, int64_t w, int64_t height, int64_t width);

/// (N,C,H,W) -> (N,C,H*W) sequence in the direction's traversal order.
Tensor flatten_direction(const Tensor& feature, ScanDirection dir);

std::array<Tensor, 4> flatten_directions(const Tensor& feature);

/// Inverse permutation of flatten_direction.
Tensor unflatten_direction(const Tensor& seq, ScanDirection dir, int64_t height, int64_t width);

/// Un-permutes each scanned sequence back to 2D and sums the four maps.
Tensor merge_directions(const std::array<Tensor, 4>& seqs, int64_t height, int64_t width);

/// Concat of the two pooled coordinate maps along the long axis:
/// (N,C,1,W) + (N,C,H,1) -> (N,C,1,W+H); the width-pooled map is transposed
/// to (N,C,1,H) first and placed after the height-pooled part.
Tensor coordinate_concat(const Tensor& y_h, const Tensor& y_w);

/// Exact inverse of coordinate_concat given the original H and W.
std::pair<Tensor, Tensor> coordinate_split(const Tensor& y1, int64_t height, int64_t width);

}  // namespace wm
