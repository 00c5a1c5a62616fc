// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "watermamba/tensor.hpp"

namespace wm {

/// 8-bit RGB image, interleaved, row-major.
struct Image {
    int64_t width = 0;
    int64_t height = 0;
    std::vector<uint8_t> rgb;  // 3 * width * height
};

/// Reads PNG (any 8/16-bit colour type, converted to 8-bit RGB) or binary
/// PPM (P6, maxval 255). Dispatches on file content, not extension.
Image load_image(const std::string& path);

/// Writes by extension: .png (8-bit RGB) or .ppm (P6).
void save_image(const std::string& path, const Image& img);

Image load_png(const std::string& path);
void save_png(const std::string& path, const Image& img);
Image load_ppm(const std::string& path);
void save_ppm(const std::string& path, const Image& img);

/// v / 255 into a (1,3,H,W) float tensor.
Tensor image_to_tensor(const Image& img);

/// round(v * 255), clamped to [0, 255].
Image tensor_to_image(const Tensor& t);

}  // namespace wm
