// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/scan_layout.hpp"

namespace wm {

int64_t scan_index(ScanDirection dir, int64_t h, int64_t w, int64_t height, int64_t width) {
    switch (dir) {
        case ScanDirection::tl_br:
            return h * width + w;
        case ScanDirection::br_tl:
            return height * width - 1 - (h * width + w);
        case ScanDirection::tr_bl:
            return (width - 1 - w) * height + h;
        case ScanDirection::bl_tr:
            return height * width - 1 - ((width - 1 - w) * height + h);
    }
    return 0;
}

Tensor flatten_direction(const Tensor& feature, ScanDirection dir) {
    check(feature.rank() == 4, "flatten_direction: rank-4 input required");
    const int64_t n = feature.dim(0), c = feature.dim(1), h = feature.dim(2), w = feature.dim(3);
    Tensor seq({n, c, h * w});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            const float* src = feature.data() + (img * c + ch) * h * w;
            float* dst = seq.data() + (img * c + ch) * h * w;
            for (int64_t y = 0; y < h; ++y)
                for (int64_t x = 0; x < w; ++x) dst[scan_index(dir, y, x, h, w)] = src[y * w + x];
        }
    return seq;
}

std::array<Tensor, 4> flatten_directions(const Tensor& feature) {
    return {flatten_direction(feature, ScanDirection::tl_br),
            flatten_direction(feature, ScanDirection::br_tl),
            flatten_direction(feature, ScanDirection::tr_bl),
            flatten_direction(feature, ScanDirection::bl_tr)};
}

Tensor unflatten_direction(const Tensor& seq, ScanDirection dir, int64_t height, int64_t width) {
    check(seq.rank() == 3, "unflatten_direction: rank-3 sequence required");
    check(seq.dim(2) == height * width,
          "unflatten_direction: sequence length " + std::to_string(seq.dim(2)) +
              " != H*W = " + std::to_string(height * width));
    const int64_t n = seq.dim(0), c = seq.dim(1);
    Tensor out({n, c, height, width});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            const float* src = seq.data() + (img * c + ch) * height * width;
            float* dst = out.data() + (img * c + ch) * height * width;
            for (int64_t y = 0; y < height; ++y)
                for (int64_t x = 0; x < width; ++x)
                    dst[y * width + x] = src[scan_index(dir, y, x, height, width)];
        }
    return out;
}

Tensor merge_directions(const std::array<Tensor, 4>& seqs, int64_t height, int64_t width) {
    for (int d = 1; d < kNumDirections; ++d)
        check(seqs[static_cast<size_t>(d)].same_shape(seqs[0]),
              "merge_directions: sequence shape mismatch");
    Tensor out = unflatten_direction(seqs[0], ScanDirection::tl_br, height, width);
    for (int d = 1; d < kNumDirections; ++d)
        add_inplace(out, unflatten_direction(seqs[static_cast<size_t>(d)],
                                             static_cast<ScanDirection>(d), height, width));
    return out;
}

Tensor coordinate_concat(const Tensor& y_h, const Tensor& y_w) {
    check(y_h.rank() == 4 && y_w.rank() == 4, "coordinate_concat: rank-4 inputs required");
    check(y_h.dim(2) == 1, "coordinate_concat: height-pooled map must be (N,C,1,W)");
    check(y_w.dim(3) == 1, "coordinate_concat: width-pooled map must be (N,C,H,1)");
    const int64_t n = y_h.dim(0), c = y_h.dim(1), w = y_h.dim(3), h = y_w.dim(2);
    check(y_w.dim(0) == n && y_w.dim(1) == c, "coordinate_concat: N/C mismatch");
    Tensor out({n, c, 1, w + h});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            for (int64_t x = 0; x < w; ++x) out.at4(img, ch, 0, x) = y_h.at4(img, ch, 0, x);
            for (int64_t y = 0; y < h; ++y) out.at4(img, ch, 0, w + y) = y_w.at4(img, ch, y, 0);
        }
    return out;
}

std::pair<Tensor, Tensor> coordinate_split(const Tensor& y1, int64_t height, int64_t width) {
    check(y1.rank() == 4 && y1.dim(2) == 1, "coordinate_split: (N,C,1,W+H) input required");
    check(height >= 1 && width >= 1, "coordinate_split: extents must be >= 1");
    check(y1.dim(3) == width + height,
          "coordinate_split: long axis " + std::to_string(y1.dim(3)) + " != W+H = " +
              std::to_string(width + height));
    const int64_t n = y1.dim(0), c = y1.dim(1);
    Tensor y_h({n, c, 1, width});
    Tensor y_w({n, c, height, 1});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            for (int64_t x = 0; x < width; ++x) y_h.at4(img, ch, 0, x) = y1.at4(img, ch, 0, x);
            for (int64_t y = 0; y < height; ++y) y_w.at4(img, ch, y, 0) = y1.at4(img, ch, 0, width + y);
        }
    return {y_h, y_w};
}

}  // namespace wm
