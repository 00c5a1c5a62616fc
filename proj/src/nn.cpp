// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/nn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "watermamba/parallel.hpp"

namespace wm {

ConvSpec ConvSpec::same(int64_t in, int64_t out, int k, int stride, int64_t groups, bool bias) {
    ConvSpec s;
    s.in_channels = in;
    s.out_channels = out;
    s.kernel = k;
    s.stride = stride;
    s.padding = (k - 1) / 2;
    s.groups = groups;
    s.bias = bias;
    s.validate();
    return s;
}

ConvSpec ConvSpec::depthwise(int64_t channels, int k, bool bias) {
    return same(channels, channels, k, 1, channels, bias);
}

void ConvSpec::validate() const {
    check(kernel == 1 || kernel == 3 || kernel == 5,
          "conv kernel size must be 1, 3 or 5, got " + std::to_string(kernel));
    check(stride >= 1 && padding >= 0, "conv stride/padding out of range");
    check(in_channels >= 1 && out_channels >= 1, "conv channel counts must be >= 1");
    check(groups >= 1 && in_channels % groups == 0 && out_channels % groups == 0,
          "conv channels must be divisible by groups");
}

int64_t ConvSpec::out_h(int64_t in_h) const {
    return (in_h + 2 * padding - kernel) / stride + 1;
}

int64_t ConvSpec::out_w(int64_t in_w) const {
    return (in_w + 2 * padding - kernel) / stride + 1;
}

static int64_t div_floor(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

static int64_t div_ceil(int64_t a, int64_t b) {
    return -div_floor(-a, b);
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weight, const Tensor* bias) {
    spec.validate();
    check(input.rank() == 4, "conv2d: rank-4 input required, got " + input.shape_str());
    const int64_t n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
    check(ci == spec.in_channels, "conv2d: input has " + std::to_string(ci) +
                                      " channels, spec expects " + std::to_string(spec.in_channels));
    const int64_t k = spec.kernel, cig = spec.in_channels / spec.groups;
    check(weight.rank() == 4 && weight.dim(0) == spec.out_channels && weight.dim(1) == cig &&
              weight.dim(2) == k && weight.dim(3) == k,
          "conv2d: weight shape " + weight.shape_str() + " does not match (" +
              std::to_string(spec.out_channels) + "," + std::to_string(cig) + "," +
              std::to_string(k) + "," + std::to_string(k) + ")");
    if (spec.bias) {
        check(bias != nullptr && bias->rank() == 1 && bias->dim(0) == spec.out_channels,
              "conv2d: bias of length " + std::to_string(spec.out_channels) + " required");
    }

    const int64_t ho = spec.out_h(h), wo = spec.out_w(w);
    check(ho >= 1 && wo >= 1, "conv2d: kernel larger than padded input");
    Tensor out({n, spec.out_channels, ho, wo});

    const int64_t cog = spec.out_channels / spec.groups;
    const int64_t s = spec.stride, p = spec.padding;
    const float* in_base = input.data();
    const float* w_base = weight.data();
    const float* b_base = spec.bias ? bias->data() : nullptr;
    float* out_base = out.data();

    // work unit: up to kOcBlock output channels of one group of one image,
    // accumulated together so each loaded input row feeds several fma streams
    constexpr int64_t kOcBlock = 4;
    const int64_t blocks_per_group = (cog + kOcBlock - 1) / kOcBlock;
    const int64_t units = n * spec.groups * blocks_per_group;

    parallel_for(0, units, [&](int64_t lo, int64_t hi) {
        std::vector<double> acc(static_cast<size_t>(kOcBlock * ho * wo));
        for (int64_t unit = lo; unit < hi; ++unit) {
            const int64_t img = unit / (spec.groups * blocks_per_group);
            const int64_t g = unit / blocks_per_group % spec.groups;
            const int64_t oc0 = g * cog + unit % blocks_per_group * kOcBlock;
            const int64_t bc = std::min(kOcBlock, g * cog + cog - oc0);

            for (int64_t j = 0; j < bc; ++j) {
                const double bias_v = b_base ? static_cast<double>(b_base[oc0 + j]) : 0.0;
                std::fill_n(acc.data() + j * ho * wo, ho * wo, bias_v);
            }

            // fixed (ci, kh, kw) accumulation order per output site
            for (int64_t icg = 0; icg < cig; ++icg) {
                const int64_t ic = g * cig + icg;
                const float* in_ch = in_base + (img * ci + ic) * h * w;
                for (int64_t kh = 0; kh < k; ++kh) {
                    for (int64_t kw = 0; kw < k; ++kw) {
                        double wv[kOcBlock] = {0, 0, 0, 0};
                        for (int64_t j = 0; j < bc; ++j)
                            wv[j] = w_base[(((oc0 + j) * cig + icg) * k + kh) * k + kw];
                        const int64_t x_lo = std::max<int64_t>(0, div_ceil(p - kw, s));
                        const int64_t x_hi = std::min(wo - 1, div_floor(w - 1 + p - kw, s));
                        if (x_lo > x_hi) continue;
                        for (int64_t oy = 0; oy < ho; ++oy) {
                            const int64_t iy = oy * s + kh - p;
                            if (iy < 0 || iy >= h) continue;
                            const float* row = in_ch + iy * w + (x_lo * s + kw - p);
                            double* arow = acc.data() + oy * wo + x_lo;
                            const int64_t cnt = x_hi - x_lo + 1;
                            if (bc == kOcBlock && s == 1) {
                                double* a0 = arow;
                                double* a1 = arow + ho * wo;
                                double* a2 = arow + 2 * ho * wo;
                                double* a3 = arow + 3 * ho * wo;
                                const double w0 = wv[0], w1 = wv[1], w2 = wv[2], w3 = wv[3];
                                for (int64_t i = 0; i < cnt; ++i) {
                                    const double v = row[i];
                                    a0[i] += w0 * v;
                                    a1[i] += w1 * v;
                                    a2[i] += w2 * v;
                                    a3[i] += w3 * v;
                                }
                            } else {
                                for (int64_t j = 0; j < bc; ++j) {
                                    double* aj = arow + j * ho * wo;
                                    const double wj = wv[j];
                                    for (int64_t i = 0; i < cnt; ++i) aj[i] += wj * row[i * s];
                                }
                            }
                        }
                    }
                }
            }
            for (int64_t j = 0; j < bc; ++j) {
                float* dst = out_base + (img * spec.out_channels + oc0 + j) * ho * wo;
                const double* src = acc.data() + j * ho * wo;
                for (int64_t i = 0; i < ho * wo; ++i) dst[i] = static_cast<float>(src[i]);
            }
        }
    });
    return out;
}

Tensor activation(const Tensor& input, Act kind) {
    Tensor out = input;
    float* p = out.data();
    const int64_t total = out.numel();
    switch (kind) {
        case Act::silu:
            for (int64_t i = 0; i < total; ++i) {
                const double x = p[i];
                p[i] = static_cast<float>(x / (1.0 + std::exp(-x)));
            }
            break;
        case Act::relu:
            for (int64_t i = 0; i < total; ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
            break;
        case Act::sigmoid:
            for (int64_t i = 0; i < total; ++i) {
                p[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(p[i]))));
            }
            break;
    }
    return out;
}

Tensor silu(const Tensor& input) { return activation(input, Act::silu); }
Tensor relu(const Tensor& input) { return activation(input, Act::relu); }
Tensor sigmoid(const Tensor& input) { return activation(input, Act::sigmoid); }

Tensor softmax(const Tensor& input, Axis axis) {
    check(input.rank() == 4, "softmax: rank-4 input required");
    const int ax = static_cast<int>(axis);
    const int64_t extent = input.dim(ax);
    int64_t stride = 1;
    for (int i = ax + 1; i < 4; ++i) stride *= input.dim(i);
    const int64_t outer = input.numel() / (extent * stride);

    Tensor out = input;
    float* base = out.data();
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t i = 0; i < stride; ++i) {
            float* slice = base + o * extent * stride + i;
            double mx = slice[0];
            for (int64_t e = 1; e < extent; ++e) mx = std::max(mx, static_cast<double>(slice[e * stride]));
            double sum = 0.0;
            for (int64_t e = 0; e < extent; ++e) {
                const double v = std::exp(static_cast<double>(slice[e * stride]) - mx);
                slice[e * stride] = static_cast<float>(v);
                sum += v;
            }
            for (int64_t e = 0; e < extent; ++e)
                slice[e * stride] = static_cast<float>(slice[e * stride] / sum);
        }
    }
    return out;
}

Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta) {
    check(input.rank() == 4, "layer_norm: rank-4 input required");
    const int64_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    check(gamma.numel() == c && beta.numel() == c,
          "layer_norm: gamma/beta length must equal channel count " + std::to_string(c));
    Tensor out = input;
    const float* g = gamma.data();
    const float* b = beta.data();
    float* base = out.data();
    parallel_for(0, n * hw, [&](int64_t lo, int64_t hi) {
        for (int64_t site = lo; site < hi; ++site) {
            const int64_t img = site / hw, pix = site % hw;
            float* p = base + img * c * hw + pix;
            double mean = 0.0;
            for (int64_t ch = 0; ch < c; ++ch) mean += p[ch * hw];
            mean /= static_cast<double>(c);
            double var = 0.0;
            for (int64_t ch = 0; ch < c; ++ch) {
                const double d = p[ch * hw] - mean;
                var += d * d;
            }
            var /= static_cast<double>(c);
            const double inv = 1.0 / std::sqrt(var + kNormEps);
            for (int64_t ch = 0; ch < c; ++ch) {
                p[ch * hw] = static_cast<float>((p[ch * hw] - mean) * inv * g[ch] + b[ch]);
            }
        }
    });
    return out;
}

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  const Tensor& running_mean, const Tensor& running_var) {
    check(input.rank() == 4, "batch_norm: rank-4 input required");
    const int64_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    check(gamma.numel() == c && beta.numel() == c && running_mean.numel() == c &&
              running_var.numel() == c,
          "batch_norm: parameter length must equal channel count " + std::to_string(c));
    Tensor out = input;
    float* base = out.data();
    for (int64_t ch = 0; ch < c; ++ch) {
        const double scale = gamma[ch] / std::sqrt(static_cast<double>(running_var[ch]) + kNormEps);
        const double shift = beta[ch] - running_mean[ch] * scale;
        for (int64_t img = 0; img < n; ++img) {
            float* p = base + (img * c + ch) * hw;
            for (int64_t i = 0; i < hw; ++i) p[i] = static_cast<float>(p[i] * scale + shift);
        }
    }
    return out;
}

Tensor pool_mean(const Tensor& input, Axis axis) {
    check(input.rank() == 4, "pool_mean: rank-4 input required");
    check(axis == Axis::height || axis == Axis::width, "pool_mean: height or width axis only");
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (axis == Axis::height) {
        Tensor out({n, c, 1, w});
        for (int64_t img = 0; img < n; ++img)
            for (int64_t ch = 0; ch < c; ++ch)
                for (int64_t x = 0; x < w; ++x) {
                    double sum = 0.0;
                    for (int64_t y = 0; y < h; ++y) sum += input.at4(img, ch, y, x);
                    out.at4(img, ch, 0, x) = static_cast<float>(sum / static_cast<double>(h));
                }
        return out;
    }
    Tensor out({n, c, h, 1});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < h; ++y) {
                double sum = 0.0;
                for (int64_t x = 0; x < w; ++x) sum += input.at4(img, ch, y, x);
                out.at4(img, ch, y, 0) = static_cast<float>(sum / static_cast<double>(w));
            }
    return out;
}

Tensor resize_bilinear(const Tensor& input, int64_t out_h, int64_t out_w) {
    check(input.rank() == 4, "resize_bilinear: rank-4 input required");
    check(out_h >= 1 && out_w >= 1, "resize_bilinear: target extents must be >= 1");
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (out_h == h && out_w == w) return input;

    // half-pixel source coordinate, clamped
    auto src_coord = [](int64_t dst, int64_t in_sz, int64_t out_sz) {
        const double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(in_sz) /
                             static_cast<double>(out_sz) -
                         0.5;
        return std::min(std::max(s, 0.0), static_cast<double>(in_sz - 1));
    };

    Tensor out({n, c, out_h, out_w});
    std::vector<int64_t> x0(static_cast<size_t>(out_w)), x1(static_cast<size_t>(out_w));
    std::vector<double> xf(static_cast<size_t>(out_w));
    for (int64_t x = 0; x < out_w; ++x) {
        const double s = src_coord(x, w, out_w);
        x0[static_cast<size_t>(x)] = static_cast<int64_t>(std::floor(s));
        x1[static_cast<size_t>(x)] = std::min(x0[static_cast<size_t>(x)] + 1, w - 1);
        xf[static_cast<size_t>(x)] = s - std::floor(s);
    }
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < out_h; ++y) {
                const double sy = src_coord(y, h, out_h);
                const int64_t y0 = static_cast<int64_t>(std::floor(sy));
                const int64_t y1 = std::min(y0 + 1, h - 1);
                const double fy = sy - std::floor(sy);
                for (int64_t x = 0; x < out_w; ++x) {
                    const size_t xi = static_cast<size_t>(x);
                    const double top = input.at4(img, ch, y0, x0[xi]) * (1.0 - xf[xi]) +
                                       input.at4(img, ch, y0, x1[xi]) * xf[xi];
                    const double bot = input.at4(img, ch, y1, x0[xi]) * (1.0 - xf[xi]) +
                                       input.at4(img, ch, y1, x1[xi]) * xf[xi];
                    out.at4(img, ch, y, x) = static_cast<float>(top * (1.0 - fy) + bot * fy);
                }
            }
    return out;
}

Tensor pixel_shuffle(const Tensor& input, int factor) {
    check(input.rank() == 4, "pixel_shuffle: rank-4 input required");
    check(factor >= 1, "pixel_shuffle: factor must be >= 1");
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t r = factor, r2 = r * r;
    check(c % r2 == 0, "pixel_shuffle: channels " + std::to_string(c) +
                           " not divisible by factor^2 = " + std::to_string(r2));
    const int64_t co = c / r2;
    Tensor out({n, co, h * r, w * r});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t oc = 0; oc < co; ++oc)
            for (int64_t dy = 0; dy < r; ++dy)
                for (int64_t dx = 0; dx < r; ++dx) {
                    const int64_t ic = oc * r2 + dy * r + dx;
                    for (int64_t y = 0; y < h; ++y)
                        for (int64_t x = 0; x < w; ++x)
                            out.at4(img, oc, y * r + dy, x * r + dx) = input.at4(img, ic, y, x);
                }
    return out;
}

Tensor pixel_unshuffle(const Tensor& input, int factor) {
    check(input.rank() == 4, "pixel_unshuffle: rank-4 input required");
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t r = factor;
    check(h % r == 0 && w % r == 0, "pixel_unshuffle: spatial extents not divisible by factor");
    Tensor out({n, c * r * r, h / r, w / r});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ic = 0; ic < c; ++ic)
            for (int64_t dy = 0; dy < r; ++dy)
                for (int64_t dx = 0; dx < r; ++dx) {
                    const int64_t oc = ic * r * r + dy * r + dx;
                    for (int64_t y = 0; y < h / r; ++y)
                        for (int64_t x = 0; x < w / r; ++x)
                            out.at4(img, oc, y, x) = input.at4(img, ic, y * r + dy, x * r + dx);
                }
    return out;
}

static int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    const int64_t period = 2 * (n - 1);
    i %= period;
    return i < n ? i : period - i;
}

Tensor reflect_pad_to(const Tensor& input, int64_t out_h, int64_t out_w) {
    check(input.rank() == 4, "reflect_pad_to: rank-4 input required");
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    check(out_h >= h && out_w >= w, "reflect_pad_to: target smaller than input");
    if (out_h == h && out_w == w) return input;
    Tensor out({n, c, out_h, out_w});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < out_h; ++y) {
                const int64_t sy = reflect_index(y, h);
                for (int64_t x = 0; x < out_w; ++x)
                    out.at4(img, ch, y, x) = input.at4(img, ch, sy, reflect_index(x, w));
            }
    return out;
}

Tensor crop_to(const Tensor& input, int64_t out_h, int64_t out_w) {
    check(input.rank() == 4, "crop_to: rank-4 input required");
    const int64_t n = input.dim(0), c = input.dim(1);
    check(out_h <= input.dim(2) && out_w <= input.dim(3), "crop_to: target larger than input");
    if (out_h == input.dim(2) && out_w == input.dim(3)) return input;
    Tensor out({n, c, out_h, out_w});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < out_h; ++y)
                for (int64_t x = 0; x < out_w; ++x)
                    out.at4(img, ch, y, x) = input.at4(img, ch, y, x);
    return out;
}

}  // namespace wm
