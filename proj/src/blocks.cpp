// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/blocks.hpp"

#include "watermamba/scan_layout.hpp"

namespace wm {

static Tensor conv1x1(const Tensor& x, const Tensor& w, const Tensor& b) {
    return conv2d(x, ConvSpec::same(w.dim(1), w.dim(0), 1), w, &b);
}

Tensor soss_forward(const Tensor& x, const SossWeights& w, const SsmOptions& opt) {
    check(x.rank() == 4, "soss: rank-4 input required");
    const int64_t c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    check(w.in1_w.dim(1) == c, "soss: weights expect " + std::to_string(w.in1_w.dim(1)) +
                                   " channels, input has " + std::to_string(c));
    const int64_t d = w.in1_w.dim(0);

    // branch 1: expand, depth-wise conv, SiLU, 2D scan, LayerNorm
    Tensor x1 = conv1x1(x, w.in1_w, w.in1_b);
    x1 = conv2d(x1, ConvSpec::depthwise(d, 3), w.dw_w, &w.dw_b);
    x1 = silu(x1);

    // scan the four traversal orders and merge as-you-go to bound memory
    Tensor merged;
    for (int dir = 0; dir < kNumDirections; ++dir) {
        Tensor seq = flatten_direction(x1, static_cast<ScanDirection>(dir));
        seq = s6_layer(seq, w.scans[static_cast<size_t>(dir)], opt);
        Tensor map = unflatten_direction(seq, static_cast<ScanDirection>(dir), h, wd);
        if (dir == 0)
            merged = std::move(map);
        else
            add_inplace(merged, map);
    }
    merged = layer_norm(merged, w.norm_gamma, w.norm_beta);

    // branch 2: expand + SiLU gate
    Tensor x2 = silu(conv1x1(x, w.in2_w, w.in2_b));

    Tensor fused = hadamard(merged, x2);
    Tensor out = conv1x1(fused, w.out_w, w.out_b);
    add_inplace(out, x);
    return out;
}

// pooled map (N,C,1,W) or (N,C,H,1) -> channel-axis sequences (N*S, 1, C)
static Tensor to_channel_sequences(const Tensor& pooled) {
    const int64_t n = pooled.dim(0), c = pooled.dim(1);
    const int64_t s = pooled.dim(2) * pooled.dim(3);
    Tensor seq({n * s, 1, c});
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            const float* src = pooled.data() + (img * c + ch) * s;
            for (int64_t i = 0; i < s; ++i) seq.at3(img * s + i, 0, ch) = src[i];
        }
    return seq;
}

static Tensor from_channel_sequences(const Tensor& seq, const std::vector<int64_t>& shape) {
    const int64_t n = shape[0], c = shape[1], s = shape[2] * shape[3];
    Tensor pooled(shape);
    for (int64_t img = 0; img < n; ++img)
        for (int64_t ch = 0; ch < c; ++ch) {
            float* dst = pooled.data() + (img * c + ch) * s;
            for (int64_t i = 0; i < s; ++i) dst[i] = seq.at3(img * s + i, 0, ch);
        }
    return pooled;
}

// Eq. 13/14 shape: sigmoid(cfssm(y1) .* silu(y1) + cbssm(y1) .* silu(y1))
static Tensor channel_attention(const Tensor& pooled, const S6Weights& fwd, const S6Weights& bwd,
                                const SsmOptions& opt) {
    Tensor seq = to_channel_sequences(pooled);
    Tensor gate = silu(seq);
    Tensor f = hadamard(cfssm(seq, fwd, opt), gate);
    Tensor b = hadamard(cbssm(seq, bwd, opt), gate);
    add_inplace(f, b);
    return sigmoid(from_channel_sequences(f, pooled.shape()));
}

Tensor ccoss_forward(const Tensor& y, const CcossWeights& w, const SsmOptions& opt) {
    check(y.rank() == 4, "ccoss: rank-4 input required");
    const int64_t h = y.dim(2), wd = y.dim(3);
    check(w.conv_w.dim(1) == y.dim(1), "ccoss: weights expect " + std::to_string(w.conv_w.dim(1)) +
                                           " channels, input has " + std::to_string(y.dim(1)));

    Tensor y_h = pool_mean(y, Axis::height);  // (N,C,1,W)
    Tensor y_w = pool_mean(y, Axis::width);   // (N,C,H,1)

    Tensor y1 = coordinate_concat(y_h, y_w);
    y1 = conv1x1(y1, w.conv_w, w.conv_b);
    y1 = batch_norm(y1, w.bn_gamma, w.bn_beta, w.bn_mean, w.bn_var);
    y1 = relu(y1);
    auto [y_h1, y_w1] = coordinate_split(y1, h, wd);

    Tensor y_h2 = channel_attention(y_h1, w.h_fwd, w.h_bwd, opt);  // (N,C,1,W)
    Tensor y_w2 = channel_attention(y_w1, w.w_fwd, w.w_bwd, opt);  // (N,C,H,1)

    Tensor mod = conv2d(y, ConvSpec::depthwise(y.dim(1), 1), w.dw_w, &w.dw_b);
    mod = softmax(mod, Axis::channel);

    Tensor out = hadamard_broadcast(y_h2, y_w2);
    out = hadamard_broadcast(out, y);
    out = hadamard(out, mod);
    add_inplace(out, y);
    return out;
}

static Tensor msffn_branch(const Tensor& s, const MsffnBranch& b, int k) {
    const int64_t c = s.dim(1);
    Tensor t = conv2d(s, ConvSpec::same(c, c, k), b.conv1_w, &b.conv1_b);
    t = conv2d(t, ConvSpec::depthwise(c, k), b.dw1_w, &b.dw1_b);
    t = relu(t);
    t = conv2d(t, ConvSpec::same(c, c, k), b.conv2_w, &b.conv2_b);
    t = conv2d(t, ConvSpec::depthwise(c, k), b.dw2_w, &b.dw2_b);
    return t;
}

static Tensor concat_channels(const Tensor& a, const Tensor& b, const Tensor& c) {
    const int64_t n = a.dim(0), ch = a.dim(1), hw = a.dim(2) * a.dim(3);
    Tensor out({n, 3 * ch, a.dim(2), a.dim(3)});
    for (int64_t img = 0; img < n; ++img) {
        float* dst = out.data() + img * 3 * ch * hw;
        const float* pa = a.data() + img * ch * hw;
        const float* pb = b.data() + img * ch * hw;
        const float* pc = c.data() + img * ch * hw;
        for (int64_t i = 0; i < ch * hw; ++i) dst[i] = pa[i];
        for (int64_t i = 0; i < ch * hw; ++i) dst[ch * hw + i] = pb[i];
        for (int64_t i = 0; i < ch * hw; ++i) dst[2 * ch * hw + i] = pc[i];
    }
    return out;
}

Tensor msffn_forward(const Tensor& z, const MsffnWeights& w, MsffnFuse fuse) {
    check(z.rank() == 4, "msffn: rank-4 input required");
    Tensor s = layer_norm(z, w.norm_gamma, w.norm_beta);
    Tensor z1 = msffn_branch(s, w.b1, 1);
    Tensor z3 = msffn_branch(s, w.b3, 3);
    Tensor z5 = msffn_branch(s, w.b5, 5);
    if (fuse == MsffnFuse::sum) {
        add_inplace(z1, z3);
        add_inplace(z1, z5);
        return z1;
    }
    Tensor cat = concat_channels(z1, z3, z5);
    return conv1x1(cat, w.fuse_w, w.fuse_b);
}

Tensor scoss_forward(const Tensor& x, const ScossWeights& w, const SsmOptions& opt,
                     MsffnFuse fuse) {
    Tensor a = w.soss ? soss_forward(x, *w.soss, opt) : x;
    Tensor b = w.ccoss ? ccoss_forward(a, *w.ccoss, opt) : std::move(a);
    add_inplace(b, x);  // Eq. 19 outer residual
    if (!w.msffn) return b;
    Tensor out = msffn_forward(b, *w.msffn, fuse);
    add_inplace(out, b);
    return out;
}

}  // namespace wm
