// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/network.hpp"

#include <cmath>
#include <unordered_set>

#include "watermamba/rng.hpp"

namespace wm {

WeightStore init_weights(const ModelConfig& config, uint64_t seed) {
    const auto specs = enumerate_weights(config);
    Rng rng(seed);
    WeightStore store;
    store.set_config_text(config.canonical_text());
    for (const auto& spec : specs) {
        Tensor t(spec.shape);
        float* p = t.data();
        switch (spec.init) {
            case InitKind::fan_in_uniform: {
                const double bound = std::sqrt(6.0 / static_cast<double>(spec.fan_in));
                for (int64_t i = 0; i < t.numel(); ++i)
                    p[i] = static_cast<float>(rng.uniform(-bound, bound));
                break;
            }
            case InitKind::zero:
                break;
            case InitKind::one:
                for (int64_t i = 0; i < t.numel(); ++i) p[i] = 1.0f;
                break;
            case InitKind::a_log_ramp: {
                const int64_t n = spec.shape.back();
                for (int64_t i = 0; i < t.numel(); ++i)
                    p[i] = static_cast<float>(std::log(static_cast<double>(i % n) + 1.0));
                break;
            }
            case InitKind::dt_bias:
                for (int64_t i = 0; i < t.numel(); ++i) {
                    const double target =
                        std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
                    p[i] = static_cast<float>(std::log(std::expm1(target)));
                }
                break;
        }
        store.put(spec.name, std::move(t));
    }
    return store;
}

namespace {

S6Weights take_s6(const WeightStore& store, const std::string& prefix) {
    S6Weights w;
    w.a_log = store.get(prefix + ".a_log");
    w.d_skip = store.get(prefix + ".d_skip");
    w.in_proj = store.get(prefix + ".in_proj");
    w.dt_weight = store.get(prefix + ".dt_weight");
    w.dt_bias = store.get(prefix + ".dt_bias");
    return w;
}

ScossWeights take_scoss(const ModelConfig& cfg, const WeightStore& store,
                        const std::string& prefix) {
    ScossWeights w;
    if (cfg.use_soss) {
        SossWeights s;
        s.in1_w = store.get(prefix + ".soss.in1.weight");
        s.in1_b = store.get(prefix + ".soss.in1.bias");
        s.in2_w = store.get(prefix + ".soss.in2.weight");
        s.in2_b = store.get(prefix + ".soss.in2.bias");
        s.dw_w = store.get(prefix + ".soss.dw.weight");
        s.dw_b = store.get(prefix + ".soss.dw.bias");
        for (int i = 0; i < 4; ++i)
            s.scans[static_cast<size_t>(i)] =
                take_s6(store, prefix + ".soss.scan" + std::to_string(i));
        s.norm_gamma = store.get(prefix + ".soss.norm.gamma");
        s.norm_beta = store.get(prefix + ".soss.norm.beta");
        s.out_w = store.get(prefix + ".soss.out.weight");
        s.out_b = store.get(prefix + ".soss.out.bias");
        w.soss = std::move(s);
    }
    if (cfg.use_ccoss) {
        CcossWeights c;
        c.conv_w = store.get(prefix + ".ccoss.conv.weight");
        c.conv_b = store.get(prefix + ".ccoss.conv.bias");
        c.bn_gamma = store.get(prefix + ".ccoss.bn.gamma");
        c.bn_beta = store.get(prefix + ".ccoss.bn.beta");
        c.bn_mean = store.get(prefix + ".ccoss.bn.mean");
        c.bn_var = store.get(prefix + ".ccoss.bn.var");
        c.h_fwd = take_s6(store, prefix + ".ccoss.h_fwd");
        c.h_bwd = take_s6(store, prefix + ".ccoss.h_bwd");
        c.w_fwd = take_s6(store, prefix + ".ccoss.w_fwd");
        c.w_bwd = take_s6(store, prefix + ".ccoss.w_bwd");
        c.dw_w = store.get(prefix + ".ccoss.dw.weight");
        c.dw_b = store.get(prefix + ".ccoss.dw.bias");
        w.ccoss = std::move(c);
    }
    if (cfg.use_msffn) {
        MsffnWeights m;
        m.norm_gamma = store.get(prefix + ".msffn.norm.gamma");
        m.norm_beta = store.get(prefix + ".msffn.norm.beta");
        MsffnBranch* branches[3] = {&m.b1, &m.b3, &m.b5};
        const int ks[3] = {1, 3, 5};
        for (int i = 0; i < 3; ++i) {
            const std::string b = prefix + ".msffn.b" + std::to_string(ks[i]);
            branches[i]->conv1_w = store.get(b + ".conv1.weight");
            branches[i]->conv1_b = store.get(b + ".conv1.bias");
            branches[i]->dw1_w = store.get(b + ".dw1.weight");
            branches[i]->dw1_b = store.get(b + ".dw1.bias");
            branches[i]->conv2_w = store.get(b + ".conv2.weight");
            branches[i]->conv2_b = store.get(b + ".conv2.bias");
            branches[i]->dw2_w = store.get(b + ".dw2.weight");
            branches[i]->dw2_b = store.get(b + ".dw2.bias");
        }
        if (cfg.msffn_fuse == MsffnFuse::concat_proj) {
            m.fuse_w = store.get(prefix + ".msffn.fuse.weight");
            m.fuse_b = store.get(prefix + ".msffn.fuse.bias");
        }
        w.msffn = std::move(m);
    }
    return w;
}

Tensor concat2(const Tensor& a, const Tensor& b) {
    check(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
          "concat: spatial/batch mismatch " + a.shape_str() + " vs " + b.shape_str());
    const int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), hw = a.dim(2) * a.dim(3);
    Tensor out({n, ca + cb, a.dim(2), a.dim(3)});
    for (int64_t img = 0; img < n; ++img) {
        float* dst = out.data() + img * (ca + cb) * hw;
        const float* pa = a.data() + img * ca * hw;
        const float* pb = b.data() + img * cb * hw;
        for (int64_t i = 0; i < ca * hw; ++i) dst[i] = pa[i];
        for (int64_t i = 0; i < cb * hw; ++i) dst[ca * hw + i] = pb[i];
    }
    return out;
}

}  // namespace

Model build(const ModelConfig& config, const WeightStore& store) {
    config.validate();
    if (!store.config_text().empty()) {
        check(store.config_text() == config.canonical_text(),
              "build: weight store was produced for a different config");
    }

    const auto specs = enumerate_weights(config);
    std::unordered_set<std::string> expected;
    expected.reserve(specs.size());
    for (const auto& spec : specs) {
        const Tensor* t = store.find(spec.name);
        check(t != nullptr, "build: store is missing tensor '" + spec.name + "'");
        check(t->shape() == spec.shape, "build: tensor '" + spec.name + "' has shape " +
                                            t->shape_str() + ", expected " +
                                            shape_str(spec.shape));
        expected.insert(spec.name);
    }
    for (const auto& [name, t] : store.items())
        check(expected.count(name) != 0, "build: store has unexpected tensor '" + name + "'");

    Model m;
    m.config = config;
    m.ssm.euler = config.euler_discretization;
    m.stem_w = store.get("shallow.conv.weight");
    m.stem_b = store.get("shallow.conv.bias");
    for (int i = 0; i < 3; ++i) {
        const std::string stage = "enc" + std::to_string(i + 1);
        auto& e = m.enc[static_cast<size_t>(i)];
        e.down_w = store.get(stage + ".down.weight");
        e.down_b = store.get(stage + ".down.bias");
        e.block = take_scoss(config, store, stage + ".scoss");
    }
    m.bottleneck = take_scoss(config, store, "bottleneck.scoss");
    for (int i = 0; i < 3; ++i) {
        const std::string stage = "dec" + std::to_string(i + 1);
        auto& d = m.dec[static_cast<size_t>(i)];
        d.up_w = store.get(stage + ".up.weight");
        d.up_b = store.get(stage + ".up.bias");
        if (config.skip_fuse == SkipFuse::concat) {
            d.fuse_w = store.get(stage + ".fuse.weight");
            d.fuse_b = store.get(stage + ".fuse.bias");
        }
        d.block = take_scoss(config, store, stage + ".scoss");
    }
    m.refine = take_scoss(config, store, "refine.scoss");
    m.head_w = store.get("head.conv.weight");
    m.head_b = store.get("head.conv.bias");
    return m;
}

Tensor forward(const Model& m, const Tensor& image, Tensor* dr_capture) {
    check(image.rank() == 4 && image.dim(1) == 3,
          "forward: (N,3,H,W) input required, got " + image.shape_str());
    const int64_t h = image.dim(2), w = image.dim(3);
    check(h % 8 == 0 && w % 8 == 0 && h >= 8 && w >= 8,
          "forward: H and W must be multiples of 8 (got " + std::to_string(h) + "x" +
              std::to_string(w) + "); pad the input first");

    const auto widths = m.config.level_widths();
    const MsffnFuse fuse = m.config.msffn_fuse;

    Tensor x = conv2d(image, ConvSpec::same(3, widths[0], 3), m.stem_w, &m.stem_b);
    std::array<Tensor, 3> skips;
    skips[0] = x;  // F1
    for (int i = 0; i < 3; ++i) {
        const auto& e = m.enc[static_cast<size_t>(i)];
        x = conv2d(x, ConvSpec::same(widths[static_cast<size_t>(i)],
                                     widths[static_cast<size_t>(i) + 1], 3, 2),
                   e.down_w, &e.down_b);
        x = scoss_forward(x, e.block, m.ssm, fuse);
        if (i < 2) skips[static_cast<size_t>(i) + 1] = x;  // F2, F3
    }
    x = scoss_forward(x, m.bottleneck, m.ssm, fuse);  // L

    for (int i = 0; i < 3; ++i) {
        const auto& d = m.dec[static_cast<size_t>(i)];
        const int64_t wout = widths[static_cast<size_t>(2 - i)];
        x = conv2d(x, ConvSpec::same(widths[static_cast<size_t>(3 - i)], 4 * wout, 1), d.up_w,
                   &d.up_b);
        x = pixel_shuffle(x, 2);
        const Tensor& skip = skips[static_cast<size_t>(2 - i)];
        if (m.config.skip_fuse == SkipFuse::concat) {
            x = conv2d(concat2(skip, x), ConvSpec::same(2 * wout, wout, 1), d.fuse_w, &d.fuse_b);
        } else {
            add_inplace(x, skip);
        }
        x = scoss_forward(x, d.block, m.ssm, fuse);
    }

    x = scoss_forward(x, m.refine, m.ssm, fuse);
    Tensor dr = conv2d(x, ConvSpec::same(widths[0], 3, 3), m.head_w, &m.head_b);
    if (dr_capture) *dr_capture = dr;
    add_inplace(dr, image);  // FR = DR + I
    return dr;
}

}  // namespace wm
