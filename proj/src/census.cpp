// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/census.hpp"

#include <map>

namespace wm {

namespace {

struct Sink {
    virtual ~Sink() = default;
    virtual void tensor(const std::string& /*name*/, std::vector<int64_t> /*shape*/,
                        InitKind /*init*/, int64_t /*fan_in*/, bool /*learnable*/) {}
    virtual void macs(const std::string& /*module*/, int64_t /*count*/, bool /*conv_linear*/) {}
};

// Walks the whole architecture once, reporting every weight tensor and every
// op cost. h == 0 requests a tensor-only walk.
struct Walker {
    const ModelConfig& cfg;
    int64_t img_h, img_w;
    Sink& sink;

    bool counting() const { return img_h > 0; }

    void tensor(const std::string& name, std::vector<int64_t> shape, InitKind init,
                int64_t fan_in = 0, bool learnable = true) {
        sink.tensor(name, std::move(shape), init, fan_in, learnable);
    }

    void conv_tensors(const std::string& prefix, int64_t cin, int64_t cout, int k,
                      int64_t groups = 1) {
        const int64_t cig = cin / groups;
        tensor(prefix + ".weight", {cout, cig, k, k}, InitKind::fan_in_uniform, cig * k * k);
        tensor(prefix + ".bias", {cout}, InitKind::zero);
    }

    void conv_macs(const std::string& module, int64_t cin, int64_t cout, int k, int64_t groups,
                   int64_t out_h, int64_t out_w) {
        if (!counting()) return;
        sink.macs(module, k * k * (cin / groups) * cout * out_h * out_w, true);
    }

    void elem(const std::string& module, int64_t count, int64_t per_element = 1) {
        if (counting()) sink.macs(module, count * per_element, false);
    }

    // one selective scan unit: d inner channels, sequences of length l, b of them
    void s6_tensors(const std::string& prefix, int64_t d) {
        const int64_t n = cfg.state_size;
        tensor(prefix + ".a_log", {d, n}, InitKind::a_log_ramp);
        tensor(prefix + ".d_skip", {d}, InitKind::one);
        tensor(prefix + ".in_proj", {1 + 2 * n, d}, InitKind::fan_in_uniform, d);
        tensor(prefix + ".dt_weight", {d}, InitKind::fan_in_uniform, 1);
        tensor(prefix + ".dt_bias", {d}, InitKind::dt_bias);
    }

    void s6_macs(const std::string& module, int64_t d, int64_t l, int64_t b) {
        if (!counting()) return;
        const int64_t n = cfg.state_size;
        sink.macs(module, b * (1 + 2 * n) * d * l, true);  // in_proj
        sink.macs(module, b * d * l, true);                // dt bottleneck expand
        elem(module, b * d * l);                           // softplus
        sink.macs(module, b * d * l * n, false);           // scan recurrence, L*N per channel
        elem(module, b * d * l);                           // skip path
    }

    void soss(const std::string& prefix, const std::string& module, int64_t c, int64_t h,
              int64_t w) {
        const int64_t d = cfg.expand * c, p = h * w;
        conv_tensors(prefix + ".in1", c, d, 1);
        conv_tensors(prefix + ".in2", c, d, 1);
        conv_tensors(prefix + ".dw", d, d, 3, d);
        for (int i = 0; i < 4; ++i) s6_tensors(prefix + ".scan" + std::to_string(i), d);
        tensor(prefix + ".norm.gamma", {d}, InitKind::one);
        tensor(prefix + ".norm.beta", {d}, InitKind::zero);
        conv_tensors(prefix + ".out", d, c, 1);

        conv_macs(module, c, d, 1, 1, h, w);
        conv_macs(module, d, d, 3, d, h, w);
        elem(module, d * p);  // silu
        for (int i = 0; i < 4; ++i) s6_macs(module, d, p, 1);
        elem(module, 3 * d * p);      // directional sum
        elem(module, d * p, 2);       // layer norm
        conv_macs(module, c, d, 1, 1, h, w);
        elem(module, d * p);          // silu gate
        elem(module, d * p);          // hadamard
        conv_macs(module, d, c, 1, 1, h, w);
        elem(module, c * p);          // residual
    }

    void ccoss(const std::string& prefix, const std::string& module, int64_t c, int64_t h,
               int64_t w) {
        conv_tensors(prefix + ".conv", c, c, 1);
        tensor(prefix + ".bn.gamma", {c}, InitKind::one);
        tensor(prefix + ".bn.beta", {c}, InitKind::zero);
        tensor(prefix + ".bn.mean", {c}, InitKind::zero, 0, false);
        tensor(prefix + ".bn.var", {c}, InitKind::one, 0, false);
        for (const char* unit : {".h_fwd", ".h_bwd", ".w_fwd", ".w_bwd"})
            s6_tensors(prefix + unit, 1);
        conv_tensors(prefix + ".dw", c, c, 1, c);

        const int64_t p = h * w, hw_sum = h + w;
        elem(module, 2 * c * p);  // the two pools
        conv_macs(module, c, c, 1, 1, 1, hw_sum);
        elem(module, c * hw_sum, 2);  // batch norm
        elem(module, c * hw_sum);     // relu
        // channel scans: d = 1, length c, one sequence per pooled site, two
        // directions per axis
        s6_macs(module, 1, c, 2 * w);
        s6_macs(module, 1, c, 2 * h);
        elem(module, 4 * c * hw_sum);  // silu gates, hadamards, sums
        elem(module, c * hw_sum);      // sigmoid
        conv_macs(module, c, c, 1, c, h, w);  // depth-wise modulation
        elem(module, c * p, 3);        // channel softmax
        elem(module, 3 * c * p);       // eq. 15 hadamards
        elem(module, c * p);           // residual
    }

    void msffn(const std::string& prefix, const std::string& module, int64_t c, int64_t h,
               int64_t w) {
        tensor(prefix + ".norm.gamma", {c}, InitKind::one);
        tensor(prefix + ".norm.beta", {c}, InitKind::zero);
        const int64_t p = h * w;
        elem(module, c * p, 2);  // shared layer norm
        for (int k : {1, 3, 5}) {
            const std::string b = prefix + ".b" + std::to_string(k);
            conv_tensors(b + ".conv1", c, c, k);
            conv_tensors(b + ".dw1", c, c, k, c);
            conv_tensors(b + ".conv2", c, c, k);
            conv_tensors(b + ".dw2", c, c, k, c);
            conv_macs(module, c, c, k, 1, h, w);
            conv_macs(module, c, c, k, c, h, w);
            elem(module, c * p);  // relu
            conv_macs(module, c, c, k, 1, h, w);
            conv_macs(module, c, c, k, c, h, w);
        }
        if (cfg.msffn_fuse == MsffnFuse::concat_proj) {
            conv_tensors(prefix + ".fuse", 3 * c, c, 1);
            conv_macs(module, 3 * c, c, 1, 1, h, w);
        } else {
            elem(module, 2 * c * p);  // branch sums
        }
    }

    void scoss(const std::string& prefix, const std::string& module, int64_t c, int64_t h,
               int64_t w) {
        if (cfg.use_soss) soss(prefix + ".soss", module, c, h, w);
        if (cfg.use_ccoss) ccoss(prefix + ".ccoss", module, c, h, w);
        elem(module, c * h * w);  // eq. 19 residual
        if (cfg.use_msffn) {
            msffn(prefix + ".msffn", module, c, h, w);
            elem(module, c * h * w);  // msffn residual
        }
    }

    void run() {
        const auto widths = cfg.level_widths();
        const int64_t c = widths[0];
        int64_t h = img_h, w = img_w;

        conv_tensors("shallow.conv", 3, c, 3);
        conv_macs("shallow", 3, c, 3, 1, h, w);

        for (int i = 0; i < 3; ++i) {
            const std::string stage = "enc" + std::to_string(i + 1);
            const int64_t win = widths[static_cast<size_t>(i)];
            const int64_t wout = widths[static_cast<size_t>(i) + 1];
            h /= 2;
            w /= 2;
            conv_tensors(stage + ".down", win, wout, 3);
            conv_macs(stage, win, wout, 3, 1, h, w);
            scoss(stage + ".scoss", stage, wout, h, w);
        }

        scoss("bottleneck.scoss", "bottleneck", widths[3], h, w);

        for (int i = 0; i < 3; ++i) {
            const std::string stage = "dec" + std::to_string(i + 1);
            const int64_t win = widths[static_cast<size_t>(3 - i)];
            const int64_t wout = widths[static_cast<size_t>(2 - i)];
            conv_tensors(stage + ".up", win, 4 * wout, 1);
            conv_macs(stage, win, 4 * wout, 1, 1, h, w);  // before pixel shuffle
            h *= 2;
            w *= 2;
            if (cfg.skip_fuse == SkipFuse::concat) {
                conv_tensors(stage + ".fuse", 2 * wout, wout, 1);
                conv_macs(stage, 2 * wout, wout, 1, 1, h, w);
            } else {
                elem(stage, wout * h * w);
            }
            scoss(stage + ".scoss", stage, wout, h, w);
        }

        scoss("refine.scoss", "refine", c, h, w);

        conv_tensors("head.conv", c, 3, 3);
        conv_macs("head", c, 3, 3, 1, h, w);
        elem("head", 3 * h * w);  // global residual
    }
};

struct TensorCollector : Sink {
    std::vector<TensorSpec> specs;
    void tensor(const std::string& name, std::vector<int64_t> shape, InitKind init, int64_t fan_in,
                bool /*learnable*/) override {
        specs.push_back({name, std::move(shape), init, fan_in});
    }
};

struct ParamCounter : Sink {
    std::map<std::string, int64_t> by_module;
    int64_t total = 0;
    void tensor(const std::string& name, std::vector<int64_t> shape, InitKind /*init*/,
                int64_t /*fan_in*/, bool learnable) override {
        if (!learnable) return;
        int64_t n = 1;
        for (int64_t d : shape) n *= d;
        by_module[name.substr(0, name.find('.'))] += n;
        total += n;
    }
};

struct MacCounter : Sink {
    std::map<std::string, int64_t> by_module;
    int64_t total = 0;
    int64_t conv_linear = 0;
    void macs(const std::string& module, int64_t count, bool is_conv_linear) override {
        by_module[module] += count;
        total += count;
        if (is_conv_linear) conv_linear += count;
    }
};

}  // namespace

std::vector<TensorSpec> enumerate_weights(const ModelConfig& config) {
    config.validate();
    TensorCollector tc;
    Walker{config, 0, 0, tc}.run();
    return std::move(tc.specs);
}

int64_t count_params(const ModelConfig& config) {
    config.validate();
    ParamCounter pc;
    Walker{config, 0, 0, pc}.run();
    return pc.total;
}

FlopReport count_flops(const ModelConfig& config, int64_t h, int64_t w) {
    config.validate();
    check(h >= 8 && w >= 8 && h % 8 == 0 && w % 8 == 0,
          "count_flops: resolution must be a positive multiple of 8");
    ParamCounter pc;
    Walker{config, 0, 0, pc}.run();
    MacCounter mc;
    Walker{config, h, w, mc}.run();

    FlopReport report;
    // keep pipeline order rather than map order
    const char* order[] = {"shallow", "enc1", "enc2", "enc3", "bottleneck",
                           "dec1",    "dec2", "dec3", "refine", "head"};
    for (const char* m : order) {
        FlopRow row;
        row.module = m;
        if (auto it = pc.by_module.find(m); it != pc.by_module.end()) row.params = it->second;
        if (auto it = mc.by_module.find(m); it != mc.by_module.end()) row.macs = it->second;
        report.rows.push_back(row);
    }
    report.total_params = pc.total;
    report.total_macs = mc.total;
    report.conv_linear_macs = mc.conv_linear;
    return report;
}

}  // namespace wm
