// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/selfcheck.hpp"

#include <cmath>

#include "watermamba/metrics.hpp"
#include "watermamba/scan_layout.hpp"

namespace wm {
namespace selfcheck {

namespace {

void report(std::vector<PropertyResult>& out, const std::string& name, bool pass,
            const std::string& detail) {
    out.push_back({name, pass, detail});
}

Tensor random_tensor(Rng& rng, std::vector<int64_t> shape, float lo, float hi) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform_f32(lo, hi);
    return t;
}

Tensor scale(const Tensor& t, float s) {
    Tensor out = t;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
    return out;
}

}  // namespace

ScanCase random_scan_case(Rng& rng, int64_t batch, int64_t d, int64_t l, int64_t n) {
    ScanCase cs;
    cs.u = random_tensor(rng, {batch, d, l}, -2.0f, 2.0f);
    cs.delta = Tensor({batch, d, l});
    for (int64_t i = 0; i < cs.delta.numel(); ++i)
        cs.delta[i] = static_cast<float>(std::exp(rng.uniform(std::log(1e-4), std::log(2.0))));
    cs.b = random_tensor(rng, {batch, n, l}, -1.0f, 1.0f);
    cs.c = random_tensor(rng, {batch, n, l}, -1.0f, 1.0f);
    cs.a_log = random_tensor(rng, {d, n}, -6.0f, 2.0f);
    cs.d_skip = random_tensor(rng, {d}, -1.0f, 1.0f);
    return cs;
}

std::vector<PropertyResult> scan_oracle_suite(uint64_t seed, int instances, double tol) {
    Rng rng(seed);
    std::vector<PropertyResult> out;
    const int64_t lengths[] = {1, 2, 7, 64, 1000, 4096};
    const int weights[] = {25, 20, 20, 20, 10, 5};

    double worst = 0.0;
    bool chunks_identical = true, l1_bitexact = true;
    int l1_cases = 0, chunk_cases = 0;
    for (int i = 0; i < instances; ++i) {
        int pick = static_cast<int>(rng.next_u64() % 100);
        int64_t l = lengths[5];
        for (int j = 0; j < 6; ++j) {
            if (pick < weights[j]) {
                l = lengths[j];
                break;
            }
            pick -= weights[j];
        }
        const int64_t batch = 1 + static_cast<int64_t>(rng.next_u64() % 2);
        const int64_t d = 1 + static_cast<int64_t>(rng.next_u64() % 4);
        const int64_t n = 1 + static_cast<int64_t>(rng.next_u64() % 32);
        const ScanCase cs = random_scan_case(rng, batch, d, l, n);
        const ScanInput input{&cs.u, &cs.delta, &cs.b, &cs.c};

        const Tensor ref = selective_scan_ref(input, cs.a_log, cs.d_skip);
        const Tensor fast = selective_scan_fast(input, cs.a_log, cs.d_skip);
        worst = std::max(worst, static_cast<double>(max_abs_diff(ref, fast)));
        if (l == 1) {
            ++l1_cases;
            l1_bitexact = l1_bitexact && bitwise_equal(ref, fast);
        }
        if (i % 10 == 0) {
            ++chunk_cases;
            for (int cl : {1, 5, 8192}) {
                const Tensor alt = selective_scan_fast(input, cs.a_log, cs.d_skip, false, cl);
                chunks_identical = chunks_identical && bitwise_equal(fast, alt);
            }
        }
    }
    report(out, "scan.fast_matches_ref", worst <= tol,
           "max abs deviation " + std::to_string(worst) + " over " + std::to_string(instances) +
               " instances (tol " + std::to_string(tol) + ")");
    report(out, "scan.chunk_length_invariant", chunks_identical,
           "bit-identical outputs for chunk lengths {1,5,64,8192} on " +
               std::to_string(chunk_cases) + " instances");
    report(out, "scan.l1_bit_exact", l1_bitexact && l1_cases > 0,
           "fast == ref bitwise on " + std::to_string(l1_cases) + " single-step instances");
    return out;
}

std::vector<PropertyResult> lti_suite(uint64_t seed, int instances, double tol,
                                      const ScanFn& scan) {
    Rng rng(seed);
    std::vector<PropertyResult> out;
    const ScanFn run = scan ? scan : [](const ScanInput& in, const Tensor& a_log,
                                        const Tensor& d_skip, bool euler, int chunk_len) {
        return selective_scan_fast(in, a_log, d_skip, euler, chunk_len);
    };

    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int64_t d = 1 + static_cast<int64_t>(rng.next_u64() % 3);
        const int64_t n = 1 + static_cast<int64_t>(rng.next_u64() % 8);
        const int64_t l = 1 + static_cast<int64_t>(rng.next_u64() % 200);

        // time-invariant parameters: delta per channel, b/c per state
        std::vector<double> delta_c(static_cast<size_t>(d));
        for (auto& v : delta_c) v = std::exp(rng.uniform(std::log(1e-4), std::log(1.0)));
        std::vector<double> bv(static_cast<size_t>(n)), cv(static_cast<size_t>(n));
        for (auto& v : bv) v = rng.uniform(-1.0, 1.0);
        for (auto& v : cv) v = rng.uniform(-1.0, 1.0);

        ScanCase cs;
        cs.u = random_tensor(rng, {1, d, l}, -2.0f, 2.0f);
        cs.delta = Tensor({1, d, l});
        cs.b = Tensor({1, n, l});
        cs.c = Tensor({1, n, l});
        for (int64_t di = 0; di < d; ++di)
            for (int64_t t = 0; t < l; ++t)
                cs.delta.at3(0, di, t) = static_cast<float>(delta_c[static_cast<size_t>(di)]);
        for (int64_t ni = 0; ni < n; ++ni)
            for (int64_t t = 0; t < l; ++t) {
                cs.b.at3(0, ni, t) = static_cast<float>(bv[static_cast<size_t>(ni)]);
                cs.c.at3(0, ni, t) = static_cast<float>(cv[static_cast<size_t>(ni)]);
            }
        cs.a_log = random_tensor(rng, {d, n}, -6.0f, 1.0f);
        cs.d_skip = random_tensor(rng, {d}, -1.0f, 1.0f);

        const ScanInput input{&cs.u, &cs.delta, &cs.b, &cs.c};
        const Tensor got = run(input, cs.a_log, cs.d_skip, false, 64);

        // explicit kernel K_j = sum_n c_n a_bar^j b_bar, plus the skip tap
        for (int64_t di = 0; di < d; ++di) {
            std::vector<double> kern(static_cast<size_t>(l), 0.0);
            for (int64_t ni = 0; ni < n; ++ni) {
                const double a =
                    -std::exp(static_cast<double>(cs.a_log[di * n + ni]));
                const Discrete dz = discretize(delta_c[static_cast<size_t>(di)], a,
                                               bv[static_cast<size_t>(ni)]);
                double apow = 1.0;
                for (int64_t j = 0; j < l; ++j) {
                    kern[static_cast<size_t>(j)] += cv[static_cast<size_t>(ni)] * apow * dz.b_bar;
                    apow *= dz.a_bar;
                }
            }
            for (int64_t t = 0; t < l; ++t) {
                double y = static_cast<double>(cs.d_skip[di]) * cs.u.at3(0, di, t);
                for (int64_t j = 0; j <= t; ++j)
                    y += kern[static_cast<size_t>(j)] * cs.u.at3(0, di, t - j);
                worst = std::max(worst, std::fabs(y - got.at3(0, di, t)));
            }
        }
    }
    report(out, "scan.lti_matches_kernel_conv", worst <= tol,
           "max abs deviation " + std::to_string(worst) + " over " + std::to_string(instances) +
               " constant-parameter instances (tol " + std::to_string(tol) + ")");
    return out;
}

namespace {

SossWeights random_soss_weights(Rng& rng, int64_t c, int64_t e, int64_t n) {
    const int64_t d = e * c;
    SossWeights w;
    w.in1_w = random_tensor(rng, {d, c, 1, 1}, -0.5f, 0.5f);
    w.in1_b = random_tensor(rng, {d}, -0.1f, 0.1f);
    w.in2_w = random_tensor(rng, {d, c, 1, 1}, -0.5f, 0.5f);
    w.in2_b = random_tensor(rng, {d}, -0.1f, 0.1f);
    w.dw_w = random_tensor(rng, {d, 1, 3, 3}, -0.5f, 0.5f);
    w.dw_b = random_tensor(rng, {d}, -0.1f, 0.1f);
    for (auto& s : w.scans) {
        s.a_log = random_tensor(rng, {d, n}, -3.0f, 1.0f);
        s.d_skip = random_tensor(rng, {d}, -1.0f, 1.0f);
        s.in_proj = random_tensor(rng, {1 + 2 * n, d}, -0.3f, 0.3f);
        s.dt_weight = random_tensor(rng, {d}, -0.5f, 0.5f);
        s.dt_bias = random_tensor(rng, {d}, -3.0f, -1.0f);
    }
    w.norm_gamma = random_tensor(rng, {d}, 0.5f, 1.5f);
    w.norm_beta = random_tensor(rng, {d}, -0.2f, 0.2f);
    w.out_w = random_tensor(rng, {c, d, 1, 1}, -0.5f, 0.5f);
    w.out_b = random_tensor(rng, {c}, -0.1f, 0.1f);
    return w;
}

}  // namespace

std::vector<PropertyResult> residual_suite(uint64_t seed) {
    Rng rng(seed);
    std::vector<PropertyResult> out;
    SsmOptions opt;

    // zeroed output projection makes SOSS the exact identity
    {
        SossWeights w = random_soss_weights(rng, 6, 2, 4);
        w.out_w = Tensor({6, 12, 1, 1});
        w.out_b = Tensor({6});
        const Tensor x = random_tensor(rng, {2, 6, 5, 9}, -1.0f, 1.0f);
        const Tensor y = soss_forward(x, w, opt);
        report(out, "residual.soss_zero_projection_identity", bitwise_equal(x, y),
               "soss(x) == x bit-exact with zeroed projection");
    }

    ModelConfig cfg;
    cfg.base_width = 8;
    cfg.state_size = 4;

    // zeroed output conv makes the whole network the exact identity
    {
        WeightStore store = init_weights(cfg, seed);
        store.put("head.conv.weight", Tensor({3, 8, 3, 3}));
        store.put("head.conv.bias", Tensor({3}));
        const Model model = build(cfg, store);
        const Tensor img = random_tensor(rng, {1, 3, 16, 24}, 0.0f, 1.0f);
        const Tensor fr = forward(model, img);
        report(out, "residual.network_zero_head_identity", bitwise_equal(img, fr),
               "forward(x) == x bit-exact with zeroed output conv");
    }

    // FR is exactly DR + I
    {
        const WeightStore store = init_weights(cfg, seed + 1);
        const Model model = build(cfg, store);
        const Tensor img = random_tensor(rng, {1, 3, 16, 16}, 0.0f, 1.0f);
        Tensor dr;
        const Tensor fr = forward(model, img, &dr);
        report(out, "residual.fr_equals_dr_plus_input", bitwise_equal(fr, add(dr, img)),
               "captured DR satisfies FR == DR + I bit-exact");
    }
    return out;
}

std::vector<PropertyResult> layout_suite(uint64_t seed, int shapes) {
    Rng rng(seed);
    std::vector<PropertyResult> out;
    bool round_trip = true, reversal = true, merge_oracle = true, coord_round = true;

    for (int i = 0; i < shapes; ++i) {
        const int64_t h = 1 + static_cast<int64_t>(rng.next_u64() % 64);
        const int64_t w = 1 + static_cast<int64_t>(rng.next_u64() % 64);
        const int64_t c = 1 + static_cast<int64_t>(rng.next_u64() % 4);
        const Tensor m = random_tensor(rng, {1, c, h, w}, -1.0f, 1.0f);

        std::array<Tensor, 4> seqs;
        for (int d = 0; d < 4; ++d) {
            const auto dir = static_cast<ScanDirection>(d);
            seqs[static_cast<size_t>(d)] = flatten_direction(m, dir);
            round_trip = round_trip &&
                         bitwise_equal(m, unflatten_direction(seqs[static_cast<size_t>(d)], dir, h, w));
        }
        for (int64_t j = 0; j < h * w; ++j) {
            reversal = reversal && seqs[1][j] == seqs[0][h * w - 1 - j] &&
                       seqs[3][j] == seqs[2][h * w - 1 - j];
        }

        // scatter-add oracle for the merge
        std::array<Tensor, 4> scanned;
        for (int d = 0; d < 4; ++d)
            scanned[static_cast<size_t>(d)] = random_tensor(rng, {1, c, h * w}, -1.0f, 1.0f);
        const Tensor merged = merge_directions(scanned, h, w);
        Tensor expect({1, c, h, w});
        for (int d = 0; d < 4; ++d)
            for (int64_t ch = 0; ch < c; ++ch)
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x)
                        expect.at4(0, ch, y, x) +=
                            scanned[static_cast<size_t>(d)].at3(
                                0, ch, scan_index(static_cast<ScanDirection>(d), y, x, h, w));
        merge_oracle = merge_oracle && max_abs_diff(merged, expect) <= 1e-6f;

        const Tensor y_h = random_tensor(rng, {1, c, 1, w}, -1.0f, 1.0f);
        const Tensor y_w = random_tensor(rng, {1, c, h, 1}, -1.0f, 1.0f);
        const auto [h_back, w_back] = coordinate_split(coordinate_concat(y_h, y_w), h, w);
        coord_round = coord_round && bitwise_equal(y_h, h_back) && bitwise_equal(y_w, w_back);
    }
    report(out, "layout.flatten_round_trip", round_trip,
           "unflatten(flatten(m)) == m bit-exact, all four directions, " +
               std::to_string(shapes) + " shapes");
    report(out, "layout.direction_reversals", reversal,
           "dir2 = reverse(dir1) and dir4 = reverse(dir3)");
    report(out, "layout.merge_scatter_oracle", merge_oracle,
           "merge matches the brute-force scatter-add");
    report(out, "layout.coordinate_round_trip", coord_round,
           "split(concat(yh, yw)) == (yh, yw) bit-exact");
    return out;
}

std::vector<PropertyResult> metrics_suite(uint64_t seed) {
    using namespace metrics;
    Rng rng(seed);
    std::vector<PropertyResult> out;

    {
        Tensor a = random_tensor(rng, {3, 16, 16}, 0.0f, 200.0f);
        Tensor b = a;
        for (int64_t i = 0; i < b.numel(); ++i) b[i] += 16.0f;
        const double v = psnr(a, b, 255.0);
        report(out, "metrics.psnr_closed_form", std::fabs(v - 24.0479) < 1e-3,
               "uniform +16 at peak 255 gives " + std::to_string(v) + " dB (expect 24.048)");
        report(out, "metrics.psnr_identity_inf", std::isinf(psnr(a, a)), "psnr(x,x) = +inf");
        report(out, "metrics.psnr_symmetric", psnr(a, b, 255.0) == psnr(b, a, 255.0),
               "psnr(a,b) == psnr(b,a)");
        double prev = std::numeric_limits<double>::infinity();
        bool monotone = true;
        Tensor pert = a;
        for (int step = 0; step < 4; ++step) {
            for (int64_t i = 0; i < pert.numel(); ++i) pert[i] += 4.0f;
            const double p = psnr(a, pert, 255.0);
            monotone = monotone && p < prev;
            prev = p;
        }
        report(out, "metrics.psnr_monotone_in_mse", monotone,
               "PSNR strictly decreases under nested perturbations");
    }
    {
        const Tensor x = random_tensor(rng, {3, 24, 24}, 0.0f, 1.0f);
        const Tensor y = random_tensor(rng, {3, 24, 24}, 0.0f, 1.0f);
        report(out, "metrics.ssim_identity", std::fabs(ssim(x, x) - 1.0) <= 1e-9,
               "ssim(x,x) = 1 within 1e-9");
        report(out, "metrics.ssim_symmetric", std::fabs(ssim(x, y) - ssim(y, x)) <= 1e-12,
               "ssim(a,b) == ssim(b,a) within 1e-12");
        Tensor board({3, 16, 16});
        for (int64_t c = 0; c < 3; ++c)
            for (int64_t i = 0; i < 16; ++i)
                for (int64_t j = 0; j < 16; ++j)
                    board[c * 256 + i * 16 + j] = static_cast<float>((i + j) % 2);
        Tensor inverted = board;
        for (int64_t i = 0; i < inverted.numel(); ++i) inverted[i] = 1.0f - inverted[i];
        report(out, "metrics.ssim_anticorrelated", ssim(board, inverted) < 0.0,
               "checkerboard vs inverse is negative");
    }
    {
        const Tensor gray = Tensor::full({3, 24, 24}, 0.5f);
        const auto uq = uiqm_components(gray);
        const auto uc = uciqe_components(gray);
        const bool zeros = std::fabs(uq.uicm) <= 1e-6 && std::fabs(uq.uism) <= 1e-6 &&
                           std::fabs(uq.uiconm) <= 1e-6 && std::fabs(uq.uiqm) <= 1e-6 &&
                           std::fabs(uc.uciqe) <= 1e-6;
        report(out, "metrics.constant_image_zero", zeros,
               "constant mid-gray: all UIQM/UCIQE components vanish");
    }
    {
        bool invariant = true;
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) {
            const int64_t h = 8 * (1 + static_cast<int64_t>(rng.next_u64() % 4));
            const int64_t w = 8 * (1 + static_cast<int64_t>(rng.next_u64() % 4));
            const Tensor img = random_tensor(rng, {3, h, w}, 0.0f, 1.0f);
            Tensor hflip({3, h, w}), vflip({3, h, w}), rot({3, h, w});
            for (int64_t c = 0; c < 3; ++c)
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x) {
                        const float v = img[(c * h + y) * w + x];
                        hflip[(c * h + y) * w + (w - 1 - x)] = v;
                        vflip[(c * h + (h - 1 - y)) * w + x] = v;
                        rot[(c * h + (h - 1 - y)) * w + (w - 1 - x)] = v;
                    }
            const double u0 = uiqm(img), c0 = uciqe(img);
            for (const Tensor* t : {&hflip, &vflip, &rot}) {
                worst = std::max(worst, std::fabs(uiqm(*t) - u0));
                worst = std::max(worst, std::fabs(uciqe(*t) - c0));
            }
            invariant = invariant && worst <= 1e-6;
        }
        report(out, "metrics.flip_invariance", invariant,
               "UIQM/UCIQE invariant to flips and 180 deg rotation, worst dev " +
                   std::to_string(worst));
    }
    return out;
}

std::vector<PropertyResult> scan_property_suite(uint64_t seed, int instances) {
    Rng rng(seed);
    std::vector<PropertyResult> out;

    bool stable = true, bounded = true, causal = true, linear = true;
    double lin_worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int64_t d = 1 + static_cast<int64_t>(rng.next_u64() % 3);
        const int64_t n = 1 + static_cast<int64_t>(rng.next_u64() % 8);
        const int64_t l = 2 + static_cast<int64_t>(rng.next_u64() % 128);
        const ScanCase cs = random_scan_case(rng, 1, d, l, n);
        const ScanInput input{&cs.u, &cs.delta, &cs.b, &cs.c};

        // stability + bounded state, tracked through an explicit recurrence
        for (int64_t di = 0; di < d && (stable || bounded); ++di) {
            std::vector<double> h(static_cast<size_t>(n), 0.0);
            double max_abar = 0.0, max_drive = 0.0, max_state = 0.0;
            for (int64_t t = 0; t < l; ++t) {
                for (int64_t ni = 0; ni < n; ++ni) {
                    const double a = -std::exp(static_cast<double>(cs.a_log[di * n + ni]));
                    const Discrete dz =
                        discretize(cs.delta.at3(0, di, t), a, cs.b.at3(0, ni, t));
                    stable = stable && dz.a_bar > 0.0 && dz.a_bar < 1.0;
                    max_abar = std::max(max_abar, std::fabs(dz.a_bar));
                    max_drive = std::max(max_drive, std::fabs(dz.b_bar * cs.u.at3(0, di, t)));
                    h[static_cast<size_t>(ni)] =
                        dz.a_bar * h[static_cast<size_t>(ni)] + dz.b_bar * cs.u.at3(0, di, t);
                    max_state = std::max(max_state, std::fabs(h[static_cast<size_t>(ni)]));
                }
            }
            bounded = bounded && max_state <= max_drive / (1.0 - max_abar) + 1e-9;
        }

        // causality: perturbing u at step t leaves all earlier outputs alone
        {
            const Tensor y0 = selective_scan_fast(input, cs.a_log, cs.d_skip);
            const int64_t t = l / 2;
            ScanCase pert = cs;
            for (int64_t di = 0; di < d; ++di) pert.u.at3(0, di, t) += 1.0f;
            const ScanInput pin{&pert.u, &cs.delta, &cs.b, &cs.c};
            const Tensor y1 = selective_scan_fast(pin, cs.a_log, cs.d_skip);
            for (int64_t di = 0; di < d; ++di)
                for (int64_t s = 0; s < t; ++s)
                    causal = causal && y0.at3(0, di, s) == y1.at3(0, di, s);
        }

        // linearity in u under externally fixed delta/b/c
        {
            const Tensor u2 = random_tensor(rng, {1, d, l}, -2.0f, 2.0f);
            const float alpha = rng.uniform_f32(-1.5f, 1.5f), beta = rng.uniform_f32(-1.5f, 1.5f);
            Tensor mix = add(scale(cs.u, alpha), scale(u2, beta));
            const ScanInput in_mix{&mix, &cs.delta, &cs.b, &cs.c};
            const ScanInput in_u2{&u2, &cs.delta, &cs.b, &cs.c};
            const Tensor y_mix = selective_scan_fast(in_mix, cs.a_log, cs.d_skip);
            const Tensor y_lin = add(scale(selective_scan_fast(input, cs.a_log, cs.d_skip), alpha),
                                     scale(selective_scan_fast(in_u2, cs.a_log, cs.d_skip), beta));
            lin_worst = std::max(lin_worst, static_cast<double>(max_abs_diff(y_mix, y_lin)));
            linear = linear && lin_worst <= 1e-5;
        }
    }
    report(out, "scan.stability", stable, "0 < a_bar < 1 for every discretized step");
    report(out, "scan.bounded_state", bounded,
           "|h_t| <= max|b_bar u| / (1 - max|a_bar|) throughout");
    report(out, "scan.causality", causal, "perturbation at t never changes outputs before t");
    report(out, "scan.linearity_fixed_params", linear,
           "scan(a x1 + b x2) == a scan(x1) + b scan(x2), worst dev " + std::to_string(lin_worst));
    return out;
}

bool all_pass(const std::vector<PropertyResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace selfcheck
}  // namespace wm
