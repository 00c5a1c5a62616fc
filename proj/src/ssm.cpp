// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "watermamba/parallel.hpp"

namespace wm {

// Deterministic polynomial exponential used by every scan path. Branch-free
// (clamped range reduction, degree-11 Taylor on |r| <= ln2/2, 2^k by exponent
// bits), so the staging loops vectorize; accurate to ~1e-14 relative, and the
// reference and blocked scans share it bit-for-bit. Arguments are clamped to
// [-705, 705]; the engine only ever needs exp of delta * A < 0.
static inline double poly_exp(double x) {
    x = std::min(705.0, std::max(-705.0, x));
    const double kd = std::nearbyint(x * 1.4426950408889634074);  // x / ln2
    // two-part ln2 keeps r exact to the last bit
    const double r = (x - kd * 6.93147180369123816490e-01) - kd * 1.90821492927058770002e-10;
    double p = 1.0 / 39916800.0;  // 1/11!
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    const int64_t bits = (static_cast<int64_t>(kd) + 1023) << 52;
    double scale;
    std::memcpy(&scale, &bits, sizeof(scale));
    return p * scale;
}

double expm1_over(double z) {
    if (std::fabs(z) < kTaylorSwitch) return 1.0 + z * 0.5 + z * z * (1.0 / 6.0);
    return (poly_exp(z) - 1.0) / z;
}

// Shared by the reference and the blocked scan so that both evaluate the very
// same expression tree per step (the L=1 outputs are bit-identical). The
// euler flag is a template parameter so the hot loops stay branch-free.
template <bool Euler>
static inline Discrete discretize_t(double delta, double a, double b) {
    const double z = delta * a;
    const double e = poly_exp(z);
    Discrete d;
    d.a_bar = e;
    if constexpr (Euler) {
        d.b_bar = delta * b;
    } else {
        const double phi = std::fabs(z) < kTaylorSwitch ? 1.0 + z * 0.5 + z * z * (1.0 / 6.0)
                                                        : (e - 1.0) / z;
        d.b_bar = phi * delta * b;
    }
    return d;
}

static inline Discrete discretize_unchecked(double delta, double a, double b, bool euler) {
    return euler ? discretize_t<true>(delta, a, b) : discretize_t<false>(delta, a, b);
}

Discrete discretize(double delta, double a, double b, bool euler) {
    check(delta > 0.0, "discretize: delta must be > 0");
    check(a < 0.0, "discretize: a must be < 0");
    return discretize_unchecked(delta, a, b, euler);
}

double softplus(double x) {
    if (x > 30.0) return x;  // log1p(exp(x)) == x to double precision
    return std::log1p(std::exp(x));
}

static void validate_scan_input(const ScanInput& in, const Tensor& a_log, const Tensor& d_skip) {
    check(in.u && in.delta && in.b && in.c, "scan: null input tensor");
    const Tensor &u = *in.u, &dl = *in.delta, &b = *in.b, &c = *in.c;
    check(u.rank() == 3 && dl.rank() == 3 && b.rank() == 3 && c.rank() == 3,
          "scan: rank-3 (B,D,L)/(B,N,L) inputs required");
    check(a_log.rank() == 2, "scan: a_log must be (D,N)");
    const int64_t batch = u.dim(0), d = u.dim(1), l = u.dim(2), n = a_log.dim(1);
    check(dl.dim(0) == batch && dl.dim(1) == d && dl.dim(2) == l,
          "scan: delta shape " + dl.shape_str() + " != u shape " + u.shape_str());
    check(b.dim(0) == batch && b.dim(1) == n && b.dim(2) == l,
          "scan: b shape " + b.shape_str() + " incompatible");
    check(c.dim(0) == batch && c.dim(1) == n && c.dim(2) == l,
          "scan: c shape " + c.shape_str() + " incompatible");
    check(a_log.dim(0) == d, "scan: a_log rows " + std::to_string(a_log.dim(0)) +
                                 " != inner channels " + std::to_string(d));
    check(d_skip.numel() == d, "scan: d_skip length mismatch");
    const float* pd = dl.data();
    for (int64_t i = 0; i < dl.numel(); ++i)
        check(pd[i] > 0.0f, "scan: delta must be strictly positive");
}

Tensor selective_scan_ref(const ScanInput& in, const Tensor& a_log, const Tensor& d_skip,
                          bool euler, ScanStats* stats) {
    if (in.u == nullptr || in.u->empty()) return Tensor();
    validate_scan_input(in, a_log, d_skip);
    const Tensor &u = *in.u, &dl = *in.delta, &bmat = *in.b, &cmat = *in.c;
    const int64_t batch = u.dim(0), dch = u.dim(1), l = u.dim(2), n = a_log.dim(1);

    Tensor out({batch, dch, l});
    std::vector<double> h(static_cast<size_t>(n));
    uint64_t steps = 0;
    for (int64_t bi = 0; bi < batch; ++bi) {
        for (int64_t di = 0; di < dch; ++di) {
            std::fill(h.begin(), h.end(), 0.0);
            const double skip = d_skip[di];
            for (int64_t t = 0; t < l; ++t) {
                const double delta = dl.at3(bi, di, t);
                const double ut = u.at3(bi, di, t);
                double y = 0.0;
                for (int64_t ni = 0; ni < n; ++ni) {
                    const double a = -std::exp(static_cast<double>(a_log[di * n + ni]));
                    const Discrete dz = discretize_unchecked(delta, a, bmat.at3(bi, ni, t), euler);
                    h[static_cast<size_t>(ni)] = dz.a_bar * h[static_cast<size_t>(ni)] + dz.b_bar * ut;
                    y += static_cast<double>(cmat.at3(bi, ni, t)) * h[static_cast<size_t>(ni)];
                }
                out.at3(bi, di, t) = static_cast<float>(y + skip * ut);
                ++steps;
            }
        }
    }
    if (stats) stats->steps = steps;
    return out;
}

template <bool Euler>
static void scan_fast_rows(const Tensor& u, const Tensor& dl, const Tensor& bmat,
                           const Tensor& cmat, const Tensor& a_log, const Tensor& d_skip,
                           int64_t chunk, Tensor& out) {
    const int64_t batch = u.dim(0), dch = u.dim(1), l = u.dim(2), n = a_log.dim(1);
    parallel_for(0, batch * dch, [&](int64_t lo, int64_t hi) {
        std::vector<double> a(static_cast<size_t>(n));
        std::vector<double> abar(static_cast<size_t>(chunk * n));
        std::vector<double> bu(static_cast<size_t>(chunk * n));
        std::vector<double> ct(static_cast<size_t>(chunk * n));
        std::vector<double> h(static_cast<size_t>(n));
        for (int64_t row = lo; row < hi; ++row) {
            const int64_t bi = row / dch, di = row % dch;
            for (int64_t ni = 0; ni < n; ++ni)
                a[static_cast<size_t>(ni)] = -std::exp(static_cast<double>(a_log[di * n + ni]));
            const double skip = d_skip[di];
            std::fill(h.begin(), h.end(), 0.0);

            const float* drow = dl.data() + (bi * dch + di) * l;
            const float* urow = u.data() + (bi * dch + di) * l;
            const float* bbase = bmat.data() + bi * n * l;
            const float* cbase = cmat.data() + bi * n * l;
            float* yrow = out.data() + (bi * dch + di) * l;

            for (int64_t t0 = 0; t0 < l; t0 += chunk) {
                const int64_t tn = std::min(l, t0 + chunk) - t0;
                // stage the per-step affine maps (a_bar, b_bar*u) of this
                // chunk; the inner loop runs contiguously over t so the
                // exponentials vectorize
                for (int64_t ni = 0; ni < n; ++ni) {
                    const double a_ni = a[static_cast<size_t>(ni)];
                    const float* brow = bbase + ni * l + t0;
                    const float* crow_f = cbase + ni * l + t0;
                    double* arow = abar.data() + ni;
                    double* vrow = bu.data() + ni;
                    double* crow = ct.data() + ni;
                    for (int64_t t = 0; t < tn; ++t) {
                        const Discrete dz = discretize_t<Euler>(
                            static_cast<double>(drow[t0 + t]), a_ni,
                            static_cast<double>(brow[t]));
                        arow[t * n] = dz.a_bar;
                        vrow[t * n] = dz.b_bar * static_cast<double>(urow[t0 + t]);
                        crow[t * n] = crow_f[t];
                    }
                }
                // compose the chunk onto the carried state, in order
                for (int64_t t = 0; t < tn; ++t) {
                    const double* arow = abar.data() + t * n;
                    const double* vrow = bu.data() + t * n;
                    const double* crow = ct.data() + t * n;
                    double y = 0.0;
                    for (int64_t ni = 0; ni < n; ++ni) {
                        h[static_cast<size_t>(ni)] = arow[ni] * h[static_cast<size_t>(ni)] + vrow[ni];
                        y += crow[ni] * h[static_cast<size_t>(ni)];
                    }
                    yrow[t0 + t] = static_cast<float>(y + skip * urow[t0 + t]);
                }
            }
        }
    });
}

Tensor selective_scan_fast(const ScanInput& in, const Tensor& a_log, const Tensor& d_skip,
                           bool euler, int chunk_len) {
    if (in.u == nullptr || in.u->empty()) return Tensor();
    validate_scan_input(in, a_log, d_skip);
    check(chunk_len >= 1, "scan: chunk_len must be >= 1");
    const Tensor &u = *in.u, &dl = *in.delta, &bmat = *in.b, &cmat = *in.c;
    Tensor out({u.dim(0), u.dim(1), u.dim(2)});
    if (euler)
        scan_fast_rows<true>(u, dl, bmat, cmat, a_log, d_skip, chunk_len, out);
    else
        scan_fast_rows<false>(u, dl, bmat, cmat, a_log, d_skip, chunk_len, out);
    return out;
}

Tensor s6_layer(const Tensor& x, const S6Weights& w, const SsmOptions& opt) {
    check(x.rank() == 3, "s6_layer: rank-3 (B,D,L) input required, got " + x.shape_str());
    const int64_t batch = x.dim(0), dch = x.dim(1), l = x.dim(2);
    check(w.a_log.rank() == 2 && w.a_log.dim(0) == dch,
          "s6_layer: weights sized for " + std::to_string(w.a_log.dim(0)) +
              " channels, input has " + std::to_string(dch));
    const int64_t n = w.a_log.dim(1);
    check(w.in_proj.rank() == 2 && w.in_proj.dim(0) == 1 + 2 * n && w.in_proj.dim(1) == dch,
          "s6_layer: in_proj must be (1+2N, D)");
    check(w.dt_weight.numel() == dch && w.dt_bias.numel() == dch && w.d_skip.numel() == dch,
          "s6_layer: per-channel weight length mismatch");

    Tensor delta({batch, dch, l});
    Tensor bseq({batch, n, l});
    Tensor cseq({batch, n, l});
    const int64_t rows = 1 + 2 * n;

    std::vector<double> proj(static_cast<size_t>(rows * l));
    for (int64_t bi = 0; bi < batch; ++bi) {
        std::fill(proj.begin(), proj.end(), 0.0);
        const float* xb = x.data() + bi * dch * l;
        for (int64_t r = 0; r < rows; ++r) {
            double* prow = proj.data() + r * l;
            const float* wrow = w.in_proj.data() + r * dch;
            for (int64_t di = 0; di < dch; ++di) {
                const double wv = wrow[di];
                const float* xrow = xb + di * l;
                for (int64_t t = 0; t < l; ++t) prow[t] += wv * xrow[t];
            }
        }
        for (int64_t di = 0; di < dch; ++di) {
            const double dtw = w.dt_weight[di], dtb = w.dt_bias[di];
            float* drow = delta.data() + (bi * dch + di) * l;
            for (int64_t t = 0; t < l; ++t)
                drow[t] = static_cast<float>(
                    std::max(softplus(dtw * proj[static_cast<size_t>(t)] + dtb), kDeltaMin));
        }
        for (int64_t ni = 0; ni < n; ++ni) {
            float* brow = bseq.data() + (bi * n + ni) * l;
            float* crow = cseq.data() + (bi * n + ni) * l;
            const double* pb = proj.data() + (1 + ni) * l;
            const double* pc = proj.data() + (1 + n + ni) * l;
            for (int64_t t = 0; t < l; ++t) {
                brow[t] = static_cast<float>(pb[t]);
                crow[t] = static_cast<float>(pc[t]);
            }
        }
    }

    ScanInput in{&x, &delta, &bseq, &cseq};
    return selective_scan_fast(in, w.a_log, w.d_skip, opt.euler, opt.chunk_len);
}

Tensor cfssm(const Tensor& seq, const S6Weights& w, const SsmOptions& opt) {
    check(seq.rank() == 3 && seq.dim(1) == 1,
          "cfssm: (batch, 1, channels) sequence required, got " + seq.shape_str());
    check(seq.dim(2) >= 1, "cfssm: empty channel axis");
    return s6_layer(seq, w, opt);
}

static Tensor reverse_l(const Tensor& seq) {
    const int64_t batch = seq.dim(0), d = seq.dim(1), l = seq.dim(2);
    Tensor out({batch, d, l});
    for (int64_t bi = 0; bi < batch; ++bi)
        for (int64_t di = 0; di < d; ++di)
            for (int64_t t = 0; t < l; ++t) out.at3(bi, di, t) = seq.at3(bi, di, l - 1 - t);
    return out;
}

Tensor cbssm(const Tensor& seq, const S6Weights& w, const SsmOptions& opt) {
    check(seq.rank() == 3 && seq.dim(1) == 1,
          "cbssm: (batch, 1, channels) sequence required, got " + seq.shape_str());
    return reverse_l(cfssm(reverse_l(seq), w, opt));
}

}  // namespace wm
