// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "watermamba/image_io.hpp"

namespace wm {
namespace metrics {

namespace {

struct Rgb {
    const float* p;
    int64_t h, w;
    const float* chan(int c) const { return p + c * h * w; }
};

Rgb as_rgb(const Tensor& t, const char* op) {
    if (t.rank() == 3) {
        check(t.dim(0) == 3, std::string(op) + ": RGB input required, got " + t.shape_str());
        return {t.data(), t.dim(1), t.dim(2)};
    }
    check(t.rank() == 4 && t.dim(0) == 1 && t.dim(1) == 3,
          std::string(op) + ": RGB input required, got " + t.shape_str());
    return {t.data(), t.dim(2), t.dim(3)};
}

double alpha_trimmed_mean(std::vector<double> v, double alpha) {
    std::sort(v.begin(), v.end());
    const size_t t = static_cast<size_t>(std::floor(alpha * static_cast<double>(v.size())));
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = t; i + t < v.size(); ++i) {
        sum += v[i];
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

// Sobel gradient magnitude with replicate-edge padding.
std::vector<double> sobel_magnitude(const float* p, int64_t h, int64_t w) {
    std::vector<double> mag(static_cast<size_t>(h * w));
    auto at = [&](int64_t y, int64_t x) {
        y = std::clamp<int64_t>(y, 0, h - 1);
        x = std::clamp<int64_t>(x, 0, w - 1);
        return static_cast<double>(p[y * w + x]);
    };
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const double gx = -at(y - 1, x - 1) + at(y - 1, x + 1) - 2 * at(y, x - 1) +
                              2 * at(y, x + 1) - at(y + 1, x - 1) + at(y + 1, x + 1);
            const double gy = -at(y - 1, x - 1) - 2 * at(y - 1, x) - at(y - 1, x + 1) +
                              at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1);
            mag[static_cast<size_t>(y * w + x)] = std::sqrt(gx * gx + gy * gy);
        }
    return mag;
}

// EME over non-overlapping blocks, remainder rows/cols excluded; blocks with
// a zero extremum contribute zero.
double eme(const std::vector<double>& img, int64_t h, int64_t w) {
    const int64_t bh = h / kMetricBlock, bw = w / kMetricBlock;
    if (bh == 0 || bw == 0) return 0.0;
    double sum = 0.0;
    for (int64_t by = 0; by < bh; ++by)
        for (int64_t bx = 0; bx < bw; ++bx) {
            double mx = 0.0, mn = std::numeric_limits<double>::infinity();
            for (int64_t y = by * kMetricBlock; y < (by + 1) * kMetricBlock; ++y)
                for (int64_t x = bx * kMetricBlock; x < (bx + 1) * kMetricBlock; ++x) {
                    const double v = img[static_cast<size_t>(y * w + x)];
                    mx = std::max(mx, v);
                    mn = std::min(mn, v);
                }
            if (mx > 0.0 && mn > 0.0) sum += std::log(mx / mn);
        }
    return 2.0 / static_cast<double>(bh * bw) * sum;
}

struct Lab {
    std::vector<double> l, a, b;  // scaled by 1/100
};

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

Lab rgb_to_lab(const Rgb& img) {
    const int64_t n = img.h * img.w;
    Lab lab;
    lab.l.resize(static_cast<size_t>(n));
    lab.a.resize(static_cast<size_t>(n));
    lab.b.resize(static_cast<size_t>(n));
    constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;  // D65
    auto f = [](double t) {
        constexpr double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
    };
    for (int64_t i = 0; i < n; ++i) {
        const double r = srgb_to_linear(img.chan(0)[i]);
        const double g = srgb_to_linear(img.chan(1)[i]);
        const double b = srgb_to_linear(img.chan(2)[i]);
        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        const double fx = f(x / xn), fy = f(y / yn), fz = f(z / zn);
        lab.l[static_cast<size_t>(i)] = (116.0 * fy - 16.0) / 100.0;
        lab.a[static_cast<size_t>(i)] = 500.0 * (fx - fy) / 100.0;
        lab.b[static_cast<size_t>(i)] = 200.0 * (fy - fz) / 100.0;
    }
    return lab;
}

// 11-tap Gaussian, sigma 1.5, normalized
std::vector<double> ssim_window() {
    std::vector<double> k(kSsimWindow);
    const double c = (kSsimWindow - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - c;
        k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[static_cast<size_t>(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// separable valid-region filtering: (h, w) -> (h - win + 1, w - win + 1)
std::vector<double> filter_valid(const std::vector<double>& img, int64_t h, int64_t w,
                                 const std::vector<double>& k, int64_t& oh, int64_t& ow) {
    const int64_t win = static_cast<int64_t>(k.size());
    ow = w - win + 1;
    oh = h - win + 1;
    std::vector<double> horiz(static_cast<size_t>(h * ow));
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int64_t i = 0; i < win; ++i)
                s += k[static_cast<size_t>(i)] * img[static_cast<size_t>(y * w + x + i)];
            horiz[static_cast<size_t>(y * ow + x)] = s;
        }
    std::vector<double> out(static_cast<size_t>(oh * ow));
    for (int64_t y = 0; y < oh; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int64_t i = 0; i < win; ++i)
                s += k[static_cast<size_t>(i)] * horiz[static_cast<size_t>((y + i) * ow + x)];
            out[static_cast<size_t>(y * ow + x)] = s;
        }
    return out;
}

std::vector<double> luma_plane(const Rgb& img) {
    std::vector<double> y(static_cast<size_t>(img.h * img.w));
    for (int64_t i = 0; i < img.h * img.w; ++i)
        y[static_cast<size_t>(i)] = kLumaR * img.chan(0)[i] + kLumaG * img.chan(1)[i] +
                                    kLumaB * img.chan(2)[i];
    return y;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, double peak) {
    check(a.same_shape(b), "psnr: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    check(peak > 0.0, "psnr: peak must be positive");
    double mse = 0.0;
    const float* pa = a.data();
    const float* pb = b.data();
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), "ssim: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    const Rgb ia = as_rgb(a, "ssim"), ib = as_rgb(b, "ssim");
    check(ia.h >= kSsimWindow && ia.w >= kSsimWindow,
          "ssim: image smaller than the 11x11 window; resize it first");

    const auto k = ssim_window();
    const auto x = luma_plane(ia);
    const auto y = luma_plane(ib);
    const int64_t n = ia.h * ia.w;
    std::vector<double> xx(static_cast<size_t>(n)), yy(static_cast<size_t>(n)),
        xy(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const size_t s = static_cast<size_t>(i);
        xx[s] = x[s] * x[s];
        yy[s] = y[s] * y[s];
        xy[s] = x[s] * y[s];
    }
    int64_t oh = 0, ow = 0;
    const auto mx = filter_valid(x, ia.h, ia.w, k, oh, ow);
    const auto my = filter_valid(y, ia.h, ia.w, k, oh, ow);
    const auto mxx = filter_valid(xx, ia.h, ia.w, k, oh, ow);
    const auto myy = filter_valid(yy, ia.h, ia.w, k, oh, ow);
    const auto mxy = filter_valid(xy, ia.h, ia.w, k, oh, ow);

    constexpr double c1 = kSsimK1 * kSsimK1;  // (K1 * L)^2 with L = 1
    constexpr double c2 = kSsimK2 * kSsimK2;
    double sum = 0.0;
    for (int64_t i = 0; i < oh * ow; ++i) {
        const size_t s = static_cast<size_t>(i);
        const double vx = mxx[s] - mx[s] * mx[s];
        const double vy = myy[s] - my[s] * my[s];
        const double cxy = mxy[s] - mx[s] * my[s];
        const double num = (2.0 * mx[s] * my[s] + c1) * (2.0 * cxy + c2);
        const double den = (mx[s] * mx[s] + my[s] * my[s] + c1) * (vx + vy + c2);
        sum += num / den;
    }
    return sum / static_cast<double>(oh * ow);
}

UiqmComponents uiqm_components(const Tensor& rgb) {
    const Rgb img = as_rgb(rgb, "uiqm");
    const int64_t n = img.h * img.w;
    UiqmComponents out;

    // UICM: alpha-trimmed colourfulness of the opponent channels
    std::vector<double> rg(static_cast<size_t>(n)), yb(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const double r = img.chan(0)[i], g = img.chan(1)[i], b = img.chan(2)[i];
        rg[static_cast<size_t>(i)] = r - g;
        yb[static_cast<size_t>(i)] = (r + g) / 2.0 - b;
    }
    const double mu_rg = alpha_trimmed_mean(rg, kUicmAlphaTrim);
    const double mu_yb = alpha_trimmed_mean(yb, kUicmAlphaTrim);
    double var_rg = 0.0, var_yb = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        var_rg += (rg[static_cast<size_t>(i)] - mu_rg) * (rg[static_cast<size_t>(i)] - mu_rg);
        var_yb += (yb[static_cast<size_t>(i)] - mu_yb) * (yb[static_cast<size_t>(i)] - mu_yb);
    }
    var_rg /= static_cast<double>(n);
    var_yb /= static_cast<double>(n);
    out.uicm = kUicmMuCoeff * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) +
               kUicmSigmaCoeff * std::sqrt(var_rg + var_yb);

    // UISM: per-channel Sobel edge maps weighted into an EME sharpness score
    const double lw[3] = {kLumaR, kLumaG, kLumaB};
    for (int c = 0; c < 3; ++c) {
        auto mag = sobel_magnitude(img.chan(c), img.h, img.w);
        for (int64_t i = 0; i < n; ++i)
            mag[static_cast<size_t>(i)] *= static_cast<double>(img.chan(c)[i]);
        out.uism += lw[c] * eme(mag, img.h, img.w);
    }

    // UIConM: AMEE-style Michelson block contrast over all three channels
    const int64_t bh = img.h / kMetricBlock, bw = img.w / kMetricBlock;
    if (bh > 0 && bw > 0) {
        double sum = 0.0;
        for (int64_t by = 0; by < bh; ++by)
            for (int64_t bx = 0; bx < bw; ++bx) {
                double mx = -std::numeric_limits<double>::infinity();
                double mn = std::numeric_limits<double>::infinity();
                for (int c = 0; c < 3; ++c)
                    for (int64_t y = by * kMetricBlock; y < (by + 1) * kMetricBlock; ++y)
                        for (int64_t x = bx * kMetricBlock; x < (bx + 1) * kMetricBlock; ++x) {
                            const double v = img.chan(c)[y * img.w + x];
                            mx = std::max(mx, v);
                            mn = std::min(mn, v);
                        }
                const double top = mx - mn, bot = mx + mn;
                if (top > 0.0 && bot > 0.0) sum += top / bot * std::log(top / bot);
            }
        out.uiconm = -sum / static_cast<double>(bh * bw);
    }

    out.uiqm = kUiqmC1 * out.uicm + kUiqmC2 * out.uism + kUiqmC3 * out.uiconm;
    return out;
}

double uiqm(const Tensor& rgb) {
    return uiqm_components(rgb).uiqm;
}

UciqeComponents uciqe_components(const Tensor& rgb) {
    const Rgb img = as_rgb(rgb, "uciqe");
    const Lab lab = rgb_to_lab(img);
    const size_t n = lab.l.size();
    UciqeComponents out;

    std::vector<double> chroma(n);
    double mean_c = 0.0;
    for (size_t i = 0; i < n; ++i) {
        chroma[i] = std::sqrt(lab.a[i] * lab.a[i] + lab.b[i] * lab.b[i]);
        mean_c += chroma[i];
    }
    mean_c /= static_cast<double>(n);
    double var_c = 0.0;
    for (size_t i = 0; i < n; ++i) var_c += (chroma[i] - mean_c) * (chroma[i] - mean_c);
    out.sigma_chroma = std::sqrt(var_c / static_cast<double>(n));

    // luma contrast: nearest-rank quantile spread of L
    std::vector<double> sorted_l = lab.l;
    std::sort(sorted_l.begin(), sorted_l.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        return sorted_l[static_cast<size_t>(std::llround(pos))];
    };
    out.contrast_luma = quantile(1.0 - kUciqeContrastTail) - quantile(kUciqeContrastTail);

    double sum_s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double den = std::sqrt(chroma[i] * chroma[i] + lab.l[i] * lab.l[i]);
        sum_s += den > 0.0 ? chroma[i] / den : 0.0;
    }
    out.mu_saturation = sum_s / static_cast<double>(n);

    out.uciqe = kUciqeC1 * out.sigma_chroma + kUciqeC2 * out.contrast_luma +
                kUciqeC3 * out.mu_saturation;
    return out;
}

double uciqe(const Tensor& rgb) {
    return uciqe_components(rgb).uciqe;
}

namespace {

std::string fmt_value(const std::optional<double>& v) {
    if (!v) return "";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

std::optional<double> parse_value(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::optional<double> mean_of(const std::vector<MetricRow>& rows,
                              std::optional<double> MetricRow::* field) {
    double sum = 0.0;
    size_t n = 0;
    for (const auto& r : rows) {
        if (r.*field) {
            sum += *(r.*field);
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

void aggregate(MetricReport& report) {
    report.images = report.rows.size();
    report.paired = 0;
    for (const auto& r : report.rows)
        if (r.psnr || r.ssim) ++report.paired;
    report.mean_psnr = mean_of(report.rows, &MetricRow::psnr);
    report.mean_ssim = mean_of(report.rows, &MetricRow::ssim);
    report.mean_uiqm = mean_of(report.rows, &MetricRow::uiqm);
    report.mean_uciqe = mean_of(report.rows, &MetricRow::uciqe);
}

MetricReport evaluate_dir(const std::string& input_dir, const std::string& ref_dir,
                          const EvalOptions& opt) {
    namespace fs = std::filesystem;
    check(fs::is_directory(input_dir), "eval: '" + input_dir + "' is not a directory");
    if (!ref_dir.empty())
        check(fs::is_directory(ref_dir), "eval: '" + ref_dir + "' is not a directory");

    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(input_dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        for (auto& ch : ext) ch = static_cast<char>(std::tolower(ch));
        if (ext == ".png" || ext == ".ppm") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());

    MetricReport report;
    for (const auto& name : names) {
        MetricRow row;
        row.name = name;
        Tensor img;
        try {
            img = image_to_tensor(load_image((fs::path(input_dir) / name).string()));
        } catch (const std::exception& e) {
            row.note = std::string("unreadable: ") + e.what();
            report.warnings.push_back(name + ": " + row.note);
            report.rows.push_back(std::move(row));
            continue;
        }
        if (opt.want_uiqm) row.uiqm = uiqm(img);
        if (opt.want_uciqe) row.uciqe = uciqe(img);
        if (!ref_dir.empty() && (opt.want_psnr || opt.want_ssim)) {
            const fs::path ref_path = fs::path(ref_dir) / name;
            if (!fs::exists(ref_path)) {
                row.note = "no reference";
                report.warnings.push_back(name + ": unpaired, excluded from PSNR/SSIM means");
            } else {
                try {
                    Tensor ref = image_to_tensor(load_image(ref_path.string()));
                    check(ref.same_shape(img), "reference size differs");
                    if (opt.want_psnr) row.psnr = psnr(img, ref);
                    if (opt.want_ssim) row.ssim = ssim(img, ref);
                } catch (const std::exception& e) {
                    row.note = std::string("reference unusable: ") + e.what();
                    report.warnings.push_back(name + ": " + row.note);
                }
            }
        }
        report.rows.push_back(std::move(row));
    }
    aggregate(report);
    return report;
}

std::string to_csv(const MetricReport& report) {
    std::ostringstream os;
    os << "path,psnr,ssim,uiqm,uciqe\n";
    for (const auto& r : report.rows) {
        os << r.name << ',' << fmt_value(r.psnr) << ',' << fmt_value(r.ssim) << ','
           << fmt_value(r.uiqm) << ',' << fmt_value(r.uciqe) << "\n";
    }
    return os.str();
}

MetricReport parse_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    check(static_cast<bool>(std::getline(is, line)) && line == "path,psnr,ssim,uiqm,uciqe",
          "csv: missing header row");
    MetricReport report;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 5) fields.emplace_back();
        MetricRow row;
        row.name = fields[0];
        row.psnr = parse_value(fields[1]);
        row.ssim = parse_value(fields[2]);
        row.uiqm = parse_value(fields[3]);
        row.uciqe = parse_value(fields[4]);
        report.rows.push_back(std::move(row));
    }
    aggregate(report);
    return report;
}

std::string format_table(const MetricReport& report) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-32s %10s %8s %8s %8s\n", "image", "PSNR", "SSIM", "UIQM",
                  "UCIQE");
    os << buf;
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        if (std::isinf(*v)) return std::string(*v > 0 ? "inf" : "-inf");
        char b[32];
        std::snprintf(b, sizeof(b), "%.3f", *v);
        return std::string(b);
    };
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-32s %10s %8s %8s %8s %s\n", r.name.c_str(),
                      cell(r.psnr).c_str(), cell(r.ssim).c_str(), cell(r.uiqm).c_str(),
                      cell(r.uciqe).c_str(), r.note.c_str());
        os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-32s %10s %8s %8s %8s\n",
                  ("mean over " + std::to_string(report.images) + " image(s)").c_str(),
                  cell(report.mean_psnr).c_str(), cell(report.mean_ssim).c_str(),
                  cell(report.mean_uiqm).c_str(), cell(report.mean_uciqe).c_str());
    os << buf;
    return os.str();
}

}  // namespace metrics
}  // namespace wm
