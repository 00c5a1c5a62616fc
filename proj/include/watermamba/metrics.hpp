// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "watermamba/tensor.hpp"

namespace wm {
namespace metrics {

// Every constant the four metrics use, in one place.
// UIQM/UCIQE component weights follow the metric papers this engine targets.
constexpr double kUiqmC1 = 0.0282;   // UICM weight
constexpr double kUiqmC2 = 0.2953;   // UISM weight
constexpr double kUiqmC3 = 3.5753;   // UIConM weight
constexpr double kUicmMuCoeff = -0.0268;
constexpr double kUicmSigmaCoeff = 0.1586;
constexpr double kUicmAlphaTrim = 0.1;  // trimmed fraction per tail
constexpr int kMetricBlock = 8;         // UISM/UIConM block edge; remainder excluded
constexpr double kUciqeC1 = 0.4680;  // chroma std weight
constexpr double kUciqeC2 = 0.2745;  // luma contrast weight
constexpr double kUciqeC3 = 0.2576;  // saturation mean weight
constexpr double kUciqeContrastTail = 0.01;  // top/bottom quantile for luma contrast
constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;  // Rec. 601
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01, kSsimK2 = 0.03;

/// 10*log10(peak^2 / MSE); identical images give +infinity.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Single-scale SSIM on Rec. 601 luma, 11x11 Gaussian window sigma 1.5,
/// valid-region mean, unit dynamic range.
double ssim(const Tensor& a, const Tensor& b);

struct UiqmComponents {
    double uicm = 0, uism = 0, uiconm = 0, uiqm = 0;
};

/// No-reference underwater quality: colourfulness (alpha-trimmed RG/YB
/// statistics), Sobel-EME sharpness, AMEE-style block contrast.
UiqmComponents uiqm_components(const Tensor& rgb);
double uiqm(const Tensor& rgb);

struct UciqeComponents {
    double sigma_chroma = 0, contrast_luma = 0, mu_saturation = 0, uciqe = 0;
};

/// No-reference colour quality in CIELab (sRGB transfer, D65 white), with
/// L/a/b scaled by 1/100 before the statistics.
UciqeComponents uciqe_components(const Tensor& rgb);
double uciqe(const Tensor& rgb);

struct MetricRow {
    std::string name;
    std::optional<double> psnr;  // absent without a reference
    std::optional<double> ssim;
    std::optional<double> uiqm;
    std::optional<double> uciqe;
    std::string note;  // unpaired / load failure warnings
};

struct MetricReport {
    std::vector<MetricRow> rows;
    size_t images = 0;
    size_t paired = 0;
    std::optional<double> mean_psnr;
    std::optional<double> mean_ssim;
    std::optional<double> mean_uiqm;
    std::optional<double> mean_uciqe;
    std::vector<std::string> warnings;
};

struct EvalOptions {
    bool want_psnr = true;
    bool want_ssim = true;
    bool want_uiqm = true;
    bool want_uciqe = true;
    bool strict = false;
};

/// Walks input_dir (PNG/PPM, sorted by filename), pairs files with same-named
/// references when ref_dir is non-empty, and aggregates arithmetic means of
/// the present values. Unpaired or unreadable files become warning rows.
MetricReport evaluate_dir(const std::string& input_dir, const std::string& ref_dir,
                          const EvalOptions& opt);

/// Recomputes the aggregate means from the rows (used after CSV re-parse).
void aggregate(MetricReport& report);

std::string to_csv(const MetricReport& report);
MetricReport parse_csv(const std::string& csv);
std::string format_table(const MetricReport& report);

}  // namespace metrics
}  // namespace wm
