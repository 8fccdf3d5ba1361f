// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bokeh/image.hpp"

namespace bokeh {

inline constexpr double kPsnrCap = 99.0;

double mse(const RadianceImage& a, const RadianceImage& b);

/// Peak 1.0; capped at kPsnrCap (always for MSE below 1e-10).
double psnr(const RadianceImage& a, const RadianceImage& b);

/// Single-scale SSIM on Rec.709 luma with an 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, averaged over valid window positions.
double ssim(const RadianceImage& a, const RadianceImage& b);

/// Luma with Rec.709 weights.
std::vector<double> luma(const RadianceImage& img);

/// Multi-scale edge loss with Sobel pairs of size 3, 5 and 7, weighted
/// 1/l^2 and masked by the stronger of the gt and all-in-focus gradients.
double edge_loss(const RadianceImage& pred, const RadianceImage& gt, const RadianceImage& aif);

/// Scales `src` by mean(ref) / mean(src) over all samples.
RadianceImage exposure_align(const RadianceImage& src, const RadianceImage& ref);

enum class Morphology { erode, dilate };

const char* to_string(Morphology kind) noexcept;

struct DegradationSpec {
    Morphology kind = Morphology::erode;
    int radius = 0;
};

/// Grayscale min (erode) or max (dilate) over a discrete disk
/// {dx^2 + dy^2 <= r^2}; out-of-canvas taps are ignored.
DisparityMap degrade_disparity(const DisparityMap& d, const DegradationSpec& spec);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

/// Linear-interpolated quantile of unsorted values, p in [0, 1].
double quantile(std::vector<double> values, double p);
Summary summarize(std::span<const double> values);

struct MetricRow {
    std::string id;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
    std::optional<double> edge_loss;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    /// Keyed by metric name: psnr_db, ssim, mse, edge_loss.
    std::map<std::string, Summary> aggregate;
};

/// Fills the aggregate block from the rows.
MetricReport make_report(std::vector<MetricRow> rows);

std::string to_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);

}  // namespace bokeh
