// SPDX-License-Identifier: Apache-2.0
#include "bokeh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace bokeh {

namespace {

void require_same(const RadianceImage& a, const RadianceImage& b, const char* what) {
    if (!same_shape(a, b) || a.data.size() != b.data.size()) {
        throw std::invalid_argument(std::string(what) + ": image " + shape_string(a.width, a.height) + " vs " +
                                    shape_string(b.width, b.height));
    }
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double mse(const RadianceImage& a, const RadianceImage& b) {
    require_same(a, b, "mse");
    if (a.data.empty()) throw std::invalid_argument("mse: empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double e = a.data[i] - b.data[i];
        sum += e * e;
    }
    return sum / static_cast<double>(a.data.size());
}

double psnr(const RadianceImage& a, const RadianceImage& b) {
    const double e = mse(a, b);
    if (e < 1e-10) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / e));
}

std::vector<double> luma(const RadianceImage& img) {
    std::vector<double> y(img.pixel_count());
    for (std::size_t p = 0; p < y.size(); ++p) {
        y[p] = 0.2126 * img.data[p * 3] + 0.7152 * img.data[p * 3 + 1] + 0.0722 * img.data[p * 3 + 2];
    }
    return y;
}

namespace {

constexpr int kSsimWindow = 11;

std::vector<double> gaussian_window() {
    std::vector<double> g(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double x = i - half;
        g[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * 1.5 * 1.5));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Separable 'valid' filtering: output is (w - 10) x (h - 10).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& g) {
    const int k = static_cast<int>(g.size());
    const int ow = w - k + 1;
    const int oh = h - k + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += g[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += g[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    return out;
}

}  // namespace

double ssim(const RadianceImage& a, const RadianceImage& b) {
    require_same(a, b, "ssim");
    if (a.width < kSsimWindow || a.height < kSsimWindow) {
        throw std::invalid_argument("ssim: images must be at least 11x11, got " + shape_string(a.width, a.height));
    }
    const std::vector<double> ya = luma(a);
    const std::vector<double> yb = luma(b);
    std::vector<double> aa(ya.size()), bb(ya.size()), ab(ya.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        aa[i] = ya[i] * ya[i];
        bb[i] = yb[i] * yb[i];
        ab[i] = ya[i] * yb[i];
    }
    const auto g = gaussian_window();
    const auto mu_a = filter_valid(ya, a.width, a.height, g);
    const auto mu_b = filter_valid(yb, a.width, a.height, g);
    const auto e_aa = filter_valid(aa, a.width, a.height, g);
    const auto e_bb = filter_valid(bb, a.width, a.height, g);
    const auto e_ab = filter_valid(ab, a.width, a.height, g);

    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> binomial_row(int length) {
    std::vector<double> row{1.0};
    for (int i = 1; i < length; ++i) {
        std::vector<double> next(row.size() + 1, 0.0);
        for (std::size_t j = 0; j < row.size(); ++j) {
            next[j] += row[j];
            next[j + 1] += row[j];
        }
        row = std::move(next);
    }
    return row;
}

struct SobelPair {
    std::vector<double> smooth;
    std::vector<double> deriv;
};

/// Sobel kernels of odd size n: binomial smoothing and binomial(n-1)
/// convolved with [-1, 1] as the derivative.
SobelPair sobel(int size) {
    SobelPair s;
    s.smooth = binomial_row(size);
    const std::vector<double> base = binomial_row(size - 1);
    s.deriv.assign(static_cast<std::size_t>(size), 0.0);
    for (std::size_t j = 0; j < base.size(); ++j) {
        s.deriv[j] -= base[j];
        s.deriv[j + 1] += base[j];
    }
    return s;
}

/// Correlation at one position. Antisymmetric kernels (the derivative) are
/// evaluated on paired differences so that flat input gives exactly zero.
template <class Sample>
double correlate(const std::vector<double>& k, Sample&& v) {
    const int half = static_cast<int>(k.size()) / 2;
    bool odd = k[static_cast<std::size_t>(half)] == 0.0;
    for (int i = 1; odd && i <= half; ++i) {
        odd = k[static_cast<std::size_t>(half + i)] == -k[static_cast<std::size_t>(half - i)];
    }
    double s = 0.0;
    if (odd) {
        for (int i = 1; i <= half; ++i) s += k[static_cast<std::size_t>(half + i)] * (v(i) - v(-i));
        return s;
    }
    for (int i = -half; i <= half; ++i) s += k[static_cast<std::size_t>(i + half)] * v(i);
    return s;
}

/// Correlates one channel with kx along x and ky along y, replicating the
/// border.
std::vector<double> separable(const RadianceImage& img, int channel, const std::vector<double>& kx,
                              const std::vector<double>& ky) {
    const int w = img.width;
    const int h = img.height;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            tmp[static_cast<std::size_t>(y) * w + x] =
                correlate(kx, [&](int i) { return img.at(std::clamp(x + i, 0, w - 1), y, channel); });
        }
    }
    std::vector<double> out(tmp.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] = correlate(
                ky, [&](int i) { return tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x]; });
        }
    }
    return out;
}

}  // namespace

double edge_loss(const RadianceImage& pred, const RadianceImage& gt, const RadianceImage& aif) {
    require_same(pred, gt, "edge_loss");
    require_same(gt, aif, "edge_loss");
    if (pred.data.empty()) throw std::invalid_argument("edge_loss: empty images");
    double total = 0.0;
    for (int level = 1; level <= 3; ++level) {
        const SobelPair k = sobel(2 * level + 1);
        double sum = 0.0;
        std::size_t count = 0;
        for (int c = 0; c < 3; ++c) {
            for (int orientation = 0; orientation < 2; ++orientation) {
                const auto& kx = orientation == 0 ? k.deriv : k.smooth;
                const auto& ky = orientation == 0 ? k.smooth : k.deriv;
                const auto gp = separable(pred, c, kx, ky);
                const auto gg = separable(gt, c, kx, ky);
                const auto gf = separable(aif, c, kx, ky);
                for (std::size_t i = 0; i < gp.size(); ++i) {
                    const double weight = std::max(std::abs(gg[i]), std::abs(gf[i]));
                    sum += std::abs(gp[i] - gg[i]) * weight;
                }
                count += gp.size();
            }
        }
        total += sum / static_cast<double>(count) / (level * level);
    }
    return total;
}

RadianceImage exposure_align(const RadianceImage& src, const RadianceImage& ref) {
    const double ms = mean_of(src.data);
    if (!(ms > 1e-8)) throw std::invalid_argument("exposure_align: source mean is too close to zero");
    const double gain = mean_of(ref.data) / ms;
    RadianceImage out = src;
    for (double& v : out.data) v *= gain;
    return out;
}

const char* to_string(Morphology kind) noexcept { return kind == Morphology::erode ? "erode" : "dilate"; }

DisparityMap degrade_disparity(const DisparityMap& d, const DegradationSpec& spec) {
    if (spec.radius < 0) throw std::invalid_argument("degradation radius must be >= 0");
    if (spec.radius == 0) return d;
    const int r = spec.radius;
    std::vector<std::pair<int, int>> disk;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dx * dx + dy * dy <= r * r) disk.emplace_back(dx, dy);
        }
    }
    const bool erode = spec.kind == Morphology::erode;
    DisparityMap out(d.width, d.height);
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            double v = d.at(x, y);
            for (auto [dx, dy] : disk) {
                const int xx = x + dx;
                const int yy = y + dy;
                if (xx < 0 || yy < 0 || xx >= d.width || yy >= d.height) continue;
                v = erode ? std::min(v, d.at(xx, yy)) : std::max(v, d.at(xx, yy));
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

Summary summarize(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    Summary s;
    s.mean = mean_of(v);
    s.median = quantile(v, 0.5);
    s.q1 = quantile(v, 0.25);
    s.q3 = quantile(v, 0.75);
    return s;
}

MetricReport make_report(std::vector<MetricRow> rows) {
    MetricReport report;
    report.rows = std::move(rows);
    if (report.rows.empty()) return report;
    std::vector<double> psnr_v, ssim_v, mse_v, edge_v;
    for (const MetricRow& r : report.rows) {
        psnr_v.push_back(r.psnr_db);
        ssim_v.push_back(r.ssim);
        mse_v.push_back(r.mse);
        if (r.edge_loss) edge_v.push_back(*r.edge_loss);
    }
    report.aggregate["psnr_db"] = summarize(psnr_v);
    report.aggregate["ssim"] = summarize(ssim_v);
    report.aggregate["mse"] = summarize(mse_v);
    if (!edge_v.empty()) report.aggregate["edge_loss"] = summarize(edge_v);
    return report;
}

std::string to_json(const MetricReport& report) {
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const MetricRow& r : report.rows) {
        nlohmann::ordered_json row;
        row["id"] = r.id;
        row["psnr_db"] = r.psnr_db;
        row["ssim"] = r.ssim;
        row["mse"] = r.mse;
        if (r.edge_loss) row["edge_loss"] = *r.edge_loss;
        j["rows"].push_back(std::move(row));
    }
    j["aggregate"] = nlohmann::ordered_json::object();
    for (const auto& [name, s] : report.aggregate) {
        j["aggregate"][name] = {{"mean", s.mean}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
    }
    return j.dump(2) + "\n";
}

MetricReport metric_report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricReport report;
    for (const auto& row : j.at("rows")) {
        MetricRow r;
        r.id = row.at("id").get<std::string>();
        r.psnr_db = row.at("psnr_db").get<double>();
        r.ssim = row.at("ssim").get<double>();
        r.mse = row.at("mse").get<double>();
        if (row.contains("edge_loss")) r.edge_loss = row.at("edge_loss").get<double>();
        report.rows.push_back(std::move(r));
    }
    for (const auto& [name, s] : j.at("aggregate").items()) {
        report.aggregate[name] = Summary{s.at("mean").get<double>(), s.at("median").get<double>(),
                                         s.at("q1").get<double>(), s.at("q3").get<double>()};
    }
    return report;
}

}  // namespace bokeh
