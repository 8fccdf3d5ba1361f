// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace bokeh::testing {

namespace {

double field_at(const DisparityMap& d, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, d.width - 1);
    const int y1 = std::min(y0 + 1, d.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double a = d.data[static_cast<std::size_t>(y0) * d.width + x0];
    const double b = d.data[static_cast<std::size_t>(y0) * d.width + x1];
    const double c = d.data[static_cast<std::size_t>(y1) * d.width + x0];
    const double e = d.data[static_cast<std::size_t>(y1) * d.width + x1];
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + e * fx) * fy;
}

bool inside(const DisparityMap& d, double x, double y) {
    return x >= 0 && y >= 0 && x <= d.width - 1 && y <= d.height - 1;
}

/// Ray from the receiver (qx, qy) to a source at disparity ds.
bool unblocked(const DisparityMap& d, double qx, double qy, double sx, double sy, double ds, int n) {
    for (int j = 0; j < n; ++j) {
        const double dt = ds + (1 - ds) * (j + 0.5) / n;
        const double c = ((1 - dt) * ds) / ((1 - ds) * dt);
        const double px = c * (sx - qx) + qx;
        const double py = c * (sy - qy) + qy;
        if (!inside(d, px, py)) continue;
        if (field_at(d, px, py) >= dt) return false;
    }
    return true;
}

int mirror(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -1 - i : 2 * n - 1 - i;
    return i;
}

}  // namespace

std::vector<pisa::Vec2> vogel_offsets(int n, double eps) {
    std::vector<pisa::Vec2> out;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double r = eps * std::sqrt(static_cast<double>(i) / n);
        out.push_back({r * std::cos(golden * i), r * std::sin(golden * i)});
    }
    return out;
}

NaivePisa naive_pisa(const pisa::AttentionBatch& batch, const pisa::GeometryContext& geom, double aperture,
                     double focus, double sharpness, const std::vector<pisa::Vec2>& offsets, int depth_samples) {
    const std::size_t n = batch.query.rows;
    const std::size_t dk = batch.query.cols;
    const std::size_t dv = batch.value.cols;
    pisa::Matrix s(n, n), c(n, n);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < n; ++k) {
            double dot = 0;
            for (std::size_t i = 0; i < dk; ++i) dot += batch.query(q, i) * batch.key(k, i);
            s(q, k) = dot / std::sqrt(static_cast<double>(dk));
            const double dx = geom.positions[q].x - geom.positions[k].x;
            const double dy = geom.positions[q].y - geom.positions[k].y;
            const double margin = aperture * std::abs(focus - geom.disparities[k]) -
                                  geom.pixel_scale * std::sqrt(dx * dx + dy * dy);
            c(q, k) = 1.0 / (1.0 + std::exp(-sharpness * margin));
        }
    }
    NaivePisa r{pisa::Matrix(n, n), pisa::Matrix(n, n), pisa::Matrix(n, dv)};
    for (std::size_t k = 0; k < n; ++k) {
        double top = -1e300;
        for (std::size_t q = 0; q < n; ++q) top = std::max(top, s(q, k));
        double z = 0;
        for (std::size_t q = 0; q < n; ++q) z += c(q, k) * std::exp(s(q, k) - top);
        for (std::size_t q = 0; q < n; ++q) {
            r.attention(q, k) = z > 0 ? c(q, k) * std::exp(s(q, k) - top) / z : 0.0;
        }
    }
    const DisparityMap& f = geom.field;
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < n; ++k) {
            int seen = 0;
            for (const pisa::Vec2& o : offsets) {
                const double sx = geom.positions[k].x + o.x;
                const double sy = geom.positions[k].y + o.y;
                double ds = field_at(f, std::clamp(sx, 0.0, f.width - 1.0), std::clamp(sy, 0.0, f.height - 1.0));
                ds = std::clamp(ds, 1e-4, 1 - 1e-4);
                seen += unblocked(f, geom.positions[q].x, geom.positions[q].y, sx, sy, ds, depth_samples) ? 1 : 0;
            }
            r.visibility(q, k) = static_cast<double>(seen) / offsets.size();
            for (std::size_t j = 0; j < dv; ++j) {
                r.output(q, j) += r.attention(q, k) * r.visibility(q, k) * batch.value(k, j);
            }
        }
    }
    return r;
}

std::vector<DiskTap> disk_taps(double radius) {
    const double r = std::round(radius * 16.0) / 16.0;
    if (r < 0.5) return {{0, 0, 1.0}};
    std::vector<DiskTap> taps;
    double total = 0;
    const int e = static_cast<int>(std::ceil(r)) + 1;
    for (int dy = -e; dy <= e; ++dy) {
        for (int dx = -e; dx <= e; ++dx) {
            int hits = 0;
            for (int j = 0; j < 4; ++j) {
                for (int i = 0; i < 4; ++i) {
                    const double px = dx - 0.375 + 0.25 * i;
                    const double py = dy - 0.375 + 0.25 * j;
                    if (px * px + py * py <= r * r) ++hits;
                }
            }
            if (hits) {
                taps.push_back({dx, dy, hits / 16.0});
                total += hits / 16.0;
            }
        }
    }
    for (DiskTap& t : taps) t.weight /= total;
    return taps;
}

std::vector<double> brute_scatter(const std::vector<double>& values, int channels, int width, int height,
                                  const std::vector<double>& radii) {
    std::vector<double> out(values.size(), 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * width + x;
            for (const DiskTap& t : disk_taps(radii[p])) {
                const std::size_t q = static_cast<std::size_t>(mirror(y + t.dy, height)) * width + mirror(x + t.dx, width);
                for (int c = 0; c < channels; ++c) out[q * channels + c] += t.weight * values[p * channels + c];
            }
        }
    }
    return out;
}

RadianceImage brute_render_from_disparity(const RadianceImage& img, const DisparityMap& d, double aperture,
                                          double focus, int depth_samples) {
    RadianceImage out(img.width, img.height);
    const int w = img.width;
    const int h = img.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double ds = d.at(x, y);
            const auto taps = disk_taps(aperture * std::abs(focus - ds));
            std::vector<double> keep(taps.size(), 0.0);
            double z = 0;
            for (std::size_t i = 0; i < taps.size(); ++i) {
                if (unblocked(d, x + taps[i].dx, y + taps[i].dy, x, y, ds, depth_samples)) {
                    keep[i] = taps[i].weight;
                    z += keep[i];
                }
            }
            for (std::size_t i = 0; i < taps.size(); ++i) {
                if (keep[i] == 0) continue;
                const int tx = mirror(x + taps[i].dx, w);
                const int ty = mirror(y + taps[i].dy, h);
                for (int c = 0; c < 3; ++c) out.at(tx, ty, c) += keep[i] / z * img.at(x, y, c);
            }
        }
    }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace bokeh::testing
