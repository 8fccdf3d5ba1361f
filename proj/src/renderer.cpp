// SPDX-License-Identifier: Apache-2.0
#include "bokeh/renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "bokeh/parallel.hpp"
#include "bokeh/pisa.hpp"

namespace bokeh {

double DisparityPlane::at(double x, double y) const noexcept {
    return clamp_disparity(std::clamp(d0 + gx * (x - cx) + gy * (y - cy), lo, hi));
}

void validate(const RenderConfig& cfg) {
    if (!(cfg.max_radius >= 0.0)) throw std::invalid_argument("render config: max_radius must be >= 0");
    if (cfg.occlusion_samples < 1) throw std::invalid_argument("render config: occlusion_samples must be >= 1");
}

void validate(const LayeredScene& scene) {
    if (scene.width <= 0 || scene.height <= 0) throw std::invalid_argument("scene: empty canvas");
    const Layer& bg = scene.background;
    if (bg.rgba.width != scene.width || bg.rgba.height != scene.height || bg.offset_x != 0 || bg.offset_y != 0) {
        throw std::invalid_argument("scene: background must cover the canvas exactly");
    }
    validate(bg.rgba);
    for (std::size_t p = 0; p < bg.rgba.pixel_count(); ++p) {
        if (bg.rgba.data[p * 4 + 3] != 1.0) throw std::invalid_argument("scene: background must be opaque");
    }
    std::vector<double> depths;
    for (const Layer& layer : scene.foregrounds) {
        validate(layer.rgba);
        depths.push_back(layer.plane.d0);
    }
    std::sort(depths.begin(), depths.end());
    if (std::adjacent_find(depths.begin(), depths.end()) != depths.end()) {
        throw std::invalid_argument("scene: foreground layers must have distinct d0");
    }
}

std::vector<std::size_t> back_to_front(const LayeredScene& scene) {
    std::vector<std::size_t> order(scene.foregrounds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.foregrounds[a].plane.d0 < scene.foregrounds[b].plane.d0;
    });
    return order;
}

LayerFragment layer_disparity(const Layer& layer, int canvas_width, int canvas_height) {
    const int x0 = std::max(layer.offset_x, 0);
    const int y0 = std::max(layer.offset_y, 0);
    const int x1 = std::min(layer.offset_x + layer.rgba.width, canvas_width);
    const int y1 = std::min(layer.offset_y + layer.rgba.height, canvas_height);
    if (x0 >= x1 || y0 >= y1) throw std::invalid_argument("layer lies entirely off the canvas");
    LayerFragment f;
    f.x0 = x0;
    f.y0 = y0;
    f.disparity = DisparityMap(x1 - x0, y1 - y0);
    f.alpha.resize(f.disparity.pixel_count());
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            f.disparity.at(x - x0, y - y0) = layer.plane.at(x, y);
            f.alpha[f.disparity.index(x - x0, y - y0)] = layer.rgba.at(x - layer.offset_x, y - layer.offset_y, 3);
        }
    }
    return f;
}

LayerIndexMap scene_layer_index(const LayeredScene& scene) {
    validate(scene);
    LayerIndexMap owner(scene.width, scene.height, 0);
    for (std::size_t i : back_to_front(scene)) {
        const Layer& layer = scene.foregrounds[i];
        const int x0 = std::max(layer.offset_x, 0);
        const int y0 = std::max(layer.offset_y, 0);
        const int x1 = std::min(layer.offset_x + layer.rgba.width, scene.width);
        const int y1 = std::min(layer.offset_y + layer.rgba.height, scene.height);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                if (layer.rgba.at(x - layer.offset_x, y - layer.offset_y, 3) > 0.5) {
                    owner.at(x, y) = static_cast<int>(i) + 1;
                }
            }
        }
    }
    return owner;
}

DisparityMap scene_disparity(const LayeredScene& scene) {
    const LayerIndexMap owner = scene_layer_index(scene);
    DisparityMap d(scene.width, scene.height);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            const int id = owner.at(x, y);
            const Layer& layer = id == 0 ? scene.background : scene.foregrounds[static_cast<std::size_t>(id - 1)];
            d.at(x, y) = layer.plane.at(x, y);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Disk kernels

namespace {

constexpr int kSubsamples = 4;    // per axis, for rim coverage
constexpr int kRadiusSteps = 16;  // kernel radius quantization, per pixel
constexpr int kBandRows = 16;     // source rows per accumulation band

struct Tap {
    int dx = 0;
    int dy = 0;
    double coverage = 0.0;
};

struct KernelRow {
    int dy = 0;
    int full_lo = 0;  // fully covered taps span [full_lo, full_hi]; empty if lo > hi
    int full_hi = -1;
    std::vector<Tap> partial;
};

struct DiskKernel {
    bool identity = true;
    int extent = 0;
    double total = 1.0;
    /// Largest tap distance from the center.
    double reach = 0.0;
    std::vector<KernelRow> rows;
    std::vector<Tap> taps;
};

int radius_key(double r) { return static_cast<int>(std::lround(r * kRadiusSteps)); }

DiskKernel build_kernel(int key) {
    DiskKernel k;
    const double r = static_cast<double>(key) / kRadiusSteps;
    if (r < 0.5) return k;
    k.identity = false;
    k.extent = static_cast<int>(std::floor(r + 0.375));
    const double r2 = r * r;
    std::array<double, kSubsamples> sub{};
    for (int i = 0; i < kSubsamples; ++i) sub[static_cast<std::size_t>(i)] = (i + 0.5) / kSubsamples - 0.5;

    k.total = 0.0;
    for (int dy = -k.extent; dy <= k.extent; ++dy) {
        KernelRow row;
        row.dy = dy;
        row.full_lo = 1;
        row.full_hi = 0;
        for (int dx = -k.extent; dx <= k.extent; ++dx) {
            int inside = 0;
            for (double oy : sub) {
                for (double ox : sub) {
                    const double px = dx + ox;
                    const double py = dy + oy;
                    if (px * px + py * py <= r2) ++inside;
                }
            }
            if (inside == 0) continue;
            const double cov = static_cast<double>(inside) / (kSubsamples * kSubsamples);
            k.taps.push_back({dx, dy, cov});
            k.reach = std::max(k.reach, std::sqrt(static_cast<double>(dx * dx + dy * dy)));
            k.total += cov;
            if (inside == kSubsamples * kSubsamples) {
                if (row.full_lo > row.full_hi) row.full_lo = row.full_hi = dx;
                else row.full_hi = dx;
            } else {
                row.partial.push_back({dx, dy, cov});
            }
        }
        if (row.full_lo <= row.full_hi || !row.partial.empty()) k.rows.push_back(std::move(row));
    }
    return k;
}

const DiskKernel* kernel_for(int key) {
    static std::mutex mutex;
    static std::vector<std::unique_ptr<DiskKernel>> cache;
    std::lock_guard lock(mutex);
    if (static_cast<std::size_t>(key) >= cache.size()) cache.resize(static_cast<std::size_t>(key) + 1);
    auto& slot = cache[static_cast<std::size_t>(key)];
    if (!slot) slot = std::make_unique<DiskKernel>(build_kernel(key));
    return slot.get();
}

/// Mirror index into [0, n) with period 2n (edge pixel repeated).
int fold(int i, int n) noexcept {
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

/// Range maxima of a disparity map: level k stores the max over the
/// 2^k x 2^k square whose top-left corner is the pixel.
class RangeMax {
public:
    RangeMax(const DisparityMap& d, int max_side) : w_(d.width), h_(d.height) {
        levels_.push_back(d.data);
        for (int side = 2; side / 2 < max_side && side / 2 < std::max(w_, h_); side *= 2) {
            const std::vector<double>& prev = levels_.back();
            const int half = side / 2;
            std::vector<double> next(prev.size());
            for (int y = 0; y < h_; ++y) {
                for (int x = 0; x < w_; ++x) {
                    const int x2 = std::min(x + half, w_ - 1);
                    const int y2 = std::min(y + half, h_ - 1);
                    next[idx(x, y)] = std::max(std::max(prev[idx(x, y)], prev[idx(x2, y)]),
                                               std::max(prev[idx(x, y2)], prev[idx(x2, y2)]));
                }
            }
            levels_.push_back(std::move(next));
        }
    }

    /// Max over the inclusive rectangle, clipped to the map.
    double query(int x0, int y0, int x1, int y1) const noexcept {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w_ - 1);
        y1 = std::min(y1, h_ - 1);
        if (x0 > x1 || y0 > y1) return 0.0;
        const int shortest = std::min(x1 - x0, y1 - y0) + 1;
        int k = 0;
        while (k + 1 < static_cast<int>(levels_.size()) && (2 << k) <= shortest) ++k;
        const int side = 1 << k;
        const std::vector<double>& level = levels_[static_cast<std::size_t>(k)];
        double m = 0.0;
        for (int y = y0;; y += side) {
            const int yy = std::min(y, y1 - side + 1);
            for (int x = x0;; x += side) {
                const int xx = std::min(x, x1 - side + 1);
                m = std::max(m, level[idx(xx, yy)]);
                if (xx + side > x1) break;
            }
            if (yy + side > y1) break;
        }
        return m;
    }

private:
    std::size_t idx(int x, int y) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

    int w_;
    int h_;
    std::vector<std::vector<double>> levels_;
};

struct OcclusionContext {
    const DisparityMap* disparity = nullptr;
    int probes = 8;
    const RangeMax* range = nullptr;
};

/// Probes of one source that may block some tap. A probe sits between the
/// source and the target at (1 - c) times their distance from the source,
/// so it only ever reads the field near the source; when that neighbourhood
/// stays clearly below the probe disparity the probe is skipped for every
/// tap, which leaves the per-tap ray test unchanged.
struct ProbeSet {
    std::vector<double> disparity;
    std::vector<double> coefficient;

    void collect(const OcclusionContext& occ, double d_s, int sx, int sy, double reach) {
        disparity.clear();
        coefficient.clear();
        for (int j = 0; j < occ.probes; ++j) {
            const double probe = pisa::depth_probe(d_s, j, occ.probes);
            const double c = pisa::collinear_coefficient(d_s, probe);
            const int h = static_cast<int>(std::floor((1.0 - c) * reach)) + 2;
            if (occ.range->query(sx - h, sy - h, sx + h, sy + h) < probe - 1e-9) continue;
            disparity.push_back(probe);
            coefficient.push_back(c);
        }
    }
};

// ---------------------------------------------------------------------------
// Scatter engine. Sources are processed in fixed bands of rows; each band
// accumulates into its own buffer and bands are merged in index order, so
// the sums do not depend on the number of worker threads. Fully covered
// kernel spans go into a per-row difference buffer, everything else is
// deposited directly; a zero-radius source therefore lands bit-exactly.

template <int C>
class Scatter {
public:
    Scatter(int width, int height, Boundary boundary, const std::vector<const DiskKernel*>& kernels,
            const std::vector<double>& values, const OcclusionContext* occlusion)
        : w_(width), h_(height), boundary_(boundary), kernels_(kernels), values_(values), occ_(occlusion) {}

    std::vector<double> run() {
        const int bands = (h_ + kBandRows - 1) / kBandRows;
        direct_.assign(static_cast<std::size_t>(w_) * h_ * C, 0.0);
        diff_.assign(static_cast<std::size_t>(w_ + 1) * h_ * C, 0.0);

        const int wave = std::max(1, thread_count());
        for (int first = 0; first < bands; first += wave) {
            const int count = std::min(wave, bands - first);
            std::vector<Band> wave_bands(static_cast<std::size_t>(count));
            parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
                wave_bands[i] = run_band(first + static_cast<int>(i));
            });
            parallel_for(static_cast<std::size_t>(h_), [&](std::size_t yy) {
                const int y = static_cast<int>(yy);
                for (const Band& b : wave_bands) {
                    if (y < b.y_lo || y > b.y_hi) continue;
                    const std::size_t local = static_cast<std::size_t>(y - b.y_lo);
                    const std::size_t dn = static_cast<std::size_t>(w_) * C;
                    const std::size_t fn = static_cast<std::size_t>(w_ + 1) * C;
                    double* dst = &direct_[yy * dn];
                    const double* src = &b.direct[local * dn];
                    for (std::size_t i = 0; i < dn; ++i) dst[i] += src[i];
                    double* fdst = &diff_[yy * fn];
                    const double* fsrc = &b.diff[local * fn];
                    for (std::size_t i = 0; i < fn; ++i) fdst[i] += fsrc[i];
                }
            });
        }

        std::vector<double> out(static_cast<std::size_t>(w_) * h_ * C);
        parallel_for(static_cast<std::size_t>(h_), [&](std::size_t y) {
            std::array<double, C> running{};
            for (int x = 0; x < w_; ++x) {
                for (int c = 0; c < C; ++c) {
                    running[static_cast<std::size_t>(c)] += diff_[(y * static_cast<std::size_t>(w_ + 1) + x) * C + c];
                    const std::size_t i = (y * static_cast<std::size_t>(w_) + x) * C + c;
                    out[i] = direct_[i] + running[static_cast<std::size_t>(c)];
                }
            }
        });
        return out;
    }

private:
    struct Band {
        int y_lo = 0;
        int y_hi = -1;
        std::vector<double> direct;
        std::vector<double> diff;
    };

    Band run_band(int index) const {
        Band band;
        const int sy0 = index * kBandRows;
        const int sy1 = std::min(h_, sy0 + kBandRows);
        int extent = 0;
        for (int y = sy0; y < sy1; ++y) {
            for (int x = 0; x < w_; ++x) {
                if (const DiskKernel* k = kernels_[pixel(x, y)]) extent = std::max(extent, k->extent);
            }
        }
        band.y_lo = h_;
        band.y_hi = -1;
        for (int y = sy0 - extent; y <= sy1 - 1 + extent; ++y) {
            if (boundary_ == Boundary::renormalize && (y < 0 || y >= h_)) continue;
            const int f = fold(y, h_);
            band.y_lo = std::min(band.y_lo, f);
            band.y_hi = std::max(band.y_hi, f);
        }
        const std::size_t rows = static_cast<std::size_t>(band.y_hi - band.y_lo + 1);
        band.direct.assign(rows * w_ * C, 0.0);
        band.diff.assign(rows * (w_ + 1) * C, 0.0);

        std::vector<char> admitted;
        ProbeSet probes;
        for (int sy = sy0; sy < sy1; ++sy) {
            for (int sx = 0; sx < w_; ++sx) {
                const std::size_t p = pixel(sx, sy);
                const DiskKernel* k = kernels_[p];
                if (!k) continue;
                const double* v = &values_[p * C];
                if (k->identity) {
                    deposit(band, sx, sy, v, 1.0);
                } else if (occ_ && may_occlude(*k, sx, sy, probes)) {
                    splat_occluded(band, *k, sx, sy, v, probes, admitted);
                } else if (boundary_ == Boundary::reflect) {
                    splat_reflect(band, *k, sx, sy, v);
                } else {
                    splat_renormalize(band, *k, sx, sy, v);
                }
            }
        }
        return band;
    }

    std::size_t pixel(int x, int y) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

    void deposit(Band& b, int x, int y, const double* v, double weight) const noexcept {
        double* dst = &b.direct[(static_cast<std::size_t>(y - b.y_lo) * w_ + x) * C];
        for (int c = 0; c < C; ++c) dst[c] += v[c] * weight;
    }

    // Adds v * weight to every pixel of [lo, hi] on target row y.
    void span(Band& b, int y, int lo, int hi, const double* v, double weight) const noexcept {
        double* row = &b.diff[static_cast<std::size_t>(y - b.y_lo) * (w_ + 1) * C];
        for (int c = 0; c < C; ++c) {
            const double a = v[c] * weight;
            row[static_cast<std::size_t>(lo) * C + c] += a;
            row[static_cast<std::size_t>(hi + 1) * C + c] -= a;
        }
    }

    bool may_occlude(const DiskKernel& k, int sx, int sy, ProbeSet& probes) const {
        probes.collect(*occ_, occ_->disparity->at(sx, sy), sx, sy, k.reach);
        return !probes.disparity.empty();
    }

    void splat_reflect(Band& b, const DiskKernel& k, int sx, int sy, const double* v) const noexcept {
        const double inv = 1.0 / k.total;
        for (const KernelRow& row : k.rows) {
            const int ty = fold(sy + row.dy, h_);
            if (row.full_lo <= row.full_hi) {
                const int a = sx + row.full_lo;
                const int e = sx + row.full_hi;
                if (a >= -w_ && e <= 2 * w_ - 1) {
                    const int lo = std::max(a, 0);
                    const int hi = std::min(e, w_ - 1);
                    if (lo <= hi) span(b, ty, lo, hi, v, inv);
                    if (a < 0) span(b, ty, -1 - std::min(e, -1), -1 - a, v, inv);
                    if (e > w_ - 1) span(b, ty, 2 * w_ - 1 - e, 2 * w_ - 1 - std::max(a, w_), v, inv);
                } else {
                    for (int x = a; x <= e; ++x) deposit(b, fold(x, w_), ty, v, inv);
                }
            }
            for (const Tap& t : row.partial) deposit(b, fold(sx + t.dx, w_), ty, v, t.coverage * inv);
        }
    }

    void splat_renormalize(Band& b, const DiskKernel& k, int sx, int sy, const double* v) const noexcept {
        double z = 0.0;
        for (const KernelRow& row : k.rows) {
            const int ty = sy + row.dy;
            if (ty < 0 || ty >= h_) continue;
            if (row.full_lo <= row.full_hi) {
                const int lo = std::max(sx + row.full_lo, 0);
                const int hi = std::min(sx + row.full_hi, w_ - 1);
                if (lo <= hi) z += hi - lo + 1;
            }
            for (const Tap& t : row.partial) {
                const int tx = sx + t.dx;
                if (tx >= 0 && tx < w_) z += t.coverage;
            }
        }
        const double inv = 1.0 / z;
        for (const KernelRow& row : k.rows) {
            const int ty = sy + row.dy;
            if (ty < 0 || ty >= h_) continue;
            if (row.full_lo <= row.full_hi) {
                const int lo = std::max(sx + row.full_lo, 0);
                const int hi = std::min(sx + row.full_hi, w_ - 1);
                if (lo <= hi) span(b, ty, lo, hi, v, inv);
            }
            for (const Tap& t : row.partial) {
                const int tx = sx + t.dx;
                if (tx >= 0 && tx < w_) deposit(b, tx, ty, v, t.coverage * inv);
            }
        }
    }

    void splat_occluded(Band& b, const DiskKernel& k, int sx, int sy, const double* v, const ProbeSet& probes,
                        std::vector<char>& admitted) const {
        const DisparityMap& d = *occ_->disparity;
        const pisa::Vec2 source{static_cast<double>(sx), static_cast<double>(sy)};
        admitted.assign(k.taps.size(), 0);
        double z = 0.0;
        for (std::size_t i = 0; i < k.taps.size(); ++i) {
            const Tap& t = k.taps[i];
            const int tx = sx + t.dx;
            const int ty = sy + t.dy;
            if (boundary_ == Boundary::renormalize && (tx < 0 || tx >= w_ || ty < 0 || ty >= h_)) continue;
            const pisa::Vec2 target{static_cast<double>(tx), static_cast<double>(ty)};
            if (visible(d, target, source, probes)) {
                admitted[i] = 1;
                z += t.coverage;
            }
        }
        // The source pixel itself always passes, so z > 0.
        const double inv = 1.0 / z;
        for (std::size_t i = 0; i < k.taps.size(); ++i) {
            if (!admitted[i]) continue;
            const Tap& t = k.taps[i];
            deposit(b, fold(sx + t.dx, w_), fold(sy + t.dy, h_), v, t.coverage * inv);
        }
    }

    // Same arithmetic as pisa::ray_visible restricted to the given probes.
    static bool visible(const DisparityMap& d, pisa::Vec2 receiver, pisa::Vec2 source, const ProbeSet& probes) noexcept {
        const pisa::Vec2 span = source - receiver;
        for (std::size_t j = 0; j < probes.disparity.size(); ++j) {
            const pisa::Vec2 p = probes.coefficient[j] * span + receiver;
            if (!contains(d, p.x, p.y)) continue;
            if (!(bilinear(d, p.x, p.y) < probes.disparity[j])) return false;
        }
        return true;
    }

    int w_;
    int h_;
    Boundary boundary_;
    const std::vector<const DiskKernel*>& kernels_;
    const std::vector<double>& values_;
    const OcclusionContext* occ_;
    std::vector<double> direct_;
    std::vector<double> diff_;
};

/// Kernel per source pixel; nullptr for sources that carry no energy.
std::vector<const DiskKernel*> kernels_for(const RadiusField& radii, const std::vector<double>& values, int channels,
                                           const RenderConfig& cfg, std::size_t& clamped) {
    std::vector<const DiskKernel*> kernels(radii.pixel_count(), nullptr);
    std::vector<const DiskKernel*> by_key;
    for (std::size_t p = 0; p < radii.pixel_count(); ++p) {
        bool any = false;
        for (int c = 0; c < channels; ++c) any = any || values[p * channels + c] != 0.0;
        if (!any) continue;
        double r = radii.data[p];
        if (r > cfg.max_radius) {
            r = cfg.max_radius;
            ++clamped;
        }
        const std::size_t key = static_cast<std::size_t>(radius_key(r));
        if (key >= by_key.size()) by_key.resize(key + 1, nullptr);
        if (!by_key[key]) by_key[key] = kernel_for(static_cast<int>(key));
        kernels[p] = by_key[key];
    }
    return kernels;
}

void check_radii(const RadiusField& radii) {
    for (double r : radii.data) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("radius field must be finite and >= 0");
    }
}

SplatResult splat_premultiplied(const PremultipliedImage& premult, const RadiusField& radii, const RenderConfig& cfg) {
    SplatResult result;
    const auto kernels = kernels_for(radii, premult.data, 4, cfg, result.clamped_sources);
    Scatter<4> scatter(premult.width, premult.height, cfg.boundary, kernels, premult.data, nullptr);
    result.image = PremultipliedImage(premult.width, premult.height);
    result.image.data = scatter.run();
    return result;
}

/// Canvas-sized straight-alpha raster of a layer; alpha 0 off its footprint.
RgbaImage rasterize(const Layer& layer, int width, int height) {
    if (layer.offset_x == 0 && layer.offset_y == 0 && layer.rgba.width == width && layer.rgba.height == height) {
        return layer.rgba;
    }
    RgbaImage out(width, height);
    const int x0 = std::max(layer.offset_x, 0);
    const int y0 = std::max(layer.offset_y, 0);
    const int x1 = std::min(layer.offset_x + layer.rgba.width, width);
    const int y1 = std::min(layer.offset_y + layer.rgba.height, height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            for (int c = 0; c < 4; ++c) out.at(x, y, c) = layer.rgba.at(x - layer.offset_x, y - layer.offset_y, c);
        }
    }
    return out;
}

RadiusField layer_radii(const Layer& layer, const RgbaImage& canvas_rgba, const LensParams& lens) {
    RadiusField r(canvas_rgba.width, canvas_rgba.height);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            if (canvas_rgba.at(x, y, 3) > 0.0) r.at(x, y) = coc_radius(layer.plane.at(x, y), lens);
        }
    }
    return r;
}

}  // namespace

SplatResult splat_layer(const RgbaImage& rgba, const RadiusField& radii, const RenderConfig& cfg) {
    validate(cfg);
    validate(rgba);
    if (!same_shape(rgba, radii)) {
        throw std::invalid_argument("splat_layer: radius field " + shape_string(radii.width, radii.height) +
                                    " does not match raster " + shape_string(rgba.width, rgba.height));
    }
    check_radii(radii);
    return splat_premultiplied(premultiply(rgba), radii, cfg);
}

RadianceImage render(const LayeredScene& scene, const LensParams& lens, const RenderConfig& cfg) {
    validate(scene);
    validate(lens);
    validate(cfg);
    const int w = scene.width;
    const int h = scene.height;

    auto splat = [&](const Layer& layer) {
        RgbaImage canvas = rasterize(layer, w, h);
        const RadiusField radii = layer_radii(layer, canvas, lens);
        return splat_premultiplied(premultiply(canvas), radii, cfg).image;
    };

    PremultipliedImage acc = splat(scene.background);
    for (std::size_t i : back_to_front(scene)) {
        const PremultipliedImage top = splat(scene.foregrounds[i]);
        for (std::size_t p = 0; p < acc.pixel_count(); ++p) {
            const double keep = 1.0 - top.data[p * 4 + 3];
            for (int c = 0; c < 4; ++c) acc.data[p * 4 + c] = top.data[p * 4 + c] + keep * acc.data[p * 4 + c];
        }
    }

    RadianceImage out(w, h);
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) out.data[p * 3 + c] = std::max(0.0, acc.data[p * 4 + c]);
    }
    return out;
}

RadianceImage all_in_focus(const LayeredScene& scene) {
    return render(scene, LensParams{0.0, 0.5}, RenderConfig{});
}

RadianceImage render_from_disparity(const RadianceImage& img, const DisparityMap& d, const LensParams& lens,
                                    const RenderConfig& cfg) {
    validate(img);
    validate(d);
    validate(lens);
    validate(cfg);
    if (!same_shape(img, d)) {
        throw std::invalid_argument("image " + shape_string(img.width, img.height) + " and disparity " +
                                    shape_string(d.width, d.height) + " differ in size");
    }
    const RadiusField radii = defocus_map(d, lens);
    std::size_t clamped = 0;
    const auto kernels = kernels_for(radii, img.data, 3, cfg, clamped);
    double reach = 0.0;
    for (const DiskKernel* k : kernels) {
        if (k) reach = std::max(reach, k->reach);
    }
    const RangeMax range(d, 2 * static_cast<int>(reach) + 5);
    const OcclusionContext occ{&d, cfg.occlusion_samples, &range};
    Scatter<3> scatter(img.width, img.height, cfg.boundary, kernels, img.data, &occ);
    RadianceImage out(img.width, img.height);
    out.data = scatter.run();
    for (double& v : out.data) v = std::max(0.0, v);
    return out;
}

namespace {

void check_focuses(std::span<const double> focuses) {
    if (focuses.empty()) throw std::invalid_argument("focal stack needs at least one focus disparity");
}

}  // namespace

std::vector<RadianceImage> focal_stack(const RadianceImage& img, const DisparityMap& d, const LensParams& base,
                                       std::span<const double> focuses, const RenderConfig& cfg) {
    check_focuses(focuses);
    std::vector<RadianceImage> stack;
    for (double f : focuses) stack.push_back(render_from_disparity(img, d, LensParams{base.aperture_scale, f}, cfg));
    return stack;
}

std::vector<RadianceImage> focal_stack(const LayeredScene& scene, const LensParams& base,
                                       std::span<const double> focuses, const RenderConfig& cfg) {
    check_focuses(focuses);
    std::vector<RadianceImage> stack;
    for (double f : focuses) stack.push_back(render(scene, LensParams{base.aperture_scale, f}, cfg));
    return stack;
}

}  // namespace bokeh
