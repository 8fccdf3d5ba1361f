// SPDX-License-Identifier: Apache-2.0
#include "bokeh/pisa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bokeh/parallel.hpp"

namespace bokeh::pisa {

double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    }
    return t;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

namespace {

bool all_finite(const Matrix& m) {
    return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

void require_square(const Matrix& a, const char* what) {
    if (a.rows != a.cols) throw std::invalid_argument(std::string(what) + ": matrix must be square");
    if (a.data.size() != a.rows * a.cols) throw std::invalid_argument(std::string(what) + ": bad matrix storage");
}

}  // namespace

void validate(const AttentionBatch& b) {
    const std::size_t n = b.query.rows;
    if (b.key.rows != n || b.value.rows != n) {
        throw std::invalid_argument("attention batch: Q, K and V must have the same token count");
    }
    if (b.key.cols != b.query.cols) throw std::invalid_argument("attention batch: Q and K widths differ");
    if (b.query.cols == 0) throw std::invalid_argument("attention batch: d_key must be positive");
    for (const Matrix* m : {&b.query, &b.key, &b.value}) {
        if (m->data.size() != m->rows * m->cols) throw std::invalid_argument("attention batch: bad matrix storage");
        if (!all_finite(*m)) throw std::invalid_argument("attention batch: non-finite entry");
    }
}

GeometryContext GeometryContext::from_field(DisparityMap field, double pixel_scale) {
    GeometryContext g;
    g.pixel_scale = pixel_scale;
    g.positions.reserve(field.pixel_count());
    g.disparities.reserve(field.pixel_count());
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            g.positions.push_back({static_cast<double>(x), static_cast<double>(y)});
            g.disparities.push_back(field.at(x, y));
        }
    }
    g.field = std::move(field);
    return g;
}

void validate(const GeometryContext& g) {
    if (g.disparities.size() != g.positions.size()) {
        throw std::invalid_argument("geometry: positions and disparities differ in length");
    }
    if (!(g.pixel_scale > 0.0) || !std::isfinite(g.pixel_scale)) {
        throw std::invalid_argument("geometry: pixel_scale must be positive");
    }
    if (g.field.empty()) throw std::invalid_argument("geometry: empty disparity field");
    validate(g.field);
    for (std::size_t i = 0; i < g.positions.size(); ++i) {
        const Vec2 p = g.positions[i];
        if (!contains(g.field, p.x, p.y)) {
            throw std::invalid_argument("geometry: token " + std::to_string(i) + " lies outside the field");
        }
        const double d = g.disparities[i];
        if (!(d >= kDisparityEps && d <= 1.0 - kDisparityEps)) {
            throw std::invalid_argument("geometry: token disparity outside the clamp range");
        }
    }
}

OcclusionConfig OcclusionConfig::make(int depth_samples, int super_samples, double jitter_radius) {
    OcclusionConfig cfg;
    cfg.depth_samples = depth_samples;
    cfg.super_samples = super_samples;
    cfg.jitter_radius = jitter_radius;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < super_samples; ++i) {
        const double r = jitter_radius * std::sqrt(static_cast<double>(i) / super_samples);
        const double theta = golden * i;
        cfg.offsets.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
    return cfg;
}

void validate(const OcclusionConfig& cfg) {
    if (cfg.depth_samples < 1 || cfg.super_samples < 1) {
        throw std::invalid_argument("occlusion config: sample counts must be >= 1");
    }
    if (!(cfg.jitter_radius >= 0.0)) throw std::invalid_argument("occlusion config: jitter radius must be >= 0");
    if (cfg.offsets.size() != static_cast<std::size_t>(cfg.super_samples)) {
        throw std::invalid_argument("occlusion config: offsets table must have one entry per super-sample");
    }
    for (const Vec2& o : cfg.offsets) {
        if (norm(o) > cfg.jitter_radius * (1.0 + 1e-12)) {
            throw std::invalid_argument("occlusion config: offset exceeds the jitter radius");
        }
    }
}

Matrix similarity(const AttentionBatch& batch) {
    validate(batch);
    const std::size_t n = batch.tokens();
    const std::size_t width = batch.key_width();
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));
    Matrix a(n, n);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < n; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < width; ++j) dot += batch.query(q, j) * batch.key(k, j);
            a(q, k) = dot * scale;
        }
    }
    return a;
}

Matrix softmax_key(const Matrix& a) {
    require_square(a, "softmax_key");
    Matrix out(a.rows, a.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < a.cols; ++c) m = std::max(m, a(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) {
            out(r, c) = std::exp(a(r, c) - m);
            sum += out(r, c);
        }
        for (std::size_t c = 0; c < a.cols; ++c) out(r, c) /= sum;
    }
    return out;
}

Matrix softmax_query(const Matrix& a) {
    require_square(a, "softmax_query");
    Matrix out(a.rows, a.cols);
    for (std::size_t c = 0; c < a.cols; ++c) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < a.rows; ++r) m = std::max(m, a(r, c));
        double sum = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) {
            out(r, c) = std::exp(a(r, c) - m);
            sum += out(r, c);
        }
        for (std::size_t r = 0; r < a.rows; ++r) out(r, c) /= sum;
    }
    return out;
}

Matrix coc_mask(const GeometryContext& geom, const LensParams& lens, const SoftEdgeSchedule& sched) {
    const std::size_t n = geom.tokens();
    Matrix c(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double radius = coc_radius(geom.disparities[k], lens);
        for (std::size_t q = 0; q < n; ++q) {
            const double dist = geom.pixel_scale * norm(geom.positions[q] - geom.positions[k]);
            c(q, k) = soft_edge(radius - dist, sched);
        }
    }
    return c;
}

Matrix masked_softmax_query(const Matrix& a, const Matrix& c) {
    require_square(a, "masked_softmax_query");
    if (c.rows != a.rows || c.cols != a.cols) throw std::invalid_argument("masked_softmax_query: mask shape mismatch");
    Matrix out(a.rows, a.cols);
    // exp(A) * C is evaluated as exp(A + log C - m) with m the column maximum
    // of A + log C over the support, so the largest term is exactly 1 and the
    // denominator never underflows while the support is nonempty.
    for (std::size_t col = 0; col < a.cols; ++col) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < a.rows; ++r) {
            if (c(r, col) > 0.0) m = std::max(m, a(r, col) + std::log(c(r, col)));
        }
        if (!std::isfinite(m)) continue;  // no support: column stays zero
        double sum = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) {
            if (c(r, col) > 0.0) {
                out(r, col) = std::exp(a(r, col) + std::log(c(r, col)) - m);
                sum += out(r, col);
            }
        }
        if (sum < 1e-30) {
            for (std::size_t r = 0; r < a.rows; ++r) out(r, col) = 0.0;
            continue;
        }
        for (std::size_t r = 0; r < a.rows; ++r) out(r, col) /= sum;
    }
    return out;
}

double collinear_coefficient(double d_s, double d_tilde) noexcept {
    return ((1.0 - d_tilde) * d_s) / ((1.0 - d_s) * d_tilde);
}

Vec2 sample_point(Vec2 source, Vec2 receiver, double d_s, double d_tilde) {
    if (!(d_s > 0.0 && d_s < 1.0)) throw std::invalid_argument("sample_point: source disparity must be in (0, 1)");
    if (!(d_tilde >= d_s && d_tilde <= 1.0)) {
        throw std::invalid_argument("sample_point: probe disparity must lie between the source disparity and 1");
    }
    return collinear_coefficient(d_s, d_tilde) * (source - receiver) + receiver;
}

double depth_probe(double d_s, int j, int n) noexcept {
    return d_s + (1.0 - d_s) * (j + 0.5) / n;
}

bool ray_visible(const DisparityMap& field, Vec2 receiver, Vec2 source, double d_s, int depth_samples) noexcept {
    const Vec2 span = source - receiver;
    for (int j = 0; j < depth_samples; ++j) {
        const double probe = depth_probe(d_s, j, depth_samples);
        const Vec2 p = collinear_coefficient(d_s, probe) * span + receiver;
        if (!contains(field, p.x, p.y)) continue;
        if (!(bilinear(field, p.x, p.y) < probe)) return false;
    }
    return true;
}

int visibility(const GeometryContext& geom, Vec2 receiver, Vec2 source, double d_s, const OcclusionConfig& cfg) {
    return ray_visible(geom.field, receiver, source, d_s, cfg.depth_samples) ? 1 : 0;
}

double expected_visibility(const GeometryContext& geom, Vec2 receiver, std::size_t key_index,
                           const OcclusionConfig& cfg) {
    const Vec2 center = geom.positions.at(key_index);
    int visible = 0;
    for (const Vec2& offset : cfg.offsets) {
        const Vec2 s = center + offset;
        const double d_s = clamp_disparity(bilinear_clamped(geom.field, s.x, s.y));
        visible += visibility(geom, receiver, s, d_s, cfg);
    }
    return static_cast<double>(visible) / static_cast<double>(cfg.offsets.size());
}

PisaTrace pisa_attention_traced(const AttentionBatch& batch, const GeometryContext& geom, const LensParams& lens,
                                const SoftEdgeSchedule& sched, const OcclusionConfig& cfg) {
    validate(batch);
    validate(geom);
    validate(lens);
    validate(cfg);
    const std::size_t n = batch.tokens();
    if (geom.tokens() != n) {
        throw std::invalid_argument("pisa_attention: geometry has " + std::to_string(geom.tokens()) +
                                    " tokens, batch has " + std::to_string(n));
    }

    PisaTrace t;
    t.similarity = similarity(batch);
    t.coc = coc_mask(geom, lens, sched);
    t.attention = masked_softmax_query(t.similarity, t.coc);

    // Visibility is only needed where attention survives the CoC mask.
    t.visibility = Matrix(n, n);
    parallel_for(n, [&](std::size_t k) {
        for (std::size_t q = 0; q < n; ++q) {
            if (t.attention(q, k) != 0.0) {
                t.visibility(q, k) = expected_visibility(geom, geom.positions[q], k, cfg);
            }
        }
    });

    const std::size_t width = batch.value_width();
    t.output = Matrix(n, width);
    parallel_for(n, [&](std::size_t q) {
        for (std::size_t k = 0; k < n; ++k) {
            const double w = t.attention(q, k) * t.visibility(q, k);
            if (w == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) t.output(q, j) += w * batch.value(k, j);
        }
    });
    return t;
}

Matrix pisa_attention(const AttentionBatch& batch, const GeometryContext& geom, const LensParams& lens,
                      const SoftEdgeSchedule& sched, const OcclusionConfig& cfg) {
    return pisa_attention_traced(batch, geom, lens, sched, cfg).output;
}

std::vector<double> one_step_estimate(std::span<const double> z_t, std::span<const double> eps, double alpha_t,
                                      double beta_t) {
    if (alpha_t == 0.0) throw std::invalid_argument("one_step_estimate: alpha_t must be nonzero");
    if (z_t.size() != eps.size()) throw std::invalid_argument("one_step_estimate: latent and noise lengths differ");
    std::vector<double> z0(z_t.size());
    for (std::size_t i = 0; i < z_t.size(); ++i) z0[i] = (z_t[i] - beta_t * eps[i]) / alpha_t;
    return z0;
}

}  // namespace bokeh::pisa
