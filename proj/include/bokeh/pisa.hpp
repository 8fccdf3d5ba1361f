// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bokeh/image.hpp"
#include "bokeh/lens.hpp"

/// Reference implementation of physics-inspired self-attention: attention
/// weights normalized over queries (each key's light sums to one), limited
/// to the key's circle of confusion and attenuated by self-occlusion along
/// the ray between key and query.
namespace bokeh::pisa {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v) noexcept;

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }

    Matrix transposed() const;
    static Matrix identity(std::size_t n);

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Q, K and V with one row per token. V may be wider or narrower than Q/K.
struct AttentionBatch {
    Matrix query;
    Matrix key;
    Matrix value;

    std::size_t tokens() const noexcept { return query.rows; }
    std::size_t key_width() const noexcept { return query.cols; }
    std::size_t value_width() const noexcept { return value.cols; }
};

void validate(const AttentionBatch& batch);

/// Token geometry on the latent grid.
struct GeometryContext {
    /// Token positions in latent-grid pixels (pixel centers at integers).
    std::vector<Vec2> positions;
    /// Token disparities, used for the CoC radius of each key.
    std::vector<double> disparities;
    /// Full-resolution pixels per latent pixel at this attention level.
    double pixel_scale = 8.0;
    /// Disparity on the latent grid, sampled bilinearly along rays.
    DisparityMap field;

    std::size_t tokens() const noexcept { return positions.size(); }

    /// Tokens at every grid pixel in row-major order, disparities read from
    /// the field.
    static GeometryContext from_field(DisparityMap field, double pixel_scale);
};

void validate(const GeometryContext& geom);

struct OcclusionConfig {
    int depth_samples = 8;
    int super_samples = 4;
    /// Jitter radius around a key, latent pixels.
    double jitter_radius = 0.5;
    /// One offset per super-sample, each with norm <= jitter_radius.
    std::vector<Vec2> offsets;

    /// Deterministic jitter table: a Vogel (golden-angle) spiral whose first
    /// point is the key itself.
    static OcclusionConfig make(int depth_samples = 8, int super_samples = 4, double jitter_radius = 0.5);
};

void validate(const OcclusionConfig& cfg);

/// A = QK^T / sqrt(d_key).
Matrix similarity(const AttentionBatch& batch);

/// Softmax along each row; rows sum to one.
Matrix softmax_key(const Matrix& a);

/// Softmax along each column; columns sum to one.
Matrix softmax_query(const Matrix& a);

/// C[q][k] = soft_edge(r_c(d_k) - pixel_scale * |P_q - P_k|).
Matrix coc_mask(const GeometryContext& geom, const LensParams& lens, const SoftEdgeSchedule& sched);

/// Column softmax of A weighted by the mask C in numerator and denominator.
/// Columns without mask support come back as exact zeros.
Matrix masked_softmax_query(const Matrix& a, const Matrix& c);

/// Coefficient of the collinear sampler: 1 at d_tilde = d_s, 0 at 1.
double collinear_coefficient(double d_s, double d_tilde) noexcept;

/// Image position of the point at disparity d_tilde on the ray from the
/// source (disparity d_s) to the receiver. Throws std::invalid_argument
/// unless d_s <= d_tilde <= 1.
Vec2 sample_point(Vec2 source, Vec2 receiver, double d_s, double d_tilde);

/// j-th of n depth probes: the midpoint of the j-th equal sub-interval of
/// (d_s, 1).
double depth_probe(double d_s, int j, int n) noexcept;

/// Ray test against a disparity field in that field's pixel units. Probe
/// points that fall outside the field do not occlude.
bool ray_visible(const DisparityMap& field, Vec2 receiver, Vec2 source, double d_s, int depth_samples) noexcept;

/// 1 when no probe between source and receiver is nearer than the probe's
/// own disparity, else 0.
int visibility(const GeometryContext& geom, Vec2 receiver, Vec2 source, double d_s, const OcclusionConfig& cfg);

/// Mean visibility over the jittered copies of key `key_index`; each copy
/// reads its disparity from the field at the jittered position.
double expected_visibility(const GeometryContext& geom, Vec2 receiver, std::size_t key_index,
                           const OcclusionConfig& cfg);

/// Intermediate matrices of one PISA evaluation.
struct PisaTrace {
    Matrix similarity;
    Matrix coc;
    Matrix attention;   // masked, query-normalized
    Matrix visibility;  // expected visibility; zero where attention is zero
    Matrix output;
};

/// (A^(QC) .* M) V.
Matrix pisa_attention(const AttentionBatch& batch, const GeometryContext& geom, const LensParams& lens,
                      const SoftEdgeSchedule& sched, const OcclusionConfig& cfg);

PisaTrace pisa_attention_traced(const AttentionBatch& batch, const GeometryContext& geom, const LensParams& lens,
                                const SoftEdgeSchedule& sched, const OcclusionConfig& cfg);

/// One-step denoise: (z_t - beta_t * eps) / alpha_t.
std::vector<double> one_step_estimate(std::span<const double> z_t, std::span<const double> eps, double alpha_t,
                                      double beta_t);

}  // namespace bokeh::pisa
