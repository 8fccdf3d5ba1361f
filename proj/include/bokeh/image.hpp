// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bokeh {

/// Disparities are kept inside [kDisparityEps, 1 - kDisparityEps] so that
/// the collinear sampler never divides by (1 - d).
inline constexpr double kDisparityEps = 1e-4;

double clamp_disparity(double d) noexcept;

/// Interleaved raster of `Channels` doubles per pixel, row-major.
template <int Channels, class Tag>
struct Raster {
    static constexpr int kChannels = Channels;

    int width = 0;
    int height = 0;
    std::vector<double> data;

    Raster() = default;
    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * Channels, fill) {}

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
    bool empty() const noexcept { return width <= 0 || height <= 0; }

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * width + x) * Channels + c;
    }
    double& at(int x, int y, int c) noexcept { return data[index(x, y, c)]; }
    double at(int x, int y, int c) const noexcept { return data[index(x, y, c)]; }

    friend bool operator==(const Raster&, const Raster&) = default;
};

struct RadianceTag;
struct StraightAlphaTag;
struct PremultipliedTag;

/// Linear-light RGB, samples finite and >= 0.
using RadianceImage = Raster<3, RadianceTag>;
/// Linear RGB plus straight (unassociated) alpha.
using RgbaImage = Raster<4, StraightAlphaTag>;
/// Linear RGB premultiplied by alpha, alpha in channel 3.
using PremultipliedImage = Raster<4, PremultipliedTag>;

/// Single-channel grid with a tag so disparity, radius and mask fields
/// cannot be swapped by accident.
template <class Tag, class T = double>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
    bool empty() const noexcept { return width <= 0 || height <= 0; }
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
    T& at(int x, int y) noexcept { return data[index(x, y)]; }
    const T& at(int x, int y) const noexcept { return data[index(x, y)]; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

struct DisparityTag;
struct RadiusTag;
struct MaskTag;

/// Normalized disparity (reciprocal depth), larger is nearer.
using DisparityMap = Grid<DisparityTag>;
/// Circle-of-confusion radius in full-resolution pixels.
using RadiusField = Grid<RadiusTag>;
/// Binary pixel selection; nonzero means selected.
using RegionMask = Grid<MaskTag, std::uint8_t>;

// Throw std::invalid_argument when an invariant does not hold.
void validate(const RadianceImage& img);
void validate(const RgbaImage& img);
void validate(const DisparityMap& d);

template <class A, class B>
bool same_shape(const A& a, const B& b) noexcept {
    return a.width == b.width && a.height == b.height;
}

std::string shape_string(int width, int height);

/// Clamp every sample of a disparity map into the admissible range.
void clamp_in_place(DisparityMap& d) noexcept;

/// Bilinear sample at a fractional position, pixel centers at integer
/// coordinates. Caller guarantees 0 <= x <= width-1, 0 <= y <= height-1.
double bilinear(const DisparityMap& d, double x, double y) noexcept;

/// Same as `bilinear` but clamps the position into the grid first.
double bilinear_clamped(const DisparityMap& d, double x, double y) noexcept;

bool contains(const DisparityMap& d, double x, double y) noexcept;

RadianceImage rgb_of(const RgbaImage& img);
PremultipliedImage premultiply(const RgbaImage& img);
RgbaImage with_opaque_alpha(const RadianceImage& img);

}  // namespace bokeh
