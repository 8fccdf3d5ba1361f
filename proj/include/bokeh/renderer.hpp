// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bokeh/image.hpp"
#include "bokeh/lens.hpp"

namespace bokeh {

/// Planar disparity ramp: d(x, y) = d0 + gx (x - cx) + gy (y - cy), canvas
/// pixel coordinates, clamped into [lo, hi] (and the global disparity range)
/// when evaluated.
struct DisparityPlane {
    double d0 = 0.5;
    double gx = 0.0;
    double gy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double lo = kDisparityEps;
    double hi = 1.0 - kDisparityEps;

    double at(double x, double y) const noexcept;
};

struct Layer {
    /// Straight-alpha RGBA raster.
    RgbaImage rgba;
    /// Canvas position of the raster's top-left pixel.
    int offset_x = 0;
    int offset_y = 0;
    DisparityPlane plane;
};

struct LayeredScene {
    int width = 0;
    int height = 0;
    /// Opaque, canvas-sized, offset (0, 0).
    Layer background;
    /// Back to front: strictly increasing plane.d0.
    std::vector<Layer> foregrounds;
};

void validate(const LayeredScene& scene);

enum class KernelShape { disk };

enum class Boundary {
    /// Kernel taps that leave the canvas are mirrored back in. Each source
    /// still deposits exactly its energy, and constant images stay constant.
    reflect,
    /// Taps outside the canvas are dropped and the rest rescaled to sum to 1.
    renormalize,
};

struct RenderConfig {
    KernelShape kernel = KernelShape::disk;
    Boundary boundary = Boundary::reflect;
    /// Radii above this are clamped (and counted).
    double max_radius = 64.0;
    /// Depth probes per ray in the occlusion test of render_from_disparity.
    int occlusion_samples = 8;
};

void validate(const RenderConfig& cfg);

/// Clamped plane disparity and alpha over the on-canvas part of a layer.
struct LayerFragment {
    int x0 = 0;  // canvas position of the fragment
    int y0 = 0;
    DisparityMap disparity;
    std::vector<double> alpha;
};

/// Throws std::invalid_argument when the layer lies entirely off canvas.
LayerFragment layer_disparity(const Layer& layer, int canvas_width, int canvas_height);

struct LayerIndexTag;
/// 0 for the background, i + 1 for scene.foregrounds[i].
using LayerIndexMap = Grid<LayerIndexTag, int>;

/// Per pixel, the front-most layer whose alpha exceeds 0.5.
LayerIndexMap scene_layer_index(const LayeredScene& scene);

/// Hard disparity assignment from scene_layer_index.
DisparityMap scene_disparity(const LayeredScene& scene);

struct SplatResult {
    PremultipliedImage image;
    /// Sources whose radius exceeded cfg.max_radius.
    std::size_t clamped_sources = 0;
};

/// Scatters each pixel's premultiplied color and alpha over an anti-aliased
/// disk of its radius. `rgba` is straight alpha; radii below 0.5 deposit in
/// place.
SplatResult splat_layer(const RgbaImage& rgba, const RadiusField& radii, const RenderConfig& cfg);

/// Splats every layer with radii from its own plane and composites back to
/// front with the over operator.
RadianceImage render(const LayeredScene& scene, const LensParams& lens, const RenderConfig& cfg = {});

/// Sharp over-composite of all layers.
RadianceImage all_in_focus(const LayeredScene& scene);

/// Single-image scatter with self-occlusion: a source reaches a target only
/// when the ray test on `d` passes; each source's weights are renormalized
/// over its admitted targets.
RadianceImage render_from_disparity(const RadianceImage& img, const DisparityMap& d, const LensParams& lens,
                                    const RenderConfig& cfg = {});

/// One render per focus disparity, sharing the aperture of `base`.
std::vector<RadianceImage> focal_stack(const RadianceImage& img, const DisparityMap& d, const LensParams& base,
                                       std::span<const double> focuses, const RenderConfig& cfg = {});
std::vector<RadianceImage> focal_stack(const LayeredScene& scene, const LensParams& base,
                                       std::span<const double> focuses, const RenderConfig& cfg = {});

/// Index of layers back to front (stable sort of foregrounds by d0); the
/// background is not included.
std::vector<std::size_t> back_to_front(const LayeredScene& scene);

}  // namespace bokeh
