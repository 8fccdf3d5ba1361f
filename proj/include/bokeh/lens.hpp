// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bokeh/image.hpp"

namespace bokeh {

/// Thin-lens parameters in normalized-disparity units.
struct LensParams {
    /// CoC radius in full-resolution pixels per unit disparity difference.
    double aperture_scale = 0.0;
    /// Disparity of the plane rendered sharp.
    double focus_disparity = 0.5;
};

void validate(const LensParams& lens);

inline constexpr double kSharpnessCap = 1e6;

enum class SoftEdgeVariant {
    /// sigma(min(k, k_max) * x): rises from 0 outside the CoC to 1 inside.
    logistic,
    /// (1 + min(k, k_max) * exp(x))^-1, which falls with x and tends to 0 as k grows;
    /// kept for comparison only.
    inverted_exponential,
};

struct SoftEdgeSchedule {
    double sharpness = kSharpnessCap;
    double sharpness_cap = kSharpnessCap;
    SoftEdgeVariant variant = SoftEdgeVariant::logistic;

    double effective() const noexcept { return sharpness < sharpness_cap ? sharpness : sharpness_cap; }
};

double coc_radius(double disparity, const LensParams& lens) noexcept;

RadiusField defocus_map(const DisparityMap& d, const LensParams& lens);

/// Soft step of a signed margin in pixels; 0.5 at x = 0 for the logistic.
double soft_edge(double x, const SoftEdgeSchedule& sched) noexcept;

/// Mean disparity over the selected pixels, clamped to the valid range.
double focus_from_region(const DisparityMap& d, const RegionMask& mask);

}  // namespace bokeh
