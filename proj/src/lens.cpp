// SPDX-License-Identifier: Apache-2.0
#include "bokeh/lens.hpp"

#include <cmath>

namespace bokeh {

void validate(const LensParams& lens) {
    if (!std::isfinite(lens.aperture_scale) || lens.aperture_scale < 0.0) {
        throw std::invalid_argument("aperture_scale must be finite and >= 0");
    }
    if (!(lens.focus_disparity >= kDisparityEps && lens.focus_disparity <= 1.0 - kDisparityEps)) {
        throw std::invalid_argument("focus_disparity outside [1e-4, 1 - 1e-4]");
    }
}

double coc_radius(double disparity, const LensParams& lens) noexcept {
    return std::abs(lens.focus_disparity - disparity) * lens.aperture_scale;
}

RadiusField defocus_map(const DisparityMap& d, const LensParams& lens) {
    RadiusField r(d.width, d.height);
    for (std::size_t i = 0; i < d.data.size(); ++i) r.data[i] = coc_radius(d.data[i], lens);
    return r;
}

double soft_edge(double x, const SoftEdgeSchedule& sched) noexcept {
    const double k = sched.effective();
    if (sched.variant == SoftEdgeVariant::inverted_exponential) {
        return 1.0 / (1.0 + k * std::exp(x));
    }
    // Evaluate on the side where exp() cannot overflow.
    const double z = k * x;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double focus_from_region(const DisparityMap& d, const RegionMask& mask) {
    if (!same_shape(d, mask)) {
        throw std::invalid_argument("focus mask " + shape_string(mask.width, mask.height) +
                                    " does not match disparity " + shape_string(d.width, d.height));
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < d.data.size(); ++i) {
        if (mask.data[i]) {
            sum += d.data[i];
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("focus mask selects no pixels");
    return clamp_disparity(sum / static_cast<double>(count));
}

}  // namespace bokeh
