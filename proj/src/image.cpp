// SPDX-License-Identifier: Apache-2.0
#include "bokeh/image.hpp"

#include <algorithm>
#include <cmath>

namespace bokeh {

double clamp_disparity(double d) noexcept {
    return std::clamp(d, kDisparityEps, 1.0 - kDisparityEps);
}

namespace {

template <class R>
void validate_raster(const R& img, const char* what, bool alpha_last) {
    if (img.width < 0 || img.height < 0) {
        throw std::invalid_argument(std::string(what) + ": negative dimensions");
    }
    if (img.data.size() != img.pixel_count() * R::kChannels) {
        throw std::invalid_argument(std::string(what) + ": data length does not match dimensions");
    }
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double v = img.data[i];
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument(std::string(what) + ": sample is negative or non-finite");
        }
        if (alpha_last && i % R::kChannels == R::kChannels - 1 && v > 1.0) {
            throw std::invalid_argument(std::string(what) + ": alpha outside [0,1]");
        }
    }
}

}  // namespace

void validate(const RadianceImage& img) { validate_raster(img, "RadianceImage", false); }

void validate(const RgbaImage& img) { validate_raster(img, "RgbaImage", true); }

void validate(const DisparityMap& d) {
    if (d.width < 0 || d.height < 0 || d.data.size() != d.pixel_count()) {
        throw std::invalid_argument("DisparityMap: data length does not match dimensions");
    }
    for (double v : d.data) {
        if (!std::isfinite(v) || v < kDisparityEps || v > 1.0 - kDisparityEps) {
            throw std::invalid_argument("DisparityMap: sample outside the clamp range");
        }
    }
}

std::string shape_string(int width, int height) {
    return std::to_string(width) + "x" + std::to_string(height);
}

void clamp_in_place(DisparityMap& d) noexcept {
    for (double& v : d.data) v = clamp_disparity(v);
}

double bilinear(const DisparityMap& d, double x, double y) noexcept {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, d.width - 1);
    const int y1 = std::min(y0 + 1, d.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = d.at(x0, y0) + (d.at(x1, y0) - d.at(x0, y0)) * fx;
    const double bottom = d.at(x0, y1) + (d.at(x1, y1) - d.at(x0, y1)) * fx;
    return top + (bottom - top) * fy;
}

double bilinear_clamped(const DisparityMap& d, double x, double y) noexcept {
    return bilinear(d, std::clamp(x, 0.0, static_cast<double>(d.width - 1)),
                    std::clamp(y, 0.0, static_cast<double>(d.height - 1)));
}

bool contains(const DisparityMap& d, double x, double y) noexcept {
    return x >= 0.0 && y >= 0.0 && x <= d.width - 1 && y <= d.height - 1;
}

RadianceImage rgb_of(const RgbaImage& img) {
    RadianceImage out(img.width, img.height);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) out.data[p * 3 + c] = img.data[p * 4 + c];
    }
    return out;
}

PremultipliedImage premultiply(const RgbaImage& img) {
    PremultipliedImage out(img.width, img.height);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double a = img.data[p * 4 + 3];
        for (int c = 0; c < 3; ++c) out.data[p * 4 + c] = img.data[p * 4 + c] * a;
        out.data[p * 4 + 3] = a;
    }
    return out;
}

RgbaImage with_opaque_alpha(const RadianceImage& img) {
    RgbaImage out(img.width, img.height);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) out.data[p * 4 + c] = img.data[p * 3 + c];
        out.data[p * 4 + 3] = 1.0;
    }
    return out;
}

}  // namespace bokeh
