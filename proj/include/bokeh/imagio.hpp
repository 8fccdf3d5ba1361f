// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "bokeh/fileutil.hpp"
#include "bokeh/image.hpp"

namespace bokeh {

enum class Transfer { srgb, linear };

Transfer parse_transfer(std::string_view name);

/// Standard sRGB EOTF and its inverse on [0,1].
double srgb_to_linear(double encoded) noexcept;
double linear_to_srgb(double linear) noexcept;

/// Quantizes a [0,1] value to an integer code, rounding half up. Values
/// outside [0,1] are clamped first.
std::uint32_t quantize(double v, int bit_depth) noexcept;

/// Raw decoded PNG samples, before any transfer function.
struct PngPixels {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1..4
    int bit_depth = 8;  // 8 or 16
    std::vector<std::uint16_t> samples;

    std::uint32_t max_code() const noexcept { return bit_depth == 16 ? 65535u : 255u; }
    std::size_t pixel_samples() const noexcept {
        return static_cast<std::size_t>(width) * height * channels;
    }
};

PngPixels decode_png(const std::filesystem::path& path);
/// Atomic: the file at `path` is either the old one or the complete new one.
void encode_png(const std::filesystem::path& path, const PngPixels& px);

/// Loads an 8/16-bit PNG with 1 or 3 channels; gray is replicated to RGB.
RadianceImage load_image(const std::filesystem::path& path, Transfer transfer);
void save_image(const RadianceImage& img, const std::filesystem::path& path, Transfer transfer,
                int bit_depth);

/// Loads any 1-4 channel PNG as straight-alpha RGBA; alpha is always linear
/// and defaults to 1 when the file has none.
RgbaImage load_rgba(const std::filesystem::path& path, Transfer transfer);
void save_rgba(const RgbaImage& img, const std::filesystem::path& path, Transfer transfer,
               int bit_depth);

/// Single-channel 8/16-bit PNG or 1-channel PFM; samples are clamped into
/// [kDisparityEps, 1 - kDisparityEps].
DisparityMap load_disparity(const std::filesystem::path& path);
/// Writes a 16-bit single-channel PNG.
void save_disparity(const DisparityMap& d, const std::filesystem::path& path);

/// Binary mask from a PNG: a pixel is selected when its first channel is at
/// least half of the code range.
RegionMask load_mask(const std::filesystem::path& path);

}  // namespace bokeh
