// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bokeh/image.hpp"
#include "bokeh/synth.hpp"

namespace bokeh::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "bokeh");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Opaque textured image: smooth color ramps plus fine stripes and blocks so
/// that blur is measurable.
RadianceImage textured_image(int width, int height, std::uint64_t seed);

/// Straight-alpha RGBA asset: a textured ellipse with a one-pixel soft rim
/// on a transparent surround.
RgbaImage textured_cutout(int width, int height, std::uint64_t seed);

/// Writes `n_bg` backgrounds and `n_fg` foreground PNGs (8-bit sRGB) into
/// dir/backgrounds and dir/foregrounds.
void write_assets(const std::filesystem::path& dir, int n_bg, int n_fg, int bg_size = 160, int fg_size = 96);

/// Config over write_assets' directories.
SynthConfig asset_config(const std::filesystem::path& dir, int canvas, int n_scenes, std::uint64_t seed);

std::string file_hash(const std::filesystem::path& path);

}  // namespace bokeh::testing
