// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include <unistd.h>

#include "bokeh/fileutil.hpp"
#include "bokeh/imagio.hpp"

namespace bokeh::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<int> counter{0};
    const fs::path base = fs::temp_directory_path();
    for (;;) {
        path_ = base / (prefix + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        if (fs::create_directory(path_)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

namespace {

struct Palette {
    double base[3];
    double accent[3];
    double fx, fy, phase;
};

Palette palette(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 17);
    const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Palette p{};
    for (int c = 0; c < 3; ++c) {
        p.base[c] = 0.15 + 0.6 * u();
        p.accent[c] = 0.1 + 0.8 * u();
    }
    p.fx = 0.25 + 0.5 * u();
    p.fy = 0.25 + 0.5 * u();
    p.phase = 6.283 * u();
    return p;
}

double texture(const Palette& p, int c, int x, int y, int w, int h) {
    const double ramp = 0.5 * (static_cast<double>(x) / w + static_cast<double>(y) / h);
    const double stripes = 0.5 + 0.5 * std::sin(p.fx * x + p.phase) * std::cos(p.fy * y);
    const bool block = ((x / 6) + (y / 6)) % 2 == 0;
    const double v = p.base[c] * (0.6 + 0.4 * ramp) + 0.25 * p.accent[c] * stripes + (block ? 0.08 : 0.0);
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

RadianceImage textured_image(int width, int height, std::uint64_t seed) {
    const Palette p = palette(seed);
    RadianceImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = texture(p, c, x, y, width, height);
        }
    }
    return img;
}

RgbaImage textured_cutout(int width, int height, std::uint64_t seed) {
    const Palette p = palette(seed + 1000);
    RgbaImage img(width, height);
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double rx = width * 0.45;
    const double ry = height * 0.45;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = (x - cx) / rx;
            const double dy = (y - cy) / ry;
            // Signed distance to the rim, roughly in pixels.
            const double dist = (1.0 - std::sqrt(dx * dx + dy * dy)) * std::min(rx, ry);
            const double a = std::clamp(dist + 0.5, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = a > 0.0 ? texture(p, c, x, y, width, height) : 0.0;
            img.at(x, y, 3) = a;
        }
    }
    return img;
}

void write_assets(const fs::path& dir, int n_bg, int n_fg, int bg_size, int fg_size) {
    fs::create_directories(dir / "backgrounds");
    fs::create_directories(dir / "foregrounds");
    for (int i = 0; i < n_bg; ++i) {
        save_image(textured_image(bg_size + 16 * i, bg_size, 100 + i),
                   dir / "backgrounds" / ("bg" + std::to_string(i) + ".png"), Transfer::srgb, 8);
    }
    for (int i = 0; i < n_fg; ++i) {
        save_rgba(textured_cutout(fg_size, fg_size + 8 * i, 200 + i),
                  dir / "foregrounds" / ("fg" + std::to_string(i) + ".png"), Transfer::srgb, 8);
    }
}

SynthConfig asset_config(const fs::path& dir, int canvas, int n_scenes, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.background_dir = dir / "backgrounds";
    cfg.foreground_dir = dir / "foregrounds";
    cfg.width = canvas;
    cfg.height = canvas;
    cfg.n_scenes = n_scenes;
    cfg.seed = seed;
    return cfg;
}

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

}  // namespace bokeh::testing
