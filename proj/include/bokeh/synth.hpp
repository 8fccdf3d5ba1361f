// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bokeh/imagio.hpp"
#include "bokeh/renderer.hpp"

namespace bokeh {

enum class FocusMode { background_mean, foreground_mean };

const char* to_string(FocusMode mode) noexcept;
FocusMode parse_focus_mode(const std::string& name);

/// Raised for configuration problems; `errors` lists every violation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct SynthConfig {
    std::filesystem::path background_dir;
    std::filesystem::path foreground_dir;
    int width = 512;
    int height = 512;
    int n_scenes = 0;
    int min_foregrounds = 1;
    int max_foregrounds = 3;
    std::vector<double> aperture_levels{8.0, 16.0, 24.0, 32.0};
    std::vector<FocusMode> focus_modes{FocusMode::background_mean, FocusMode::foreground_mean};
    /// Largest |gx|, |gy| of a layer plane, disparity per pixel.
    double gradient_range = 1e-3;
    double background_min = 0.05;
    double background_max = 0.35;
    double foreground_min = 0.45;
    double foreground_max = 0.95;
    std::uint64_t seed = 0;
    /// Encoding of the written images.
    Transfer transfer = Transfer::srgb;
    int bit_depth = 16;
};

/// Every invariant violation, empty when the config is valid.
std::vector<std::string> config_errors(const SynthConfig& cfg);
void validate(const SynthConfig& cfg);

/// Parses the JSON config; relative asset directories resolve against
/// `base_dir`. Throws ConfigError listing all problems at once.
SynthConfig synth_config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
std::string to_json(const SynthConfig& cfg);

/// Per-scene RNG seed derived from (seed, scene_index).
std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t scene_index) noexcept;

/// Sorted list of *.png files; throws IoError when there are none.
std::vector<std::filesystem::path> list_assets(const std::filesystem::path& dir);

LayeredScene assemble_scene(const SynthConfig& cfg, std::uint64_t scene_index);
LayeredScene assemble_scene_from_seed(const SynthConfig& cfg, std::uint64_t seed);

/// Stable text description of a scene: canvas, layer placements, planes and
/// a fingerprint of each raster.
std::string describe_scene(const LayeredScene& scene);

struct BokehEntry {
    double aperture = 0.0;
    FocusMode focus_mode = FocusMode::background_mean;
    std::string path;

    friend bool operator==(const BokehEntry&, const BokehEntry&) = default;
};

struct SampleRecord {
    std::string id;
    std::uint64_t scene_index = 0;
    std::uint64_t scene_seed = 0;
    int width = 0;
    int height = 0;
    Transfer transfer = Transfer::srgb;
    /// Paths are relative to the manifest directory.
    std::string all_in_focus;
    std::string disparity;
    std::vector<BokehEntry> bokeh;
    std::map<std::string, double> focus_disparity;
    std::vector<double> apertures;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Focus disparity of a scene for one mode. Falls back to the whole frame
/// when the selected region is empty.
double scene_focus(const LayeredScene& scene, const DisparityMap& disparity, FocusMode mode);

/// Renders and writes one record's images into out_dir.
SampleRecord generate_sample(const LayeredScene& scene, const SynthConfig& cfg, const std::filesystem::path& out_dir,
                             std::uint64_t scene_index);

struct SkippedScene {
    std::uint64_t scene_index = 0;
    std::string reason;
};

struct DatasetResult {
    std::vector<SampleRecord> records;
    std::vector<SkippedScene> skipped;
    std::filesystem::path manifest_path;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Generates cfg.n_scenes records and writes out_dir/manifest.json. A scene
/// that fails is skipped and reported rather than aborting the run.
DatasetResult generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

std::string manifest_to_json(const std::vector<SampleRecord>& records);
std::vector<SampleRecord> manifest_from_json(const std::string& text);
std::vector<SampleRecord> load_manifest(const std::filesystem::path& path);

}  // namespace bokeh
