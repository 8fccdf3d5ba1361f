// SPDX-License-Identifier: Apache-2.0
#include "bokeh/synth.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "bokeh/fileutil.hpp"
#include "bokeh/lens.hpp"
#include "bokeh/parallel.hpp"

namespace bokeh {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(FocusMode mode) noexcept {
    return mode == FocusMode::background_mean ? "background_mean" : "foreground_mean";
}

FocusMode parse_focus_mode(const std::string& name) {
    if (name == "background_mean") return FocusMode::background_mean;
    if (name == "foreground_mean") return FocusMode::foreground_mean;
    throw std::invalid_argument("unknown focus mode '" + name + "'");
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string out = "invalid configuration:";
    for (const std::string& e : errors) out += "\n  " + e;
    return out;
}

constexpr int kMinAssetSide = 32;

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> config_errors(const SynthConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.background_dir.empty()) errs.push_back("background_dir: missing");
    if (cfg.foreground_dir.empty()) errs.push_back("foreground_dir: missing");
    if (cfg.width < kMinAssetSide || cfg.height < kMinAssetSide) {
        errs.push_back("canvas: width and height must be >= 32, got " + shape_string(cfg.width, cfg.height));
    }
    if (cfg.n_scenes < 0) errs.push_back("n_scenes: must be >= 0");
    if (cfg.min_foregrounds < 0 || cfg.min_foregrounds > cfg.max_foregrounds) {
        errs.push_back("n_foregrounds_per_scene: need 0 <= min <= max");
    }
    if (cfg.aperture_levels.empty()) errs.push_back("aperture_levels: must be nonempty");
    for (double a : cfg.aperture_levels) {
        if (!std::isfinite(a) || a < 0.0) {
            errs.push_back("aperture_levels: values must be finite and >= 0");
            break;
        }
    }
    if (cfg.focus_modes.empty()) errs.push_back("focus_modes: must be nonempty");
    if (std::set<FocusMode>(cfg.focus_modes.begin(), cfg.focus_modes.end()).size() != cfg.focus_modes.size()) {
        errs.push_back("focus_modes: duplicate entries");
    }
    if (!std::isfinite(cfg.gradient_range) || cfg.gradient_range < 0.0) {
        errs.push_back("gradient_range: must be finite and >= 0");
    }
    const auto check_range = [&](const char* name, double lo, double hi) {
        if (!(lo <= hi) || lo < kDisparityEps || hi > 1.0 - kDisparityEps) {
            errs.push_back(std::string("disparity_ranges.") + name + ": need 1e-4 <= min <= max <= 1 - 1e-4");
        }
    };
    check_range("background", cfg.background_min, cfg.background_max);
    check_range("foreground", cfg.foreground_min, cfg.foreground_max);
    if (!(cfg.background_max < cfg.foreground_min)) {
        errs.push_back("disparity_ranges: background must lie strictly behind (below) foreground");
    }
    if (cfg.bit_depth != 8 && cfg.bit_depth != 16) errs.push_back("bit_depth: must be 8 or 16");
    return errs;
}

void validate(const SynthConfig& cfg) {
    std::vector<std::string> errs = config_errors(cfg);
    if (!errs.empty()) throw ConfigError(std::move(errs));
}

// ---------------------------------------------------------------------------
// Config JSON

namespace {

const std::set<std::string, std::less<>> kConfigKeys = {
    "background_dir", "foreground_dir", "canvas",   "n_scenes",         "n_foregrounds_per_scene",
    "aperture_levels", "focus_modes",   "gradient_range", "disparity_ranges", "seed",
    "transfer",        "bit_depth",
};

bool read_pair(const json& v, double& lo, double& hi) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) return false;
    lo = v[0].get<double>();
    hi = v[1].get<double>();
    return true;
}

bool read_int(const json& v, int& out) {
    if (!v.is_number_integer()) return false;
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) return false;
    out = static_cast<int>(x);
    return true;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"top level must be a JSON object"});

    SynthConfig cfg;
    std::vector<std::string> errs;
    for (const auto& [key, value] : doc.items()) {
        if (!kConfigKeys.count(key)) errs.push_back("unknown key '" + key + "'");
    }

    const auto dir_field = [&](const char* key, fs::path& out) {
        if (!doc.contains(key)) {
            errs.push_back(std::string(key) + ": missing");
            return;
        }
        const json& v = doc[key];
        if (!v.is_string() || v.get<std::string>().empty()) {
            errs.push_back(std::string(key) + ": must be a nonempty string");
            return;
        }
        fs::path p = v.get<std::string>();
        out = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    dir_field("background_dir", cfg.background_dir);
    dir_field("foreground_dir", cfg.foreground_dir);

    if (doc.contains("canvas")) {
        const json& v = doc["canvas"];
        if (!v.is_object() || !v.contains("width") || !v.contains("height") || v.size() != 2 ||
            !read_int(v["width"], cfg.width) || !read_int(v["height"], cfg.height)) {
            errs.push_back("canvas: expected {\"width\": int, \"height\": int}");
        }
    }
    if (doc.contains("n_scenes") && !read_int(doc["n_scenes"], cfg.n_scenes)) {
        errs.push_back("n_scenes: expected an integer");
    }
    if (doc.contains("n_foregrounds_per_scene")) {
        const json& v = doc["n_foregrounds_per_scene"];
        if (!v.is_array() || v.size() != 2 || !read_int(v[0], cfg.min_foregrounds) ||
            !read_int(v[1], cfg.max_foregrounds)) {
            errs.push_back("n_foregrounds_per_scene: expected [min, max] integers");
        }
    }
    if (doc.contains("aperture_levels")) {
        const json& v = doc["aperture_levels"];
        cfg.aperture_levels.clear();
        bool ok = v.is_array();
        if (ok) {
            for (const json& a : v) {
                if (!a.is_number()) {
                    ok = false;
                    break;
                }
                cfg.aperture_levels.push_back(a.get<double>());
            }
        }
        if (!ok) errs.push_back("aperture_levels: expected an array of numbers");
    }
    if (doc.contains("focus_modes")) {
        const json& v = doc["focus_modes"];
        cfg.focus_modes.clear();
        if (!v.is_array()) {
            errs.push_back("focus_modes: expected an array of strings");
        } else {
            for (const json& m : v) {
                try {
                    cfg.focus_modes.push_back(parse_focus_mode(m.is_string() ? m.get<std::string>() : m.dump()));
                } catch (const std::invalid_argument& e) {
                    errs.push_back(std::string("focus_modes: ") + e.what());
                }
            }
        }
    }
    if (doc.contains("gradient_range")) {
        if (doc["gradient_range"].is_number()) cfg.gradient_range = doc["gradient_range"].get<double>();
        else errs.push_back("gradient_range: expected a number");
    }
    if (doc.contains("disparity_ranges")) {
        const json& v = doc["disparity_ranges"];
        bool ok = v.is_object() && v.size() == 2 && v.contains("background") && v.contains("foreground");
        ok = ok && read_pair(v["background"], cfg.background_min, cfg.background_max);
        ok = ok && read_pair(v["foreground"], cfg.foreground_min, cfg.foreground_max);
        if (!ok) errs.push_back("disparity_ranges: expected {\"background\": [lo, hi], \"foreground\": [lo, hi]}");
    }
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned()) cfg.seed = doc["seed"].get<std::uint64_t>();
        else errs.push_back("seed: expected a non-negative integer");
    }
    if (doc.contains("transfer")) {
        try {
            cfg.transfer = parse_transfer(doc["transfer"].is_string() ? doc["transfer"].get<std::string>() : "");
        } catch (const std::exception&) {
            errs.push_back("transfer: expected \"srgb\" or \"linear\"");
        }
    }
    if (doc.contains("bit_depth") && !read_int(doc["bit_depth"], cfg.bit_depth)) {
        errs.push_back("bit_depth: expected an integer");
    }

    // Range and consistency checks, skipping keys that already failed to parse.
    for (std::string& e : config_errors(cfg)) {
        const std::string root = e.substr(0, e.find_first_of(":."));
        const bool seen = std::any_of(errs.begin(), errs.end(),
                                      [&](const std::string& x) { return x.rfind(root, 0) == 0; });
        if (!seen) errs.push_back(std::move(e));
    }
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

std::string to_json(const SynthConfig& cfg) {
    ordered_json j;
    j["background_dir"] = cfg.background_dir.generic_string();
    j["foreground_dir"] = cfg.foreground_dir.generic_string();
    j["canvas"] = {{"width", cfg.width}, {"height", cfg.height}};
    j["n_scenes"] = cfg.n_scenes;
    j["n_foregrounds_per_scene"] = {cfg.min_foregrounds, cfg.max_foregrounds};
    j["aperture_levels"] = cfg.aperture_levels;
    ordered_json modes = ordered_json::array();
    for (FocusMode m : cfg.focus_modes) modes.push_back(to_string(m));
    j["focus_modes"] = modes;
    j["gradient_range"] = cfg.gradient_range;
    j["disparity_ranges"] = {{"background", {cfg.background_min, cfg.background_max}},
                             {"foreground", {cfg.foreground_min, cfg.foreground_max}}};
    j["seed"] = cfg.seed;
    j["transfer"] = cfg.transfer == Transfer::srgb ? "srgb" : "linear";
    j["bit_depth"] = cfg.bit_depth;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Scene assembly

namespace {

std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// The engine's output sequence is fixed by the standard; the conversions
/// to numbers are done here because library distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    int integer(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

/// Averages a supersampled bilinear footprint of the source rectangle
/// (crop_x, crop_y, crop_w, crop_h) into an out_w x out_h premultiplied image.
PremultipliedImage resample(const PremultipliedImage& src, double crop_x, double crop_y, double crop_w,
                            double crop_h, int out_w, int out_h) {
    PremultipliedImage out(out_w, out_h);
    const double sx = crop_w / out_w;
    const double sy = crop_h / out_h;
    const int nx = std::max(1, static_cast<int>(std::ceil(sx)));
    const int ny = std::max(1, static_cast<int>(std::ceil(sy)));
    const auto sample = [&](double x, double y, double* acc) {
        x = std::clamp(x, 0.0, src.width - 1.0);
        y = std::clamp(y, 0.0, src.height - 1.0);
        const int x0 = std::min(static_cast<int>(x), src.width - 1);
        const int y0 = std::min(static_cast<int>(y), src.height - 1);
        const int x1 = std::min(x0 + 1, src.width - 1);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fx = x - x0;
        const double fy = y - y0;
        for (int c = 0; c < 4; ++c) {
            const double top = src.at(x0, y0, c) * (1 - fx) + src.at(x1, y0, c) * fx;
            const double bot = src.at(x0, y1, c) * (1 - fx) + src.at(x1, y1, c) * fx;
            acc[c] += top * (1 - fy) + bot * fy;
        }
    };
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc[4] = {0, 0, 0, 0};
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    sample(crop_x + (x + (i + 0.5) / nx) * sx - 0.5, crop_y + (y + (j + 0.5) / ny) * sy - 0.5, acc);
                }
            }
            for (int c = 0; c < 4; ++c) out.at(x, y, c) = acc[c] / (nx * ny);
        }
    }
    return out;
}

RgbaImage unpremultiply(const PremultipliedImage& p) {
    RgbaImage out(p.width, p.height);
    for (std::size_t i = 0; i < p.pixel_count(); ++i) {
        const double a = std::clamp(p.data[i * 4 + 3], 0.0, 1.0);
        for (int c = 0; c < 3; ++c) out.data[i * 4 + c] = a > 0.0 ? std::max(p.data[i * 4 + c] / a, 0.0) : 0.0;
        out.data[i * 4 + 3] = a;
    }
    return out;
}

RgbaImage load_asset(const fs::path& path, Transfer transfer) {
    RgbaImage img = load_rgba(path, transfer);
    if (img.width < kMinAssetSide || img.height < kMinAssetSide) {
        throw std::invalid_argument("asset " + path.filename().string() + " is " +
                                    shape_string(img.width, img.height) + ", smaller than 32 px on a side");
    }
    return img;
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t scene_index) noexcept {
    return mix64(mix64(seed) ^ mix64(scene_index + 0x632BE59BD9B4E019ull));
}

std::vector<fs::path> list_assets(const fs::path& dir) {
    std::error_code ec;
    std::vector<fs::path> out;
    fs::directory_iterator it(dir, ec);
    if (ec) throw IoError("cannot list asset directory " + dir.string() + ": " + ec.message());
    for (const fs::directory_entry& e : it) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") out.push_back(e.path());
    }
    if (out.empty()) throw IoError("asset directory " + dir.string() + " contains no PNG files");
    std::sort(out.begin(), out.end());
    return out;
}

LayeredScene assemble_scene(const SynthConfig& cfg, std::uint64_t scene_index) {
    return assemble_scene_from_seed(cfg, scene_seed(cfg.seed, scene_index));
}

LayeredScene assemble_scene_from_seed(const SynthConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    const std::vector<fs::path> backgrounds = list_assets(cfg.background_dir);
    const std::vector<fs::path> foregrounds = list_assets(cfg.foreground_dir);
    Rng rng(seed);
    const int W = cfg.width;
    const int H = cfg.height;
    const double g = cfg.gradient_range;

    LayeredScene scene;
    scene.width = W;
    scene.height = H;

    // Background: center crop to the canvas aspect, then resample.
    {
        const fs::path& path = backgrounds[static_cast<std::size_t>(rng.integer(0, int(backgrounds.size()) - 1))];
        RgbaImage src = load_asset(path, cfg.transfer);
        for (std::size_t i = 0; i < src.pixel_count(); ++i) src.data[i * 4 + 3] = 1.0;
        const double aspect = static_cast<double>(W) / H;
        double cw = src.width;
        double ch = src.height;
        if (cw / ch > aspect) cw = ch * aspect;
        else ch = cw / aspect;
        RgbaImage rgba = unpremultiply(
            resample(premultiply(src), (src.width - cw) / 2, (src.height - ch) / 2, cw, ch, W, H));
        for (std::size_t i = 0; i < rgba.pixel_count(); ++i) rgba.data[i * 4 + 3] = 1.0;
        scene.background.rgba = std::move(rgba);
        DisparityPlane& p = scene.background.plane;
        p.d0 = rng.uniform(cfg.background_min, cfg.background_max);
        p.gx = rng.uniform(-g, g);
        p.gy = rng.uniform(-g, g);
        p.cx = (W - 1) / 2.0;
        p.cy = (H - 1) / 2.0;
        p.lo = cfg.background_min;
        p.hi = cfg.background_max;
    }

    const int count = rng.integer(cfg.min_foregrounds, cfg.max_foregrounds);
    for (int k = 0; k < count; ++k) {
        const fs::path& path = foregrounds[static_cast<std::size_t>(rng.integer(0, int(foregrounds.size()) - 1))];
        const RgbaImage src = load_asset(path, cfg.transfer);
        const double scale = rng.uniform(0.4, 1.0);
        const int h = std::max(1, static_cast<int>(std::lround(scale * H)));
        const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(h) * src.width / src.height)));
        Layer layer;
        layer.rgba = unpremultiply(resample(premultiply(src), 0, 0, src.width, src.height, w, h));
        // At least half of each axis stays on canvas, so >= 25% of the area.
        layer.offset_x = static_cast<int>(std::floor(rng.uniform(-w / 2.0, W - w / 2.0)));
        layer.offset_y = static_cast<int>(std::floor(rng.uniform(-h / 2.0, H - h / 2.0)));
        DisparityPlane& p = layer.plane;
        p.d0 = rng.uniform(cfg.foreground_min, cfg.foreground_max);
        p.gx = rng.uniform(-g, g);
        p.gy = rng.uniform(-g, g);
        p.cx = layer.offset_x + (w - 1) / 2.0;
        p.cy = layer.offset_y + (h - 1) / 2.0;
        p.lo = cfg.foreground_min;
        p.hi = cfg.foreground_max;
        scene.foregrounds.push_back(std::move(layer));
    }
    std::stable_sort(scene.foregrounds.begin(), scene.foregrounds.end(),
                     [](const Layer& a, const Layer& b) { return a.plane.d0 < b.plane.d0; });
    // Equal draws are practically impossible but would break the strict order.
    for (std::size_t i = 1; i < scene.foregrounds.size(); ++i) {
        double& d = scene.foregrounds[i].plane.d0;
        const double prev = scene.foregrounds[i - 1].plane.d0;
        if (d <= prev) d = std::nextafter(prev, 2.0);
    }
    return scene;
}

std::string describe_scene(const LayeredScene& scene) {
    std::ostringstream os;
    char buf[256];
    os << "canvas " << scene.width << "x" << scene.height << "\n";
    const auto layer_line = [&](const char* name, const Layer& l) {
        const DisparityPlane& p = l.plane;
        const std::string_view bytes(reinterpret_cast<const char*>(l.rgba.data.data()),
                                     l.rgba.data.size() * sizeof(double));
        std::snprintf(buf, sizeof buf,
                      "%s size %dx%d offset %d,%d d0 %.17g g %.17g,%.17g c %.17g,%.17g range %.17g,%.17g rgba %s\n",
                      name, l.rgba.width, l.rgba.height, l.offset_x, l.offset_y, p.d0, p.gx, p.gy, p.cx, p.cy, p.lo,
                      p.hi, hex64(fnv1a64(bytes)).c_str());
        os << buf;
    };
    layer_line("background", scene.background);
    for (const Layer& l : scene.foregrounds) layer_line("foreground", l);
    return os.str();
}

// ---------------------------------------------------------------------------
// Samples and datasets

double scene_focus(const LayeredScene& scene, const DisparityMap& disparity, FocusMode mode) {
    const LayerIndexMap owner = scene_layer_index(scene);
    RegionMask mask(scene.width, scene.height, 0);
    bool any = false;
    for (std::size_t i = 0; i < owner.pixel_count(); ++i) {
        const bool bg = owner.data[i] == 0;
        const bool pick = mode == FocusMode::background_mean ? bg : !bg;
        mask.data[i] = pick ? 1 : 0;
        any = any || pick;
    }
    if (!any) std::fill(mask.data.begin(), mask.data.end(), std::uint8_t{1});
    return focus_from_region(disparity, mask);
}

namespace {

std::string aperture_tag(double a) {
    char buf[64];
    if (a == std::floor(a) && a < 1e9) {
        std::snprintf(buf, sizeof buf, "%.0f", a);
    } else {
        std::snprintf(buf, sizeof buf, "%.6g", a);
        for (char* c = buf; *c; ++c) {
            if (*c == '.') *c = 'p';
        }
    }
    return buf;
}

std::string record_id(std::uint64_t scene_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%06" PRIu64, scene_index);
    return buf;
}

/// Removes every file it was told about unless released.
class FileGuard {
public:
    explicit FileGuard(fs::path dir) : dir_(std::move(dir)) {}
    ~FileGuard() {
        std::error_code ec;
        for (const std::string& f : files_) fs::remove(dir_ / f, ec);
    }
    void add(const std::string& f) { files_.push_back(f); }
    void release() { files_.clear(); }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

}  // namespace

SampleRecord generate_sample(const LayeredScene& scene, const SynthConfig& cfg, const fs::path& out_dir,
                             std::uint64_t scene_index) {
    validate(scene);
    SampleRecord rec;
    rec.id = record_id(scene_index);
    rec.scene_index = scene_index;
    rec.scene_seed = scene_seed(cfg.seed, scene_index);
    rec.width = scene.width;
    rec.height = scene.height;
    rec.transfer = cfg.transfer;
    rec.apertures = cfg.aperture_levels;

    FileGuard guard(out_dir);
    rec.all_in_focus = rec.id + "_aif.png";
    guard.add(rec.all_in_focus);
    save_image(all_in_focus(scene), out_dir / rec.all_in_focus, cfg.transfer, cfg.bit_depth);

    const DisparityMap disparity = scene_disparity(scene);
    rec.disparity = rec.id + "_disparity.png";
    guard.add(rec.disparity);
    save_disparity(disparity, out_dir / rec.disparity);

    for (FocusMode mode : cfg.focus_modes) {
        rec.focus_disparity[to_string(mode)] = scene_focus(scene, disparity, mode);
    }
    for (double aperture : cfg.aperture_levels) {
        for (FocusMode mode : cfg.focus_modes) {
            const LensParams lens{aperture, rec.focus_disparity[to_string(mode)]};
            BokehEntry e{aperture, mode, rec.id + "_bokeh_a" + aperture_tag(aperture) + "_" + to_string(mode) + ".png"};
            guard.add(e.path);
            save_image(render(scene, lens), out_dir / e.path, cfg.transfer, cfg.bit_depth);
            rec.bokeh.push_back(std::move(e));
        }
    }
    guard.release();
    return rec;
}

DatasetResult generate_dataset(const SynthConfig& cfg, const fs::path& out_dir) {
    validate(cfg);
    list_assets(cfg.background_dir);
    list_assets(cfg.foreground_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    const auto n = static_cast<std::size_t>(cfg.n_scenes);
    std::vector<std::optional<SampleRecord>> records(n);
    std::vector<std::string> failures(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            const LayeredScene scene = assemble_scene(cfg, i);
            records[i] = generate_sample(scene, cfg, out_dir, i);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    DatasetResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i]) result.records.push_back(std::move(*records[i]));
        else result.skipped.push_back({i, failures[i]});
    }
    result.manifest_path = out_dir / kManifestName;
    write_file_atomic(result.manifest_path, manifest_to_json(result.records));
    return result;
}

// ---------------------------------------------------------------------------
// Manifest

std::string manifest_to_json(const std::vector<SampleRecord>& records) {
    ordered_json arr = ordered_json::array();
    for (const SampleRecord& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["scene_index"] = r.scene_index;
        j["scene_seed"] = r.scene_seed;
        j["width"] = r.width;
        j["height"] = r.height;
        j["transfer"] = r.transfer == Transfer::srgb ? "srgb" : "linear";
        j["all_in_focus"] = r.all_in_focus;
        j["disparity"] = r.disparity;
        ordered_json bokeh = ordered_json::array();
        for (const BokehEntry& e : r.bokeh) {
            bokeh.push_back({{"aperture", e.aperture}, {"focus_mode", to_string(e.focus_mode)}, {"path", e.path}});
        }
        j["bokeh"] = bokeh;
        ordered_json focus = ordered_json::object();
        for (const auto& [mode, d] : r.focus_disparity) focus[mode] = d;
        j["focus_disparity"] = focus;
        j["apertures"] = r.apertures;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<SampleRecord> manifest_from_json(const std::string& text) {
    std::vector<SampleRecord> out;
    try {
        const json arr = json::parse(text);
        if (!arr.is_array()) throw std::invalid_argument("manifest: top level must be an array");
        for (const json& j : arr) {
            SampleRecord r;
            r.id = j.at("id").get<std::string>();
            r.scene_index = j.at("scene_index").get<std::uint64_t>();
            r.scene_seed = j.at("scene_seed").get<std::uint64_t>();
            r.width = j.at("width").get<int>();
            r.height = j.at("height").get<int>();
            r.transfer = parse_transfer(j.at("transfer").get<std::string>());
            r.all_in_focus = j.at("all_in_focus").get<std::string>();
            r.disparity = j.at("disparity").get<std::string>();
            for (const json& e : j.at("bokeh")) {
                r.bokeh.push_back({e.at("aperture").get<double>(),
                                   parse_focus_mode(e.at("focus_mode").get<std::string>()),
                                   e.at("path").get<std::string>()});
            }
            for (const auto& [mode, d] : j.at("focus_disparity").items()) {
                parse_focus_mode(mode);
                r.focus_disparity[mode] = d.get<double>();
            }
            r.apertures = j.at("apertures").get<std::vector<double>>();
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest: ") + e.what());
    }
    return out;
}

std::vector<SampleRecord> load_manifest(const fs::path& path) { return manifest_from_json(read_file(path)); }

}  // namespace bokeh
