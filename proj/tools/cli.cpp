// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bokeh/fileutil.hpp"
#include "bokeh/imagio.hpp"
#include "bokeh/lens.hpp"
#include "bokeh/metrics.hpp"
#include "bokeh/parallel.hpp"
#include "bokeh/pisa.hpp"
#include "bokeh/renderer.hpp"
#include "bokeh/robustness.hpp"
#include "bokeh/synth.hpp"

namespace bokeh::cli {

namespace fs = std::filesystem;

namespace {

/// Bad flag values discovered after parsing; exit code 1.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double parse_number(const std::string& text, const char* flag) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw UsageError(std::string(flag) + ": expected a number, got '" + text + "'");
    }
    return v;
}

Transfer transfer_flag(const std::string& name) {
    try {
        return parse_transfer(name);
    } catch (const std::exception&) {
        throw UsageError("--transfer: expected srgb or linear, got '" + name + "'");
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------------------

struct ImageInputs {
    std::string image;
    std::string disparity;
    std::string transfer = "srgb";
    bool invert = false;
    int depth = 16;
    double aperture = 0.0;
};

void add_image_inputs(CLI::App* cmd, ImageInputs& in) {
    cmd->add_option("--image", in.image, "All-in-focus PNG")->required();
    cmd->add_option("--disparity", in.disparity, "Disparity PNG or PFM (larger is nearer)")->required();
    cmd->add_option("--aperture", in.aperture, "CoC radius in pixels per unit disparity")
        ->required()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--transfer", in.transfer, "Image encoding: srgb or linear")->capture_default_str();
    cmd->add_flag("--invert", in.invert, "Input is depth-like (larger is farther); use 1 - v");
    cmd->add_option("--depth", in.depth, "Output bit depth")->check(CLI::IsMember({8, 16}))->capture_default_str();
}

struct LoadedInputs {
    RadianceImage image;
    DisparityMap disparity;
    Transfer transfer = Transfer::srgb;
};

LoadedInputs load_inputs(const ImageInputs& in) {
    LoadedInputs li;
    li.transfer = transfer_flag(in.transfer);
    li.image = load_image(in.image, li.transfer);
    li.disparity = load_disparity(in.disparity);
    if (in.invert) {
        for (double& v : li.disparity.data) v = 1.0 - v;
        clamp_in_place(li.disparity);
    }
    if (!same_shape(li.image, li.disparity)) {
        throw std::runtime_error("image " + shape_string(li.image.width, li.image.height) + " and disparity " +
                                 shape_string(li.disparity.width, li.disparity.height) + " differ in size");
    }
    return li;
}

struct RenderArgs {
    ImageInputs in;
    std::string focus = "0.5";
    std::string mask;
    std::string out;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool auto_bg = a.focus == "auto-bg";
    const bool auto_fg = a.focus == "auto-fg";
    double focus = 0.0;
    if (auto_bg || auto_fg) {
        if (a.mask.empty()) throw UsageError("--focus " + a.focus + " requires --mask");
    } else {
        if (!a.mask.empty()) throw UsageError("--mask is only used with --focus auto-bg or auto-fg");
        focus = parse_number(a.focus, "--focus");
        if (focus < 0.0 || focus > 1.0) throw UsageError("--focus: expected a value in [0, 1]");
    }
    transfer_flag(a.in.transfer);

    const LoadedInputs li = load_inputs(a.in);
    if (auto_bg || auto_fg) {
        RegionMask mask = load_mask(a.mask);
        if (!same_shape(mask, li.disparity)) {
            throw std::runtime_error("mask " + shape_string(mask.width, mask.height) + " and disparity " +
                                     shape_string(li.disparity.width, li.disparity.height) + " differ in size");
        }
        // The mask marks the foreground; the background is its complement.
        if (auto_bg) {
            for (auto& m : mask.data) m = m ? 0 : 1;
        }
        focus = focus_from_region(li.disparity, mask);
    }
    const LensParams lens{a.in.aperture, focus};
    const RadianceImage result = render_from_disparity(li.image, li.disparity, lens);
    save_image(result, a.out, li.transfer, a.in.depth);

    const RadiusField radii = defocus_map(li.disparity, lens);
    const double max_radius = radii.data.empty() ? 0.0 : *std::max_element(radii.data.begin(), radii.data.end());
    out << "render " << shape_string(li.image.width, li.image.height) << " focus " << fmt("%.6f", focus)
        << " aperture " << fmt("%g", lens.aperture_scale) << " max_radius " << fmt("%.3f", max_radius) << " time "
        << fmt("%.3f", seconds_since(t0)) << "s -> " << a.out << "\n";
    return 0;
}

struct FocalStackArgs {
    ImageInputs in;
    int steps = 5;
    std::string out;
};

/// N focus values evenly spaced over the admissible disparity range; a
/// single step sits at the middle.
std::vector<double> stack_focuses(int steps) {
    if (steps == 1) return {0.5};
    std::vector<double> f;
    for (int i = 0; i < steps; ++i) {
        f.push_back(kDisparityEps + (1.0 - 2.0 * kDisparityEps) * i / (steps - 1));
    }
    return f;
}

int cmd_focalstack(const FocalStackArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    transfer_flag(a.in.transfer);
    const LoadedInputs li = load_inputs(a.in);
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());

    std::vector<fs::path> written;
    try {
        for (double f : stack_focuses(a.steps)) {
            const RadianceImage img = render_from_disparity(li.image, li.disparity, LensParams{a.in.aperture, f});
            char name[64];
            std::snprintf(name, sizeof name, "focus_%.6f.png", f);
            const fs::path path = fs::path(a.out) / name;
            save_image(img, path, li.transfer, a.in.depth);
            written.push_back(path);
        }
    } catch (...) {
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }
    out << "focalstack " << shape_string(li.image.width, li.image.height) << " steps " << a.steps << " aperture "
        << fmt("%g", a.in.aperture) << " time " << fmt("%.3f", seconds_since(t0)) << "s -> " << a.out << "\n";
    return 0;
}

struct SynthArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string text;
    try {
        text = read_file(a.config);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    SynthConfig cfg = synth_config_from_json(text, fs::path(a.config).parent_path());
    if (a.seed) cfg.seed = *a.seed;
    const DatasetResult result = generate_dataset(cfg, a.out);
    out << "synth " << result.records.size() << " records, " << result.skipped.size() << " skipped, time "
        << fmt("%.3f", seconds_since(t0)) << "s -> " << result.manifest_path.string() << "\n";
    for (const SkippedScene& s : result.skipped) out << "  skipped scene " << s.scene_index << ": " << s.reason << "\n";
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string aif;
    bool align = false;
    std::string report;
    std::string transfer = "srgb";
};

std::set<std::string> png_names(const fs::path& dir) {
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::set<std::string> names;
    for (const fs::directory_entry& e : it) {
        if (e.is_regular_file() && e.path().extension() == ".png") names.insert(e.path().filename().string());
    }
    return names;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const Transfer transfer = transfer_flag(a.transfer);
    const std::set<std::string> pred = png_names(a.pred);
    const std::set<std::string> gt = png_names(a.gt);
    if (pred.empty() && gt.empty()) throw std::runtime_error("no PNG files in " + a.pred + " or " + a.gt);
    std::vector<std::string> unmatched;
    for (const std::string& n : pred) {
        if (!gt.count(n)) unmatched.push_back(n + " (missing from --gt)");
    }
    for (const std::string& n : gt) {
        if (!pred.count(n)) unmatched.push_back(n + " (missing from --pred)");
    }
    if (!a.aif.empty()) {
        const std::set<std::string> aif = png_names(a.aif);
        for (const std::string& n : gt) {
            if (!aif.count(n)) unmatched.push_back(n + " (missing from --aif)");
        }
    }
    if (!unmatched.empty()) {
        std::string msg = "unmatched files:";
        for (const std::string& u : unmatched) msg += "\n  " + u;
        throw std::runtime_error(msg);
    }

    std::vector<MetricRow> rows(gt.size());
    const std::vector<std::string> names(gt.begin(), gt.end());
    parallel_for(names.size(), [&](std::size_t i) {
        const std::string& n = names[i];
        RadianceImage p = load_image(fs::path(a.pred) / n, transfer);
        const RadianceImage g = load_image(fs::path(a.gt) / n, transfer);
        if (!same_shape(p, g)) {
            throw std::runtime_error(n + ": prediction " + shape_string(p.width, p.height) + " and ground truth " +
                                     shape_string(g.width, g.height) + " differ in size");
        }
        if (a.align) p = exposure_align(p, g);
        MetricRow& row = rows[i];
        row.id = n;
        row.mse = mse(p, g);
        row.psnr_db = psnr(p, g);
        row.ssim = ssim(p, g);
        if (!a.aif.empty()) {
            const RadianceImage s = load_image(fs::path(a.aif) / n, transfer);
            if (!same_shape(s, g)) throw std::runtime_error(n + ": all-in-focus image differs in size");
            row.edge_loss = edge_loss(p, g, s);
        }
    });
    const MetricReport report = make_report(std::move(rows));
    write_file_atomic(a.report, to_json(report));
    out << "eval " << report.rows.size() << " pairs, median psnr "
        << fmt("%.4f", report.aggregate.at("psnr_db").median) << " dB, median ssim "
        << fmt("%.6f", report.aggregate.at("ssim").median) << " -> " << a.report << "\n";
    return 0;
}

struct RobustnessArgs {
    std::string manifest;
    std::string radii = "0,1,2,4";
    std::string report;
    std::optional<double> aperture;
    std::string focus_mode = "background_mean";
};

int cmd_robustness(const RobustnessArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepOptions opts;
    try {
        opts.radii = parse_radii(a.radii);
        opts.focus_mode = parse_focus_mode(a.focus_mode);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (std::find(opts.radii.begin(), opts.radii.end(), 0) == opts.radii.end()) {
        throw UsageError("--radii must include 0 (the reference)");
    }
    opts.aperture = a.aperture;
    std::vector<SampleRecord> records;
    try {
        records = load_manifest(a.manifest);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::vector<SweepRow> rows = robustness_sweep(records, fs::path(a.manifest).parent_path(), opts);
    write_file_atomic(a.report, sweep_to_csv(rows));
    out << "robustness " << records.size() << " records, " << opts.radii.size() << " radii, time "
        << fmt("%.3f", seconds_since(t0)) << "s -> " << a.report << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// attn: evaluates one PISA layer from a JSON description and dumps the trace.

pisa::Matrix matrix_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw UsageError(std::string(name) + ": expected rows");
    pisa::Matrix m(j.size(), j[0].size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (j[r].size() != m.cols) throw UsageError(std::string(name) + ": ragged rows");
        for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::ordered_json matrix_to_json(const pisa::Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct AttnArgs {
    std::string input;
    std::string out;
};

int cmd_attn(const AttnArgs& a, std::ostream& out) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(a.input));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("--input: ") + e.what());
    }
    pisa::AttentionBatch batch;
    pisa::GeometryContext geom;
    LensParams lens;
    SoftEdgeSchedule sched;
    int depth_samples = 8;
    int super_samples = 4;
    double jitter = 0.5;
    try {
        batch.query = matrix_from_json(j.at("query"), "query");
        batch.key = matrix_from_json(j.at("key"), "key");
        batch.value = matrix_from_json(j.at("value"), "value");
        const auto& f = j.at("field");
        DisparityMap field(f.at("width").get<int>(), f.at("height").get<int>());
        const auto data = f.at("data").get<std::vector<double>>();
        if (data.size() != field.pixel_count()) throw UsageError("field: data size does not match width*height");
        field.data = data;
        clamp_in_place(field);
        geom = pisa::GeometryContext::from_field(std::move(field), j.value("pixel_scale", 8.0));
        lens.aperture_scale = j.at("aperture_scale").get<double>();
        lens.focus_disparity = j.at("focus_disparity").get<double>();
        sched.sharpness = j.value("sharpness", kSharpnessCap);
        depth_samples = j.value("depth_samples", 8);
        super_samples = j.value("super_samples", 4);
        jitter = j.value("jitter_radius", 0.5);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("--input: ") + e.what());
    }
    const auto occ = pisa::OcclusionConfig::make(depth_samples, super_samples, jitter);
    const pisa::PisaTrace t = pisa::pisa_attention_traced(batch, geom, lens, sched, occ);
    nlohmann::ordered_json o;
    o["similarity"] = matrix_to_json(t.similarity);
    o["coc"] = matrix_to_json(t.coc);
    o["attention"] = matrix_to_json(t.attention);
    o["visibility"] = matrix_to_json(t.visibility);
    o["output"] = matrix_to_json(t.output);
    write_file_atomic(a.out, o.dump(2) + "\n");
    out << "attn " << batch.tokens() << " tokens -> " << a.out << "\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Physically based lens blur: rendering, dataset synthesis and evaluation", "bokehkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

    RenderArgs render_args;
    CLI::App* render = app.add_subcommand("render", "Defocus one image from its disparity map");
    add_image_inputs(render, render_args.in);
    render->add_option("--focus", render_args.focus, "Focus disparity, or auto-bg / auto-fg with --mask")
        ->capture_default_str();
    render->add_option("--mask", render_args.mask, "Foreground mask PNG for auto focus");
    render->add_option("--out", render_args.out, "Output PNG")->required();

    FocalStackArgs stack_args;
    CLI::App* stack = app.add_subcommand("focalstack", "Render a sweep of focus disparities");
    add_image_inputs(stack, stack_args.in);
    stack->add_option("--steps", stack_args.steps, "Number of focus planes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    stack->add_option("--out", stack_args.out, "Output directory")->required();

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a layered synthetic dataset");
    synth->add_option("--config", synth_args.config, "JSON config")->required();
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_option("--seed", synth_args.seed, "Override the config seed");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->add_option("--pred", eval_args.pred, "Prediction directory")->required();
    eval->add_option("--gt", eval_args.gt, "Ground-truth directory")->required();
    eval->add_option("--aif", eval_args.aif, "All-in-focus directory; enables edge_loss");
    eval->add_flag("--align-exposure", eval_args.align, "Match each prediction's mean to its ground truth");
    eval->add_option("--report", eval_args.report, "Output JSON report")->required();
    eval->add_option("--transfer", eval_args.transfer, "Image encoding: srgb or linear")->capture_default_str();

    RobustnessArgs rob_args;
    CLI::App* rob = app.add_subcommand("robustness", "Erode/dilate disparity sweep over a manifest");
    rob->add_option("--manifest", rob_args.manifest, "Dataset manifest.json")->required();
    rob->add_option("--radii", rob_args.radii, "Comma-separated radii including 0")->capture_default_str();
    rob->add_option("--report", rob_args.report, "Output CSV")->required();
    rob->add_option("--aperture", rob_args.aperture, "Aperture (default: each record's largest level)")
        ->check(CLI::NonNegativeNumber);
    rob->add_option("--focus-mode", rob_args.focus_mode, "background_mean or foreground_mean")
        ->capture_default_str();

    AttnArgs attn_args;
    CLI::App* attn = app.add_subcommand("attn", "Evaluate one attention layer from JSON and dump its matrices");
    attn->add_option("--input", attn_args.input, "Input JSON")->required();
    attn->add_option("--out", attn_args.out, "Output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    set_thread_count(threads);
    try {
        if (render->parsed()) return cmd_render(render_args, out);
        if (stack->parsed()) return cmd_focalstack(stack_args, out);
        if (synth->parsed()) return cmd_synth(synth_args, out);
        if (eval->parsed()) return cmd_eval(eval_args, out);
        if (rob->parsed()) return cmd_robustness(rob_args, out);
        if (attn->parsed()) return cmd_attn(attn_args, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace bokeh::cli
