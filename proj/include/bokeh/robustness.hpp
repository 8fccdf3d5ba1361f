// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bokeh/metrics.hpp"
#include "bokeh/renderer.hpp"
#include "bokeh/synth.hpp"

namespace bokeh {

struct SweepOptions {
    /// Degradation radii; must contain 0, which is the reference.
    std::vector<int> radii{0, 1, 2, 4};
    /// Aperture of the re-render; defaults to each record's largest level.
    std::optional<double> aperture;
    FocusMode focus_mode = FocusMode::background_mean;
    RenderConfig render;
};

/// Parses "0,1,2"; throws std::invalid_argument on anything else.
std::vector<int> parse_radii(const std::string& text);

struct SweepRow {
    Morphology kind = Morphology::erode;
    int radius = 0;
    std::string metric;  // psnr, ssim or edge_loss
    Summary summary;
};

/// Per record: render_from_disparity of the all-in-focus image with the
/// stored disparity is the reference; each eroded or dilated disparity is
/// re-rendered and scored against it. Rows are ordered by kind, radius,
/// metric; files resolve relative to `root`.
std::vector<SweepRow> robustness_sweep(const std::vector<SampleRecord>& records, const std::filesystem::path& root,
                                       const SweepOptions& opts);

/// Columns kind,radius,metric,median,q1,q3 with six decimals.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace bokeh
