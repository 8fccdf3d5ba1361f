// SPDX-License-Identifier: Apache-2.0
#include "bokeh/robustness.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "bokeh/imagio.hpp"
#include "bokeh/parallel.hpp"

namespace bokeh {

std::vector<int> parse_radii(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos || item.size() > 6) {
            throw std::invalid_argument("malformed radius list '" + text + "'");
        }
        out.push_back(std::stoi(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

namespace {

constexpr std::array<Morphology, 2> kKinds{Morphology::erode, Morphology::dilate};
constexpr std::array<const char*, 3> kMetrics{"psnr", "ssim", "edge_loss"};

// scores[kind][radius][metric]
using Scores = std::vector<std::vector<std::array<double, 3>>>;

}  // namespace

std::vector<SweepRow> robustness_sweep(const std::vector<SampleRecord>& records, const std::filesystem::path& root,
                                       const SweepOptions& opts) {
    std::vector<int> radii = opts.radii;
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    if (radii.empty() || radii.front() < 0) throw std::invalid_argument("sweep radii must be >= 0");
    if (radii.front() != 0) throw std::invalid_argument("sweep radii must include 0 (the reference)");
    if (records.empty()) throw std::invalid_argument("sweep needs at least one record");
    if (opts.aperture && !(*opts.aperture >= 0.0)) throw std::invalid_argument("sweep aperture must be >= 0");

    std::vector<Scores> per_record(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        const SampleRecord& rec = records[i];
        const RadianceImage aif = load_image(root / rec.all_in_focus, rec.transfer);
        const DisparityMap d = load_disparity(root / rec.disparity);
        if (!same_shape(aif, d)) {
            throw std::invalid_argument(rec.id + ": image " + shape_string(aif.width, aif.height) + " and disparity " +
                                        shape_string(d.width, d.height) + " differ in size");
        }
        const auto focus = rec.focus_disparity.find(to_string(opts.focus_mode));
        if (focus == rec.focus_disparity.end()) {
            throw std::invalid_argument(rec.id + ": no focus disparity for " + to_string(opts.focus_mode));
        }
        double aperture = 0.0;
        if (opts.aperture) aperture = *opts.aperture;
        else if (!rec.apertures.empty()) aperture = *std::max_element(rec.apertures.begin(), rec.apertures.end());
        const LensParams lens{aperture, focus->second};
        const RadianceImage reference = render_from_disparity(aif, d, lens, opts.render);

        Scores& s = per_record[i];
        s.assign(kKinds.size(), std::vector<std::array<double, 3>>(radii.size()));
        for (std::size_t k = 0; k < kKinds.size(); ++k) {
            for (std::size_t r = 0; r < radii.size(); ++r) {
                const RadianceImage pred =
                    radii[r] == 0 ? reference
                                  : render_from_disparity(aif, degrade_disparity(d, {kKinds[k], radii[r]}), lens,
                                                          opts.render);
                s[k][r] = {psnr(pred, reference), ssim(pred, reference), edge_loss(pred, reference, aif)};
            }
        }
    });

    std::vector<SweepRow> rows;
    std::vector<double> values(records.size());
    for (std::size_t k = 0; k < kKinds.size(); ++k) {
        for (std::size_t r = 0; r < radii.size(); ++r) {
            for (std::size_t m = 0; m < kMetrics.size(); ++m) {
                for (std::size_t i = 0; i < records.size(); ++i) values[i] = per_record[i][k][r][m];
                rows.push_back({kKinds[k], radii[r], kMetrics[m], summarize(values)});
            }
        }
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "kind,radius,metric,median,q1,q3\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%s,%.6f,%.6f,%.6f\n", to_string(r.kind), r.radius, r.metric.c_str(),
                      r.summary.median, r.summary.q1, r.summary.q3);
        os << buf;
    }
    return os.str();
}

}  // namespace bokeh
