// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bokeh/metrics.hpp"
#include "fixtures.hpp"
#include "reference_data.hpp"

namespace bokeh {
namespace {

TEST(Ssim, MatchesReferenceImplementation) {
    for (int k = 0; k < 10; ++k) {
        const auto [a, b] = testing::ssim_pair(k);
        EXPECT_NEAR(ssim(a, b), testing::kReferenceSsim[k], 1e-4) << "pair " << k;
    }
}

TEST(Ssim, IdentitySymmetryAndInversion) {
    const RadianceImage a = testing::textured_image(48, 40, 1);
    const RadianceImage b = testing::textured_image(48, 40, 2);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-9);
    RadianceImage inv = a;
    for (double& v : inv.data) v = 1.0 - v;
    EXPECT_LT(ssim(a, inv), 1.0);
    EXPECT_THROW(ssim(a, RadianceImage(48, 39)), std::invalid_argument);
}

TEST(Mse, Examples) {
    const RadianceImage zero(8, 6, 0.0);
    EXPECT_EQ(mse(zero, zero), 0.0);
    EXPECT_EQ(mse(zero, RadianceImage(8, 6, 1.0)), 1.0);
    EXPECT_NEAR(mse(zero, RadianceImage(8, 6, 0.1)), 0.01, 1e-15);
    EXPECT_THROW(mse(zero, RadianceImage(6, 8)), std::invalid_argument);
}

TEST(Psnr, Examples) {
    const RadianceImage zero(8, 6, 0.0);
    EXPECT_EQ(psnr(zero, zero), kPsnrCap);
    EXPECT_NEAR(psnr(zero, RadianceImage(8, 6, 1.0)), 0.0, 1e-12);
    EXPECT_NEAR(psnr(zero, RadianceImage(8, 6, 0.1)), 20.0, 1e-9);
    const RadianceImage a = testing::textured_image(20, 20, 3);
    const RadianceImage b = testing::textured_image(20, 20, 4);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_EQ(mse(a, b), mse(b, a));
    EXPECT_NEAR(psnr(a, b), -10 * std::log10(mse(a, b)), 1e-12);
}

RadianceImage step_image(int w, int h, int split, double lo, double hi) {
    RadianceImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = x < split ? lo : hi;
        }
    }
    return img;
}

TEST(EdgeLoss, Examples) {
    const RadianceImage a = testing::textured_image(32, 24, 5);
    const RadianceImage b = testing::textured_image(32, 24, 6);
    EXPECT_EQ(edge_loss(a, a, b), 0.0);
    const RadianceImage c(32, 24, 0.3);
    EXPECT_EQ(edge_loss(c, RadianceImage(32, 24, 0.7), RadianceImage(32, 24, 0.1)), 0.0);
    EXPECT_EQ(edge_loss(step_image(32, 24, 16, 0.1, 0.9), c, c), 0.0);
    // A gradient in the all-in-focus image unmasks the difference.
    EXPECT_GT(edge_loss(step_image(32, 24, 16, 0.1, 0.9), c, step_image(32, 24, 16, 0.0, 1.0)), 0.0);
    EXPECT_GT(edge_loss(a, b, a), 0.0);
}

TEST(ExposureAlign, Examples) {
    const RadianceImage src(4, 4, 0.2);
    const RadianceImage ref(4, 4, 0.4);
    for (double v : exposure_align(src, ref).data) EXPECT_NEAR(v, 0.4, 1e-15);
    const RadianceImage a = testing::textured_image(16, 16, 7);
    const RadianceImage same = exposure_align(a, a);
    for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(same.data[i], a.data[i], 1e-15);
    EXPECT_THROW(exposure_align(RadianceImage(4, 4, 0.0), ref), std::invalid_argument);

    const RadianceImage b = testing::textured_image(16, 16, 8);
    const RadianceImage once = exposure_align(a, b);
    const RadianceImage twice = exposure_align(once, b);
    for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(once.data[i], twice.data[i], 1e-12);
}

TEST(Degrade, Examples) {
    DisparityMap d(9, 9, 0.1);
    EXPECT_EQ(degrade_disparity(d, {Morphology::dilate, 3}), d);
    EXPECT_EQ(degrade_disparity(d, {Morphology::erode, 3}), d);
    d.at(4, 4) = 0.8;
    EXPECT_EQ(degrade_disparity(d, {Morphology::erode, 0}), d);
    const DisparityMap dil = degrade_disparity(d, {Morphology::dilate, 2});
    int count = 0;
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 9; ++x) {
            const bool in = (x - 4) * (x - 4) + (y - 4) * (y - 4) <= 4;
            EXPECT_EQ(dil.at(x, y), in ? 0.8 : 0.1);
            count += dil.at(x, y) == 0.8;
        }
    }
    EXPECT_EQ(count, 13);
    for (double v : degrade_disparity(d, {Morphology::erode, 1}).data) EXPECT_EQ(v, 0.1);
    EXPECT_THROW(degrade_disparity(d, {Morphology::erode, -1}), std::invalid_argument);
}

TEST(Degrade, MonotoneAndExtensive) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        DisparityMap d1(17, 13), d2(17, 13);
        for (std::size_t i = 0; i < d1.data.size(); ++i) {
            d1.data[i] = 0.05 + 0.5 * u(rng);
            d2.data[i] = d1.data[i] + 0.4 * u(rng);
        }
        const int r = static_cast<int>(rng() % 5);
        for (Morphology k : {Morphology::erode, Morphology::dilate}) {
            const DisparityMap a = degrade_disparity(d1, {k, r});
            const DisparityMap b = degrade_disparity(d2, {k, r});
            for (std::size_t i = 0; i < a.data.size(); ++i) {
                EXPECT_LE(a.data[i], b.data[i]);
                if (k == Morphology::erode) EXPECT_LE(a.data[i], d1.data[i]);
                else EXPECT_GE(a.data[i], d1.data[i]);
            }
        }
    }
}

TEST(Summary, Quartiles) {
    const std::vector<double> v{4, 1, 3, 2, 5};
    const Summary s = summarize(v);
    EXPECT_EQ(s.mean, 3.0);
    EXPECT_EQ(s.median, 3.0);
    EXPECT_EQ(s.q1, 2.0);
    EXPECT_EQ(s.q3, 4.0);
    EXPECT_EQ(quantile({1, 2}, 0.5), 1.5);
    EXPECT_EQ(quantile({7}, 0.25), 7.0);
    EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
}

TEST(Report, JsonRoundTrip) {
    std::vector<MetricRow> rows{{"a", 30.5, 0.9, 0.001, 2.5}, {"b", 99.0, 1.0, 0.0, std::nullopt},
                                {"c", 20.25, 0.75, 0.01, 7.0}};
    const MetricReport r = make_report(rows);
    EXPECT_EQ(r.aggregate.at("psnr_db").median, 30.5);
    EXPECT_LE(r.aggregate.at("ssim").q1, r.aggregate.at("ssim").median);
    EXPECT_LE(r.aggregate.at("ssim").median, r.aggregate.at("ssim").q3);
    EXPECT_EQ(r.aggregate.at("edge_loss").median, 4.75);
    const MetricReport back = metric_report_from_json(to_json(r));
    EXPECT_EQ(to_json(back), to_json(r));
    ASSERT_EQ(back.rows.size(), 3u);
    EXPECT_FALSE(back.rows[1].edge_loss.has_value());
}

}  // namespace
}  // namespace bokeh
