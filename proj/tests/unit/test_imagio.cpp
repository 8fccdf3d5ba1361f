// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "bokeh/fileutil.hpp"
#include "bokeh/imagio.hpp"
#include "fixtures.hpp"

namespace bokeh {
namespace {

using testing::TempDir;

PngPixels gray_png(int w, int h, int depth, std::uint16_t code) {
    PngPixels px;
    px.width = w;
    px.height = h;
    px.channels = 1;
    px.bit_depth = depth;
    px.samples.assign(px.pixel_samples(), code);
    return px;
}

void write_pfm(const std::filesystem::path& path, const char* magic, int w, int h, float scale,
               const std::vector<float>& rows_bottom_up) {
    std::ofstream f(path, std::ios::binary);
    f << magic << "\n" << w << " " << h << "\n" << scale << "\n";
    const bool big = scale > 0;
    for (float v : rows_bottom_up) {
        unsigned char b[4];
        std::memcpy(b, &v, 4);
        if (big) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
        f.write(reinterpret_cast<const char*>(b), 4);
    }
}

TEST(Transfer, EndpointsAndMidCode) {
    EXPECT_EQ(srgb_to_linear(0.0), 0.0);
    EXPECT_DOUBLE_EQ(srgb_to_linear(1.0), 1.0);
    const double expected = std::pow((128.0 / 255.0 + 0.055) / 1.055, 2.4);
    EXPECT_NEAR(srgb_to_linear(128.0 / 255.0), expected, 1e-12);
    EXPECT_NEAR(srgb_to_linear(128.0 / 255.0), 0.21586, 1e-4);
}

TEST(Transfer, DecodeEncodeIsIdentityOnEightBitCodes) {
    for (int c = 0; c < 256; ++c) {
        EXPECT_EQ(quantize(linear_to_srgb(srgb_to_linear(c / 255.0)), 8), static_cast<std::uint32_t>(c)) << c;
    }
}

TEST(Transfer, QuantizeRoundsHalfUpAndClamps) {
    EXPECT_EQ(quantize(0.5, 8), 128u);
    EXPECT_EQ(quantize(2.0, 16), 65535u);
    EXPECT_EQ(quantize(-1.0, 8), 0u);
    EXPECT_THROW(parse_transfer("gamma"), std::invalid_argument);
}

TEST(ImageIo, LoadEightBitSrgbEndpoints) {
    TempDir dir;
    PngPixels px;
    px.width = 3;
    px.height = 1;
    px.channels = 3;
    px.samples = {255, 255, 255, 0, 0, 0, 128, 128, 128};
    encode_png(dir / "a.png", px);
    const RadianceImage img = load_image(dir / "a.png", Transfer::srgb);
    for (int c = 0; c < 3; ++c) {
        EXPECT_DOUBLE_EQ(img.at(0, 0, c), 1.0);
        EXPECT_EQ(img.at(1, 0, c), 0.0);
        EXPECT_NEAR(img.at(2, 0, c), 0.21586, 1e-4);
    }
}

TEST(ImageIo, GrayIsReplicated) {
    TempDir dir;
    encode_png(dir / "g.png", gray_png(2, 2, 8, 51));
    const RadianceImage img = load_image(dir / "g.png", Transfer::linear);
    for (double v : img.data) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(ImageIo, SixteenBitLinearRoundTrip) {
    TempDir dir;
    RadianceImage img = testing::textured_image(17, 9, 3);
    save_image(img, dir / "r.png", Transfer::linear, 16);
    const RadianceImage back = load_image(dir / "r.png", Transfer::linear);
    ASSERT_TRUE(same_shape(img, back));
    for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_LE(std::abs(img.data[i] - back.data[i]), 1.0 / 65535);
}

TEST(ImageIo, SaveClampsAndRoundsHalfUp) {
    TempDir dir;
    RadianceImage img(2, 1);
    img.data = {2.0, 2.0, 2.0, 0.5, 0.5, 0.5};
    save_image(img, dir / "c.png", Transfer::linear, 8);
    const PngPixels px = decode_png(dir / "c.png");
    EXPECT_EQ(px.samples[0], 255);
    EXPECT_EQ(px.samples[3], 128);
}

TEST(ImageIo, RejectsUnsupportedInputs) {
    TempDir dir;
    PngPixels rgba;
    rgba.width = rgba.height = 2;
    rgba.channels = 4;
    rgba.samples.assign(rgba.pixel_samples(), 200);
    encode_png(dir / "rgba.png", rgba);
    EXPECT_THROW(load_image(dir / "rgba.png", Transfer::srgb), IoError);
    EXPECT_THROW(load_image(dir / "missing.png", Transfer::srgb), IoError);
    write_file_atomic(dir / "junk.png", "not a png at all");
    EXPECT_THROW(load_image(dir / "junk.png", Transfer::srgb), IoError);

    // A PNG cut off mid-stream.
    save_image(testing::textured_image(64, 64, 1), dir / "full.png", Transfer::srgb, 8);
    const std::string bytes = read_file(dir / "full.png");
    write_file_atomic(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(load_image(dir / "cut.png", Transfer::srgb), IoError);
}

TEST(ImageIo, RgbaAlphaIsLinearAndDefaultsToOpaque) {
    TempDir dir;
    PngPixels px;
    px.width = 1;
    px.height = 1;
    px.channels = 4;
    px.samples = {128, 128, 128, 128};
    encode_png(dir / "a.png", px);
    const RgbaImage img = load_rgba(dir / "a.png", Transfer::srgb);
    EXPECT_NEAR(img.at(0, 0, 0), 0.21586, 1e-4);
    EXPECT_DOUBLE_EQ(img.at(0, 0, 3), 128.0 / 255.0);

    encode_png(dir / "g.png", gray_png(1, 1, 8, 255));
    EXPECT_EQ(load_rgba(dir / "g.png", Transfer::srgb).at(0, 0, 3), 1.0);
}

TEST(ImageIo, AtomicWriteLeavesNoTempFile) {
    TempDir dir;
    save_image(testing::textured_image(8, 8, 2), dir / "x.png", Transfer::srgb, 16);
    EXPECT_TRUE(std::filesystem::exists(dir / "x.png"));
    EXPECT_FALSE(std::filesystem::exists(temp_path_for(dir / "x.png")));
    EXPECT_THROW(save_image(testing::textured_image(8, 8, 2), dir / "no/such/dir/x.png", Transfer::srgb, 8), IoError);
}

TEST(DisparityIo, SixteenBitCodesAndClamp) {
    TempDir dir;
    PngPixels px = gray_png(3, 1, 16, 0);
    px.samples = {65535, 0, 32768};
    encode_png(dir / "d.png", px);
    const DisparityMap d = load_disparity(dir / "d.png");
    EXPECT_DOUBLE_EQ(d.data[0], 1.0 - kDisparityEps);
    EXPECT_DOUBLE_EQ(d.data[1], kDisparityEps);
    EXPECT_NEAR(d.data[2], 32768.0 / 65535.0, 1e-12);
    EXPECT_NEAR(d.data[2], 0.500008, 1e-6);
}

TEST(DisparityIo, SaveConstantHalfAndRoundTrip) {
    TempDir dir;
    DisparityMap half(4, 3, 0.5);
    save_disparity(half, dir / "h.png");
    const PngPixels px = decode_png(dir / "h.png");
    EXPECT_EQ(px.bit_depth, 16);
    EXPECT_EQ(px.channels, 1);
    for (auto s : px.samples) EXPECT_EQ(s, 32768);

    DisparityMap ramp(50, 2);
    for (std::size_t i = 0; i < ramp.data.size(); ++i) ramp.data[i] = 0.01 + 0.98 * i / ramp.data.size();
    save_disparity(ramp, dir / "r.png");
    const DisparityMap back = load_disparity(dir / "r.png");
    for (std::size_t i = 0; i < ramp.data.size(); ++i) EXPECT_LE(std::abs(back.data[i] - ramp.data[i]), 1.0 / 65535);

    EXPECT_THROW(save_disparity(DisparityMap(), dir / "e.png"), std::invalid_argument);
}

TEST(DisparityIo, MultiChannelPngRejected) {
    TempDir dir;
    save_image(testing::textured_image(4, 4, 1), dir / "rgb.png", Transfer::linear, 16);
    EXPECT_THROW(load_disparity(dir / "rgb.png"), IoError);
}

TEST(DisparityIo, PfmBothEndiannessAndBottomUpRows) {
    TempDir dir;
    // Rows are stored bottom to top: the first stored row is image row 1.
    write_pfm(dir / "le.pfm", "Pf", 2, 2, -1.0f, {0.1f, 0.2f, 0.7f, 2.0f});
    const DisparityMap le = load_disparity(dir / "le.pfm");
    EXPECT_NEAR(le.at(0, 0), 0.7, 1e-7);
    EXPECT_NEAR(le.at(1, 0), 1.0 - kDisparityEps, 1e-12);
    EXPECT_NEAR(le.at(0, 1), 0.1, 1e-7);
    EXPECT_NEAR(le.at(1, 1), 0.2, 1e-7);

    write_pfm(dir / "be.pfm", "Pf", 2, 2, 1.0f, {0.1f, 0.2f, 0.7f, -3.0f});
    const DisparityMap be = load_disparity(dir / "be.pfm");
    EXPECT_NEAR(be.at(0, 0), 0.7, 1e-7);
    EXPECT_DOUBLE_EQ(be.at(1, 0), kDisparityEps);
}

TEST(DisparityIo, PfmErrors) {
    TempDir dir;
    write_pfm(dir / "nan.pfm", "Pf", 1, 1, -1.0f, {std::numeric_limits<float>::quiet_NaN()});
    EXPECT_THROW(load_disparity(dir / "nan.pfm"), IoError);
    write_pfm(dir / "rgb.pfm", "PF", 1, 1, -1.0f, {0.5f, 0.5f, 0.5f});
    EXPECT_THROW(load_disparity(dir / "rgb.pfm"), IoError);
    write_pfm(dir / "short.pfm", "Pf", 4, 4, -1.0f, {0.5f});
    EXPECT_THROW(load_disparity(dir / "short.pfm"), IoError);
}

TEST(MaskIo, ThresholdAtHalfRange) {
    TempDir dir;
    PngPixels px = gray_png(3, 1, 8, 0);
    px.samples = {127, 128, 255};
    encode_png(dir / "m.png", px);
    const RegionMask m = load_mask(dir / "m.png");
    EXPECT_EQ(m.data[0], 0);
    EXPECT_NE(m.data[1], 0);
    EXPECT_NE(m.data[2], 0);
}

}  // namespace
}  // namespace bokeh
