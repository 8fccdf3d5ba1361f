// SPDX-License-Identifier: Apache-2.0
#include "bokeh/imagio.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

namespace bokeh {

namespace fs = std::filesystem;

Transfer parse_transfer(std::string_view name) {
    if (name == "srgb") return Transfer::srgb;
    if (name == "linear") return Transfer::linear;
    throw std::invalid_argument("unknown transfer '" + std::string(name) + "' (expected srgb or linear)");
}

double srgb_to_linear(double v) noexcept {
    if (v <= 0.04045) return v / 12.92;
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) noexcept {
    if (v <= 0.0031308) return v * 12.92;
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

std::uint32_t quantize(double v, int bit_depth) noexcept {
    const double max_code = bit_depth == 16 ? 65535.0 : 255.0;
    const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    return static_cast<std::uint32_t>(std::floor(c * max_code + 0.5));
}

// ---------------------------------------------------------------------------
// libpng glue. The setjmp frames hold no objects with destructors; buffers
// live in the caller.

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

/// libpng reports through these instead of stderr; the message ends up in
/// the thrown IoError.
struct PngMessage {
    char text[160] = "";
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    auto* m = static_cast<PngMessage*>(png_get_error_ptr(png));
    if (m) std::snprintf(m->text, sizeof m->text, "%s", msg);
    png_longjmp(png, 1);
}

void png_quiet(png_structp, png_const_charp) {}

struct ReadState {
    PngPixels* out;
    std::vector<unsigned char>* raw;
    std::vector<png_bytep>* rows;
    PngMessage message;
};

const char* png_read_core(std::FILE* fp, ReadState* st) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st->message, png_fail, png_quiet);
    if (!png) return "libpng initialization failed";
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return "libpng initialization failed";
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        if (st->message.text[0]) {
            const std::string detail = st->message.text;
            std::snprintf(st->message.text, sizeof st->message.text, "corrupt or truncated PNG (%s)", detail.c_str());
            return st->message.text;
        }
        return "corrupt or truncated PNG";
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    PngPixels& out = *st->out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (out.bit_depth != 8 && out.bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        return "unsupported PNG bit depth";
    }
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    st->raw->assign(rowbytes * static_cast<std::size_t>(out.height), 0);
    st->rows->resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        (*st->rows)[static_cast<std::size_t>(y)] = st->raw->data() + rowbytes * static_cast<std::size_t>(y);
    }
    png_read_image(png, st->rows->data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return nullptr;
}

struct WriteState {
    const PngPixels* px;
    std::vector<unsigned char>* raw;
    std::vector<png_bytep>* rows;
    PngMessage message;
};

const char* png_write_core(std::FILE* fp, WriteState* st) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st->message, png_fail, png_quiet);
    if (!png) return "libpng initialization failed";
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return "libpng initialization failed";
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return "PNG encoding failed";
    }
    const PngPixels& px = *st->px;
    static constexpr int kColorTypes[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                          PNG_COLOR_TYPE_RGB_ALPHA};
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(px.width), static_cast<png_uint_32>(px.height), px.bit_depth,
                 kColorTypes[px.channels - 1], PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, st->rows->data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return nullptr;
}

}  // namespace

PngPixels decode_png(const fs::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open image: " + path.string());
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError("not a PNG file: " + path.string());
    }
    std::rewind(fp.get());

    PngPixels out;
    std::vector<unsigned char> raw;
    std::vector<png_bytep> rows;
    ReadState st{&out, &raw, &rows, {}};
    if (const char* err = png_read_core(fp.get(), &st)) {
        throw IoError(std::string(err) + ": " + path.string());
    }
    const std::size_t n = out.pixel_samples();
    out.samples.resize(n);
    if (out.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            out.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
    }
    return out;
}

void encode_png(const fs::path& path, const PngPixels& px) {
    if (px.width <= 0 || px.height <= 0) throw IoError("refusing to write an empty PNG: " + path.string());
    if (px.channels < 1 || px.channels > 4) throw IoError("unsupported channel count for PNG output");
    if (px.bit_depth != 8 && px.bit_depth != 16) throw IoError("unsupported bit depth for PNG output");
    if (px.samples.size() != px.pixel_samples()) throw IoError("PNG sample buffer does not match dimensions");

    const int bytes = px.bit_depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(px.width) * px.channels * bytes;
    std::vector<unsigned char> raw(rowbytes * static_cast<std::size_t>(px.height));
    for (std::size_t i = 0; i < px.samples.size(); ++i) {
        if (bytes == 2) {
            raw[2 * i] = static_cast<unsigned char>(px.samples[i] >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(px.samples[i] & 0xff);
        } else {
            raw[i] = static_cast<unsigned char>(px.samples[i]);
        }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(px.height));
    for (int y = 0; y < px.height; ++y) rows[static_cast<std::size_t>(y)] = raw.data() + rowbytes * y;

    const fs::path tmp = temp_path_for(path);
    const char* err = nullptr;
    {
        FilePtr fp(std::fopen(tmp.c_str(), "wb"));
        if (!fp) throw IoError("cannot open for writing: " + path.string());
        WriteState st{&px, &raw, &rows, {}};
        err = png_write_core(fp.get(), &st);
        if (!err && std::fflush(fp.get()) != 0) err = "write failed";
    }
    if (err) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw IoError(std::string(err) + ": " + path.string());
    }
    commit_temp(tmp, path);
}

// ---------------------------------------------------------------------------

namespace {

double decode_sample(std::uint16_t code, std::uint32_t max_code, Transfer transfer) {
    const double v = static_cast<double>(code) / max_code;
    return transfer == Transfer::srgb ? srgb_to_linear(v) : v;
}

std::uint16_t encode_sample(double v, int bit_depth, Transfer transfer) {
    double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    if (transfer == Transfer::srgb) c = linear_to_srgb(c);
    return static_cast<std::uint16_t>(quantize(c, bit_depth));
}

void check_depth(int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw std::invalid_argument("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
}

}  // namespace

RadianceImage load_image(const fs::path& path, Transfer transfer) {
    const PngPixels px = decode_png(path);
    if (px.channels != 1 && px.channels != 3) {
        throw IoError("expected a 1- or 3-channel PNG, got " + std::to_string(px.channels) + " channels: " +
                      path.string());
    }
    RadianceImage img(px.width, px.height);
    const std::uint32_t max_code = px.max_code();
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) {
            const std::uint16_t code = px.samples[p * px.channels + (px.channels == 1 ? 0 : c)];
            img.data[p * 3 + c] = decode_sample(code, max_code, transfer);
        }
    }
    return img;
}

void save_image(const RadianceImage& img, const fs::path& path, Transfer transfer, int bit_depth) {
    check_depth(bit_depth);
    PngPixels px{img.width, img.height, 3, bit_depth, {}};
    px.samples.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) px.samples[i] = encode_sample(img.data[i], bit_depth, transfer);
    encode_png(path, px);
}

RgbaImage load_rgba(const fs::path& path, Transfer transfer) {
    const PngPixels px = decode_png(path);
    RgbaImage img(px.width, px.height);
    const std::uint32_t max_code = px.max_code();
    const bool has_alpha = px.channels == 2 || px.channels == 4;
    const int color_channels = px.channels >= 3 ? 3 : 1;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const std::uint16_t* s = &px.samples[p * px.channels];
        for (int c = 0; c < 3; ++c) {
            img.data[p * 4 + c] = decode_sample(s[color_channels == 3 ? c : 0], max_code, transfer);
        }
        img.data[p * 4 + 3] = has_alpha ? static_cast<double>(s[px.channels - 1]) / max_code : 1.0;
    }
    return img;
}

void save_rgba(const RgbaImage& img, const fs::path& path, Transfer transfer, int bit_depth) {
    check_depth(bit_depth);
    PngPixels px{img.width, img.height, 4, bit_depth, {}};
    px.samples.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const bool alpha = i % 4 == 3;
        px.samples[i] = encode_sample(img.data[i], bit_depth, alpha ? Transfer::linear : transfer);
    }
    encode_png(path, px);
}

// ---------------------------------------------------------------------------
// PFM: "Pf" header, dimensions, scale (negative means little-endian), then
// float rows stored bottom to top.

namespace {

bool looks_like_pfm(const fs::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open disparity: " + path.string());
    char magic[2] = {};
    return std::fread(magic, 1, 2, fp.get()) == 2 && magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F');
}

DisparityMap load_pfm(const fs::path& path) {
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };
    const std::string magic = token();
    if (magic == "PF") throw IoError("multi-channel PFM is not a disparity map: " + path.string());
    if (magic != "Pf") throw IoError("bad PFM header: " + path.string());
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(token());
        height = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::exception&) {
        throw IoError("bad PFM header: " + path.string());
    }
    ++pos;  // single whitespace byte before the raster
    if (width <= 0 || height <= 0 || scale == 0.0) throw IoError("bad PFM header: " + path.string());
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() < pos + count * 4) throw IoError("truncated PFM: " + path.string());

    const bool little = scale < 0.0;
    const bool host_little = std::endian::native == std::endian::little;
    DisparityMap d(width, height);
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;
        for (int x = 0; x < width; ++x) {
            unsigned char b[4];
            std::memcpy(b, bytes.data() + pos + (static_cast<std::size_t>(row) * width + x) * 4, 4);
            if (little != host_little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
            float f;
            std::memcpy(&f, b, 4);
            if (std::isnan(f)) throw IoError("NaN in PFM disparity: " + path.string());
            d.at(x, y) = clamp_disparity(static_cast<double>(f));
        }
    }
    return d;
}

}  // namespace

DisparityMap load_disparity(const fs::path& path) {
    if (looks_like_pfm(path)) return load_pfm(path);
    const PngPixels px = decode_png(path);
    if (px.channels != 1) {
        throw IoError("disparity PNG must be single-channel, got " + std::to_string(px.channels) + ": " +
                      path.string());
    }
    DisparityMap d(px.width, px.height);
    const double max_code = px.max_code();
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = clamp_disparity(px.samples[i] / max_code);
    return d;
}

void save_disparity(const DisparityMap& d, const fs::path& path) {
    if (d.empty()) throw std::invalid_argument("cannot save an empty disparity map");
    PngPixels px{d.width, d.height, 1, 16, {}};
    px.samples.resize(d.data.size());
    for (std::size_t i = 0; i < d.data.size(); ++i) px.samples[i] = static_cast<std::uint16_t>(quantize(d.data[i], 16));
    encode_png(path, px);
}

RegionMask load_mask(const fs::path& path) {
    const PngPixels px = decode_png(path);
    RegionMask mask(px.width, px.height);
    const std::uint32_t half = (px.max_code() + 1) / 2;
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
        mask.data[p] = px.samples[p * px.channels] >= half ? 1 : 0;
    }
    return mask;
}

}  // namespace bokeh
