// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace wm {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void io_fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

}  // namespace

Image load_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) io_fail("image: cannot open '" + path + "'");

    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        io_fail("image: '" + path + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail("image: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        io_fail("image: png_create_info_struct failed");
    }

    Image img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        io_fail("image: PNG decode failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // normalize everything to 8-bit RGB
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_tRNS_to_alpha(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    if (png_get_rowbytes(png, info) != static_cast<size_t>(img.width * 3)) {
        png_destroy_read_struct(&png, &info, nullptr);
        io_fail("image: unsupported PNG layout in '" + path + "'");
    }
    img.rgb.resize(static_cast<size_t>(img.width * img.height * 3));
    rows.resize(static_cast<size_t>(img.height));
    for (int64_t y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = img.rgb.data() + y * img.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const std::string& path, const Image& img) {
    check(img.rgb.size() == static_cast<size_t>(img.width * img.height * 3),
          "image: inconsistent buffer size");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) io_fail("image: cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail("image: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        io_fail("image: png_create_info_struct failed");
    }
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        io_fail("image: PNG encode failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int64_t y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] =
            const_cast<png_bytep>(img.rgb.data() + y * img.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image load_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) io_fail("image: cannot open '" + path + "'");
    std::string magic;
    f >> magic;
    if (magic != "P6") io_fail("image: '" + path + "' is not a binary PPM (P6)");
    auto next_token = [&]() {
        // skip whitespace and '#' comment lines
        while (f.good()) {
            const int c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int64_t v = -1;
        f >> v;
        return v;
    };
    const int64_t w = next_token(), h = next_token(), maxval = next_token();
    if (!f.good() || w < 1 || h < 1) io_fail("image: malformed PPM header in '" + path + "'");
    if (maxval != 255) io_fail("image: PPM maxval must be 255 in '" + path + "'");
    f.get();  // single whitespace byte before the raster
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<size_t>(w * h * 3));
    f.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.rgb.size()))
        io_fail("image: PPM raster truncated in '" + path + "'");
    return img;
}

void save_ppm(const std::string& path, const Image& img) {
    check(img.rgb.size() == static_cast<size_t>(img.width * img.height * 3),
          "image: inconsistent buffer size");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f.good()) io_fail("image: cannot open '" + path + "' for writing");
    f << "P6\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
    if (!f.good()) io_fail("image: PPM write failed for '" + path + "'");
}

Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe.good()) io_fail("image: cannot open '" + path + "'");
    char head[2] = {0, 0};
    probe.read(head, 2);
    probe.close();
    if (head[0] == 'P' && head[1] == '6') return load_ppm(path);
    return load_png(path);
}

void save_image(const std::string& path, const Image& img) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".ppm")
        save_ppm(path, img);
    else
        save_png(path, img);
}

Tensor image_to_tensor(const Image& img) {
    check(img.width >= 1 && img.height >= 1, "image: empty image");
    Tensor t({1, 3, img.height, img.width});
    const int64_t hw = img.height * img.width;
    for (int64_t i = 0; i < hw; ++i)
        for (int64_t c = 0; c < 3; ++c)
            t[c * hw + i] = static_cast<float>(img.rgb[static_cast<size_t>(i * 3 + c)]) / 255.0f;
    return t;
}

Image tensor_to_image(const Tensor& t) {
    check(t.rank() == 4 && t.dim(0) == 1 && t.dim(1) == 3,
          "image: (1,3,H,W) tensor required, got " + t.shape_str());
    Image img;
    img.height = t.dim(2);
    img.width = t.dim(3);
    const int64_t hw = img.height * img.width;
    img.rgb.resize(static_cast<size_t>(hw * 3));
    for (int64_t i = 0; i < hw; ++i)
        for (int64_t c = 0; c < 3; ++c) {
            const float v = std::round(t[c * hw + i] * 255.0f);
            img.rgb[static_cast<size_t>(i * 3 + c)] =
                static_cast<uint8_t>(std::min(255.0f, std::max(0.0f, v)));
        }
    return img;
}

}  // namespace wm
