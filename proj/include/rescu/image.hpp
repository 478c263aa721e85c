#pragma once

// Minimal raster type plus PNG/JPEG loading and PNG writing. Decoding is
// delegated to libpng's simplified API and libjpeg; pixels are kept as 8-bit
// gray or RGB.

#include <cstdint>
#include <cstdio>
#include <csetjmp>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "rescu/error.hpp"

namespace rescu {

struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 = gray, 3 = RGB
    std::vector<std::uint8_t> data;

    static Raster make(int w, int h, int ch, std::uint8_t fill = 0) {
        Raster r;
        r.width = w;
        r.height = h;
        r.channels = ch;
        r.data.assign(std::size_t(w) * h * ch, fill);
        return r;
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(std::size_t(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(std::size_t(y) * width + x) * channels + c];
    }
    bool empty() const { return data.empty(); }
};

// Luma conversion to floats in [0, 1] for the detector.
inline std::vector<float> to_gray_float(const Raster& img) {
    std::vector<float> g(std::size_t(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            float v;
            if (img.channels == 1) {
                v = img.at(x, y);
            } else {
                v = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
            }
            g[std::size_t(y) * img.width + x] = v / 255.0f;
        }
    return g;
}

namespace detail {

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

inline Raster load_jpeg(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) fail(ErrorCode::io, "cannot open " + path);
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(fp);
        fail(ErrorCode::parse, "corrupt JPEG: " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    Raster img = Raster::make(int(cinfo.output_width), int(cinfo.output_height),
                              cinfo.output_components);
    std::vector<JSAMPROW> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = img.data.data() + std::size_t(y) * img.width * img.channels;
    while (cinfo.output_scanline < cinfo.output_height)
        jpeg_read_scanlines(&cinfo, &rows[cinfo.output_scanline],
                            cinfo.output_height - cinfo.output_scanline);
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    return img;
}

inline Raster load_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        fail(ErrorCode::parse, "corrupt PNG: " + path);
    bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Raster img = Raster::make(int(image.width), int(image.height), gray ? 1 : 3);
    if (!png_image_finish_read(&image, nullptr, img.data.data(), 0, nullptr)) {
        png_image_free(&image);
        fail(ErrorCode::parse, "corrupt PNG: " + path);
    }
    return img;
}

}  // namespace detail

// Loads a PNG or JPEG raster, dispatching on the file's magic bytes.
inline Raster load_image(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) fail(ErrorCode::io, "cannot open " + path);
    unsigned char magic[4] = {0, 0, 0, 0};
    std::size_t got = std::fread(magic, 1, 4, fp);
    std::fclose(fp);
    if (got >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        return detail::load_png(path);
    if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF)
        return detail::load_jpeg(path);
    fail(ErrorCode::parse, "unsupported raster format: " + path);
}

inline void save_png(const std::string& path, const Raster& img) {
    if (img.empty()) fail(ErrorCode::validation, "refusing to write empty raster");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width);
    image.height = png_uint_32(img.height);
    image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr))
        fail(ErrorCode::io, "cannot write " + path);
}

}  // namespace rescu
