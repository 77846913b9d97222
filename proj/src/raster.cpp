// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/raster.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstring>

#include "sitecheck/errors.hpp"

namespace sitecheck {

std::string RasterImage::text_chunk(const std::string& keyword) const {
    for (const auto& [key, text] : text_chunks) {
        if (key == keyword) return text;
    }
    return {};
}

bool looks_like_png(std::span<const std::uint8_t> bytes) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

bool looks_like_jpeg(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

namespace {

struct PngReadState {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t count) {
    auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (state->pos + count > state->bytes.size()) {
        png_error(png, "unexpected end of PNG stream");
    }
    std::memcpy(out, state->bytes.data() + state->pos, count);
    state->pos += count;
}

void png_on_error(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err && err->empty()) *err = msg;
    longjmp(png_jmpbuf(png), 1);
}

void png_on_warning(png_structp, png_const_charp) {}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
    std::string error_msg;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_msg, png_on_error, png_on_warning);
    if (!png) throw DecodeError("failed to initialize PNG reader");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("failed to initialize PNG reader");
    }

    RasterImage img;
    std::vector<png_bytep> row_ptrs;
    PngReadState state{bytes, 0};

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("invalid PNG: " + (error_msg.empty() ? "decode failed" : error_msg));
    }

    png_set_read_fn(png, &state, png_read_from_span);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_set_palette_to_rgb(png);
    png_read_update_info(png, info);

    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    if (img.width == 0 || img.height == 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("invalid PNG: zero dimensions");
    }

    const std::size_t stride = png_get_rowbytes(png, info);
    img.rgb.assign(static_cast<std::size_t>(img.height) * stride, 0);
    row_ptrs.resize(img.height);
    for (std::uint32_t y = 0; y < img.height; ++y) {
        row_ptrs[y] = img.rgb.data() + static_cast<std::size_t>(y) * stride;
    }
    png_read_image(png, row_ptrs.data());
    png_read_end(png, info);

    png_textp texts = nullptr;
    int n_texts = 0;
    if (png_get_text(png, info, &texts, &n_texts) > 0) {
        for (int i = 0; i < n_texts; ++i) {
            img.text_chunks.emplace_back(texts[i].key ? texts[i].key : "",
                                         texts[i].text ? texts[i].text : "");
        }
    }

    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    jmp_buf jump;
    char message[JMSG_LENGTH_MAX] = {0};
};

void jpeg_on_error(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, mgr->message);
    longjmp(mgr->jump, 1);
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_on_error;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError(std::string("invalid JPEG: ") + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    RasterImage img;
    img.width = cinfo.output_width;
    img.height = cinfo.output_height;
    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    img.rgb.assign(static_cast<std::size_t>(img.height) * stride, 0);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw DecodeError("empty image input");
    if (looks_like_png(bytes)) return decode_png(bytes);
    if (looks_like_jpeg(bytes)) return decode_jpeg(bytes);
    throw DecodeError("unrecognized image format (expected PNG or JPEG)");
}

}  // namespace sitecheck
