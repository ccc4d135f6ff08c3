// Copyright 2026 The synthdet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "synthdet/core/error.hpp"
#include "synthdet/core/image.hpp"

namespace synthdet::io {

inline std::uint8_t to_u8(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// 8-bit quantisation as written to disk.
inline Image quantize8(const Image& img) {
  Image out = img;
  for (float& v : out.values()) v = to_u8(v) / 255.0f;
  return out;
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  return f;
}

// libpng reports errors through longjmp; the message is captured first.
struct PngErrorState {
  std::string message;
};
inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngErrorState*>(png_get_error_ptr(png));
  if (st) st->message = msg;
  png_longjmp(png, 1);
}
inline void png_warning_fn(png_structp, png_const_charp) {}

/// Writes rows of `bit_depth` samples. `rows` holds big-endian bytes.
inline void write_png(const std::string& path, int width, int height, int color_type,
                      int bit_depth, const std::vector<std::uint8_t>& bytes) {
  FilePtr f = open_file(path, "wb");
  PngErrorState st;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * stride);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("writing '" + path + "': " + st.message);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngData {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<std::uint8_t> bytes;  // big-endian for 16-bit
};

/// Reads any PNG, expanding palettes and low bit depths and dropping alpha.
inline PngData read_png(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  std::uint8_t sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw LoadError("'" + path + "' is not a PNG file");
  PngErrorState st;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  PngData d;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("reading '" + path + "': " + st.message);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  d.width = static_cast<int>(png_get_image_width(png, info));
  d.height = static_cast<int>(png_get_image_height(png, info));
  d.channels = png_get_channels(png, info);
  d.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  d.bytes.resize(stride * d.height);
  rows.resize(static_cast<std::size_t>(d.height));
  for (int y = 0; y < d.height; ++y) rows[y] = d.bytes.data() + static_cast<std::size_t>(y) * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return d;
}

}  // namespace detail

/// 8-bit sRGB-agnostic RGB PNG; values are clamped and rounded.
inline void write_png_rgb8(const std::string& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.values().size());
  const auto v = img.values();
  for (std::size_t i = 0; i < v.size(); ++i) bytes[i] = to_u8(v[i]);
  detail::write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, 8, bytes);
}

/// Lossless 16-bit single-channel PNG.
inline void write_png_gray16(const std::string& path, const InstanceMap& map) {
  std::vector<std::uint8_t> bytes(map.size() * 2);
  const auto p = map.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(p[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(p[i] & 0xFF);
  }
  detail::write_png(path, map.width(), map.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

inline Image read_png_rgb(const std::string& path) {
  const auto d = detail::read_png(path);
  Image img(d.width, d.height);
  const int bps = d.bit_depth / 8;
  const float scale = d.bit_depth == 16 ? 65535.0f : 255.0f;
  auto sample = [&](std::size_t idx) -> float {
    return bps == 2 ? (d.bytes[2 * idx] << 8 | d.bytes[2 * idx + 1]) : d.bytes[idx];
  };
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * d.width + x) * d.channels;
      for (int c = 0; c < 3; ++c) {
        const int ch = d.channels >= 3 ? c : 0;
        img.at(x, y, c) = sample(base + ch) / scale;
      }
    }
  return img;
}

inline InstanceMap read_png_gray16(const std::string& path) {
  const auto d = detail::read_png(path);
  if (d.channels != 1) throw LoadError("'" + path + "' is not a single-channel PNG");
  InstanceMap map(d.width, d.height, 0);
  auto p = map.pixels();
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = d.bit_depth == 16 ? static_cast<std::uint16_t>(d.bytes[2 * i] << 8 | d.bytes[2 * i + 1])
                             : d.bytes[i];
  return map;
}

namespace detail {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};
inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* e = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, e->message);
  std::longjmp(e->jump, 1);
}

}  // namespace detail

/// Baseline JPEG at the given quality (1..100).
inline std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  if (quality < 1 || quality > 100) throw ConfigError("JPEG quality must be in [1, 100]");
  std::vector<std::uint8_t> rgb(img.values().size());
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = to_u8(img.values()[i]);
  jpeg_compress_struct cinfo;
  detail::JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = detail::jpeg_error_exit;
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buf);
    throw IoError(std::string("JPEG encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width() * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buf, buf + size);
  std::free(buf);
  return out;
}

inline Image decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::string& name = "<memory>") {
  jpeg_decompress_struct cinfo;
  detail::JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = detail::jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw LoadError("JPEG decode of " + name + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  Image img(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(cinfo.output_width) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW r = row.data();
    jpeg_read_scanlines(&cinfo, &r, 1);
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[static_cast<std::size_t>(x) * 3 + c] / 255.0f;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Portable float map (colour "PF" or grey "Pf"), bottom-up rows.
inline Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  in.get();
  if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0)
    throw LoadError("'" + path + "' is not a PFM file");
  const int channels = magic == "PF" ? 3 : 1;
  std::vector<float> data(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
  if (!in) throw LoadError("'" + path + "': truncated PFM data");
  const bool little = scale < 0;
  const std::uint16_t probe = 1;
  const bool host_little = *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
  if (little != host_little)
    for (float& v : data) {
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&v, &u, 4);
    }
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, h - 1 - y, c) = data[(static_cast<std::size_t>(y) * w + x) * channels + (channels == 3 ? c : 0)];
  return img;
}

inline void write_pfm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "PF\n" << img.width() << " " << img.height() << "\n-1.0\n";
  for (int y = img.height() - 1; y >= 0; --y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = img.at(x, y, c);
        out.write(reinterpret_cast<const char*>(&v), 4);
      }
}

/// Loads PNG, JPEG or PFM by content.
inline Image load_image(const std::string& path) {
  const auto head = [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string h(8, '\0');
    in.read(h.data(), 8);
    h.resize(static_cast<std::size_t>(in.gcount()));
    return h;
  }();
  if (head.size() >= 8 && static_cast<unsigned char>(head[0]) == 0x89 && head.substr(1, 3) == "PNG")
    return read_png_rgb(path);
  if (head.size() >= 2 && static_cast<unsigned char>(head[0]) == 0xFF &&
      static_cast<unsigned char>(head[1]) == 0xD8)
    return decode_jpeg(read_bytes(path), path);
  if (head.size() >= 2 && head[0] == 'P' && (head[1] == 'F' || head[1] == 'f')) return read_pfm(path);
  throw LoadError("unsupported image format: '" + path + "'");
}

}  // namespace synthdet::io
