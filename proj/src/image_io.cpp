// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace sensorsentry {

ImageBuffer::ImageBuffer(int width, int height)
    : ImageBuffer(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0)) * 3)) {}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
  if (width < 1 || height < 1) throw InvalidArgument("image dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw DimensionMismatch("image byte count does not match width*height*3");
  }
}

namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

// Decoded PNG samples: channels is 1 (gray) or 3 (RGB), depth 8 or 16.
struct PngPixels {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

PngPixels decode_png(const fs::path& path, bool want_gray) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialisation failed");
  }
  PngPixels out;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  const bool is_gray = (color & PNG_COLOR_MASK_COLOR) == 0;
  if (want_gray && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (!want_gray && is_gray) png_set_gray_to_rgb(png);
  if (depth == 16) png_set_swap(png);  // host order on little endian
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = raw.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint16_t v;
      std::memcpy(&v, raw.data() + 2 * i, 2);
      out.samples[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = raw[i];
  }
  return out;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  buf->insert(buf->end(), data, data + len);
}
void png_flush_noop(png_structp) {}

// Writes gray (channels=1) or RGB (channels=3) samples at 8 or 16 bits.
std::vector<std::uint8_t> encode_png_samples(int width, int height, int channels, int bit_depth,
                                             const std::uint8_t* packed) {
  std::vector<std::uint8_t> bytes;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encoding failed");
  }
  png_set_write_fn(png, &bytes, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(packed + rowbytes * y);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write on " + path.string());
}

// Netpbm header tokens, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw DataError("truncated netpbm header");
  return tok;
}

int parse_positive(const std::string& tok) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) throw DataError("bad netpbm header value '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad netpbm header value '" + tok + "'");
  }
}

ImageBuffer read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (next_token(in) != "P6") throw DataError("not a binary PPM (P6): " + path.string());
  const int w = parse_positive(next_token(in));
  const int h = parse_positive(next_token(in));
  const int maxval = parse_positive(next_token(in));
  if (maxval != 255) throw DataError("only 8-bit PPM is supported: " + path.string());
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw DataError("truncated PPM: " + path.string());
  }
  return ImageBuffer(w, h, std::move(data));
}

DepthMap read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5") throw DataError("not a PGM: " + path.string());
  const int w = parse_positive(next_token(in));
  const int h = parse_positive(next_token(in));
  const int maxval = parse_positive(next_token(in));
  if (maxval > 65535) throw DataError("PGM maxval out of range: " + path.string());
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> values(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const int v = std::stoi(next_token(in));
      if (v < 0 || v > maxval) throw DataError("PGM sample out of range: " + path.string());
      values[i] = static_cast<double>(v) / maxval;
    }
  } else {
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw DataError("truncated PGM: " + path.string());
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int v = bytes_per == 2 ? (raw[2 * i] << 8) | raw[2 * i + 1] : raw[i];
      values[i] = std::min(1.0, static_cast<double>(v) / maxval);
    }
  }
  return DepthMap(w, h, std::move(values));
}

}  // namespace

ImageBuffer read_image(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("no such image: " + path.string());
  if (!has_png_signature(path)) return read_ppm(path);
  const PngPixels px = decode_png(path, false);
  std::vector<std::uint8_t> rgb(px.samples.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    rgb[i] = px.bit_depth == 16 ? static_cast<std::uint8_t>((px.samples[i] + 128) / 257)
                                : static_cast<std::uint8_t>(px.samples[i]);
  }
  return ImageBuffer(px.width, px.height, std::move(rgb));
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  return encode_png_samples(img.width(), img.height(), 3, 8, img.bytes().data());
}

void write_png(const ImageBuffer& img, const fs::path& path) { write_bytes(encode_png(img), path); }

void write_ppm(const ImageBuffer& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.bytes().data()),
            static_cast<std::streamsize>(img.bytes().size()));
}

void write_image(const ImageBuffer& img, const fs::path& path) {
  if (path.extension() == ".ppm") {
    write_ppm(img, path);
  } else {
    write_png(img, path);
  }
}

DepthMap read_depth(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("no such depth map: " + path.string());
  if (!has_png_signature(path)) return read_pgm(path);
  const PngPixels px = decode_png(path, true);
  const double maxval = px.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(px.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = px.samples[i] / maxval;
  return DepthMap(px.width, px.height, std::move(values));
}

void write_depth_png(const DepthMap& depth, const fs::path& path) {
  std::vector<std::uint8_t> packed(depth.size() * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::lround(depth.values()[i] * 65535.0));
    std::memcpy(packed.data() + 2 * i, &v, 2);
  }
  write_bytes(encode_png_samples(depth.width(), depth.height(), 1, 16, packed.data()), path);
}

void write_mask_png(const SpatialMask& mask, const fs::path& path) {
  std::vector<std::uint8_t> packed(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    packed[i] = static_cast<std::uint8_t>(std::lround(mask.values()[i] * 255.0));
  }
  write_bytes(encode_png_samples(mask.width(), mask.height(), 1, 8, packed.data()), path);
}

SpatialMask read_mask_png(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("no such mask: " + path.string());
  const PngPixels px = decode_png(path, true);
  const double maxval = px.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(px.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = px.samples[i] / maxval;
  return SpatialMask(px.width, px.height, std::move(values));
}

}  // namespace sensorsentry
