// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sensorsentry/error.hpp"

namespace sensorsentry {

/// 8-bit RGB raster, row-major, interleaved.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height);
  ImageBuffer(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return pixel_count() == 0; }

  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y) + c]; }
  void set(int x, int y, int c, std::uint8_t v) { data_[index(x, y) + c] = v; }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Real-valued field with every value in [0,1]; Tag distinguishes depth from
/// masks at the type level.
template <typename Tag>
class UnitField {
 public:
  UnitField() = default;
  UnitField(int width, int height, double fill = 0.0)
      : UnitField(width, height,
                  std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                          static_cast<std::size_t>(std::max(height, 0)),
                                      fill)) {}
  UnitField(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width < 1 || height < 1) throw InvalidArgument("field dimensions must be >= 1");
    if (values_.size() != static_cast<std::size_t>(width) * height) {
      throw DimensionMismatch("field value count does not match width*height");
    }
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("field values must lie in [0,1]");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const { return values_; }

  bool same_shape(int w, int h) const { return w == width_ && h == height_; }
  template <typename Other>
  bool same_shape(const Other& o) const {
    return o.width() == width_ && o.height() == height_;
  }

  friend bool operator==(const UnitField&, const UnitField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct DepthTag {};
struct MaskTag {};

/// Normalized relative depth (0 = near, 1 = far).
using DepthMap = UnitField<DepthTag>;
/// Per-pixel degradation magnitude or uncertainty (1 = fully degraded).
using SpatialMask = UnitField<MaskTag>;

/// Half-open pixel rectangle [x_min, x_max) x [y_min, y_max).
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  std::size_t area() const {
    return static_cast<std::size_t>(x_max - x_min) * static_cast<std::size_t>(y_max - y_min);
  }
  bool valid_within(int width, int height) const {
    return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max && x_max <= width &&
           y_max <= height;
  }
};

}  // namespace sensorsentry
