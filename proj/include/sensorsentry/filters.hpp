// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file filters.hpp
/// @brief Real-valued image planes and the small set of filters shared by the
/// degradation operators and the heuristic monitor. Borders replicate the
/// nearest edge pixel throughout.

#pragma once

#include <cstddef>
#include <vector>

#include "sensorsentry/raster.hpp"

namespace sensorsentry {

/// Single-channel real plane, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
  /// Edge-replicating access.
  double clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return v[static_cast<std::size_t>(y) * width + x];
  }
  double mean() const;
};

/// RGB image in 64-bit reals on the 0..255 grey-level scale. Operators work
/// in this space and quantize once at the end.
struct LinearImage {
  int width = 0;
  int height = 0;
  std::vector<double> v;  // interleaved RGB

  LinearImage() = default;
  LinearImage(int w, int h) : width(w), height(h), v(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  double& at(int x, int y, int c) { return v[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return v[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  Plane channel(int c) const;
  void set_channel(int c, const Plane& p);
};

LinearImage to_linear(const ImageBuffer& img);
/// Clip to [0,255] and round to nearest.
ImageBuffer quantize(const LinearImage& img);

/// Rec.601 luma of an 8-bit image, scaled to [0,1].
Plane luminance(const ImageBuffer& img);

/// Square kernel of odd size, row-major.
struct Kernel2D {
  int size = 1;
  std::vector<double> w{1.0};

  double operator()(int kx, int ky) const { return w[static_cast<std::size_t>(ky) * size + kx]; }
};

/// Normalized 1-D Gaussian taps exp(-x^2 / 2 sigma^2) for |x| <= ceil(3 sigma).
/// sigma <= 0 yields the identity tap.
std::vector<double> gaussian_taps(double sigma);

Plane convolve_separable(const Plane& in, const std::vector<double>& taps);
Plane gaussian_blur(const Plane& in, double sigma);
LinearImage gaussian_blur(const LinearImage& in, double sigma);

/// Dense 2-D correlation with a centred kernel.
Plane convolve(const Plane& in, const Kernel2D& k);
LinearImage convolve(const LinearImage& in, const Kernel2D& k);

Plane box_mean(const Plane& in, int radius);
Plane min_filter(const Plane& in, int radius);
Plane median3x3(const Plane& in);

}  // namespace sensorsentry
