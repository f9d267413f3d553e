// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace sensorsentry {

double Plane::mean() const {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Plane LinearImage::channel(int c) const {
  Plane p(width, height);
  for (std::size_t i = 0; i < pixel_count(); ++i) p.v[i] = v[i * 3 + c];
  return p;
}

void LinearImage::set_channel(int c, const Plane& p) {
  for (std::size_t i = 0; i < pixel_count(); ++i) v[i * 3 + c] = p.v[i];
}

LinearImage to_linear(const ImageBuffer& img) {
  LinearImage out(img.width(), img.height());
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) out.v[i] = bytes[i];
  return out;
}

ImageBuffer quantize(const LinearImage& img) {
  std::vector<std::uint8_t> bytes(img.v.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double c = std::clamp(img.v[i], 0.0, 255.0);
    bytes[i] = static_cast<std::uint8_t>(std::lround(c));
  }
  return ImageBuffer(img.width, img.height, std::move(bytes));
}

Plane luminance(const ImageBuffer& img) {
  Plane out(img.width(), img.height());
  const auto b = img.bytes();
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] = (0.299 * b[3 * i] + 0.587 * b[3 * i + 1] + 0.114 * b[3 * i + 2]) / 255.0;
  }
  return out;
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[i + radius] = w;
    sum += w;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

Plane convolve_separable(const Plane& in, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  if (r == 0) return in;
  Plane tmp(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * in.clamped(x + k, y);
      tmp(x, y) = acc;
    }
  }
  Plane out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp.clamped(x, y + k);
      out(x, y) = acc;
    }
  }
  return out;
}

Plane gaussian_blur(const Plane& in, double sigma) {
  return convolve_separable(in, gaussian_taps(sigma));
}

LinearImage gaussian_blur(const LinearImage& in, double sigma) {
  const auto taps = gaussian_taps(sigma);
  LinearImage out(in.width, in.height);
  for (int c = 0; c < 3; ++c) out.set_channel(c, convolve_separable(in.channel(c), taps));
  return out;
}

Plane convolve(const Plane& in, const Kernel2D& k) {
  const int r = k.size / 2;
  struct Tap {
    int dx, dy;
    double w;
  };
  // Non-zero taps in row-major kernel order.
  std::vector<Tap> taps;
  for (int ky = 0; ky < k.size; ++ky) {
    for (int kx = 0; kx < k.size; ++kx) {
      if (k(kx, ky) != 0.0) taps.push_back({kx - r, ky - r, k(kx, ky)});
    }
  }
  Plane out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    const bool inner_y = y >= r && y + r < in.height;
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      if (inner_y && x >= r && x + r < in.width) {
        for (const auto& t : taps) acc += t.w * in(x + t.dx, y + t.dy);
      } else {
        for (const auto& t : taps) acc += t.w * in.clamped(x + t.dx, y + t.dy);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

LinearImage convolve(const LinearImage& in, const Kernel2D& k) {
  LinearImage out(in.width, in.height);
  for (int c = 0; c < 3; ++c) out.set_channel(c, convolve(in.channel(c), k));
  return out;
}

Plane box_mean(const Plane& in, int radius) {
  if (radius <= 0) return in;
  std::vector<double> taps(2 * radius + 1, 1.0 / (2 * radius + 1));
  return convolve_separable(in, taps);
}

Plane min_filter(const Plane& in, int radius) {
  if (radius <= 0) return in;
  Plane tmp(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double m = in(x, y);
      for (int k = -radius; k <= radius; ++k) m = std::min(m, in.clamped(x + k, y));
      tmp(x, y) = m;
    }
  }
  Plane out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double m = tmp(x, y);
      for (int k = -radius; k <= radius; ++k) m = std::min(m, tmp.clamped(x, y + k));
      out(x, y) = m;
    }
  }
  return out;
}

Plane median3x3(const Plane& in) {
  Plane out(in.width, in.height);
  std::array<double, 9> win{};
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) win[n++] = in.clamped(x + dx, y + dy);
      }
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out(x, y) = win[4];
    }
  }
  return out;
}

}  // namespace sensorsentry
