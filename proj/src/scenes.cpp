// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sensorsentry/filters.hpp"
#include "sensorsentry/rng.hpp"

namespace sensorsentry {
namespace {

using Color = std::array<double, 3>;

struct Canvas {
  LinearImage rgb;
  Plane depth;

  Canvas(int w, int h) : rgb(w, h), depth(w, h, 1.0) {}

  void put(int x, int y, const Color& c, double d) {
    if (x < 0 || y < 0 || x >= rgb.width || y >= rgb.height) return;
    for (int k = 0; k < 3; ++k) rgb.at(x, y, k) = c[k];
    depth(x, y) = d;
  }
  void fill_rect(int x0, int y0, int x1, int y1, const Color& c, double d) {
    for (int y = std::max(0, y0); y < std::min(rgb.height, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(rgb.width, x1); ++x) put(x, y, c, d);
    }
  }
};

Color jitter(const Color& c, RandomStream& rng, double amount) {
  return {c[0] + rng.uniform(-amount, amount), c[1] + rng.uniform(-amount, amount),
          c[2] + rng.uniform(-amount, amount)};
}

}  // namespace

Scene make_road_scene(int width, int height, std::uint64_t seed) {
  RandomStream layout(derive_key(seed, {0x5CE7E}));
  RandomStream texture = layout.substream(1);
  Canvas cv(width, height);

  const double horizon = height * layout.uniform(0.36, 0.48);
  const double vanish_x = width * layout.uniform(0.4, 0.6);
  const auto ground_depth = [&](double y) {
    const double t = std::clamp((height - y) / (height - horizon), 0.0, 1.0);
    return 0.03 + 0.9 * std::pow(t, 1.6);
  };

  // Sky gradient with soft cloud bands.
  const Color sky_top = jitter({105, 145, 200}, layout, 15);
  const Color sky_low = jitter({190, 205, 220}, layout, 12);
  const double cloud_phase = layout.uniform(0, 6.28);
  for (int y = 0; y < static_cast<int>(horizon); ++y) {
    const double t = y / std::max(1.0, horizon);
    for (int x = 0; x < width; ++x) {
      const double cloud = 18.0 * std::max(0.0, std::sin(x * 0.05 + cloud_phase + 0.3 * y));
      Color c;
      for (int k = 0; k < 3; ++k) c[k] = sky_top[k] * (1 - t) + sky_low[k] * t + cloud;
      cv.put(x, y, c, 1.0);
    }
  }

  // Verge and road.
  const Color verge = jitter({95, 115, 70}, layout, 15);
  const Color asphalt = jitter({88, 88, 92}, layout, 8);
  for (int y = static_cast<int>(horizon); y < height; ++y) {
    const double t = (y - horizon) / (height - horizon);
    const double half = 0.02 * width + t * 0.48 * width;
    for (int x = 0; x < width; ++x) {
      const bool road = std::abs(x - vanish_x) < half;
      const Color& base = road ? asphalt : verge;
      const double grain = texture.uniform(-1, 1) * (road ? 10.0 : 22.0);
      cv.put(x, y, {base[0] + grain, base[1] + grain, base[2] + grain}, ground_depth(y));
    }
    // Dashed centre line.
    if (static_cast<int>((height - y) / std::max(2.0, 6.0 * t + 2.0)) % 2 == 0) {
      const int line_half = std::max(0, static_cast<int>(t * 0.012 * width));
      for (int x = static_cast<int>(vanish_x) - line_half; x <= static_cast<int>(vanish_x) + line_half; ++x) {
        cv.put(x, y, {225, 225, 215}, ground_depth(y));
      }
    }
  }

  // Buildings on both sides of the road.
  const int buildings = 3 + static_cast<int>(layout.below(4));
  for (int i = 0; i < buildings; ++i) {
    const bool left = i % 2 == 0;
    const int bw = static_cast<int>(width * layout.uniform(0.1, 0.22));
    const int x0 = left ? static_cast<int>(width * layout.uniform(0.0, 0.3))
                        : static_cast<int>(width * layout.uniform(0.55, 0.9));
    const int base = static_cast<int>(horizon + height * layout.uniform(0.0, 0.06));
    const int top = static_cast<int>(base - height * layout.uniform(0.12, 0.32));
    const double d = ground_depth(base);
    const Color wall = jitter({135, 120, 105}, layout, 35);
    cv.fill_rect(x0, top, x0 + bw, base, wall, d);
    const Color window = jitter({55, 65, 80}, layout, 15);
    const int step = std::max(3, height / 30);
    for (int wy = top + 2; wy + step / 2 < base - 1; wy += step) {
      for (int wx = x0 + 2; wx + step / 2 < x0 + bw - 1; wx += step) {
        const Color lit = layout.uniform() < 0.2 ? Color{205, 190, 140} : window;
        cv.fill_rect(wx, wy, wx + step / 2 + 1, wy + step / 2 + 1, lit, d);
      }
    }
  }

  // Poles.
  const int poles = 1 + static_cast<int>(layout.below(3));
  for (int i = 0; i < poles; ++i) {
    const int px = static_cast<int>(width * layout.uniform(0.05, 0.95));
    const int base = static_cast<int>(horizon + (height - horizon) * layout.uniform(0.1, 0.6));
    const int top = static_cast<int>(base - height * layout.uniform(0.2, 0.4));
    const int pw = std::max(1, width / 120);
    cv.fill_rect(px, top, px + pw, base, {70, 70, 70}, ground_depth(base));
  }

  // Vehicles on the road, farther ones first.
  const int cars = 1 + static_cast<int>(layout.below(3));
  std::vector<double> rows;
  for (int i = 0; i < cars; ++i) rows.push_back(layout.uniform(0.15, 0.85));
  std::sort(rows.begin(), rows.end());
  for (double r : rows) {
    const double y_base = horizon + (height - horizon) * r;
    const double t = (y_base - horizon) / (height - horizon);
    const double cw = width * (0.06 + 0.22 * t);
    const double ch = cw * 0.7;
    const double cx = vanish_x + layout.uniform(-0.3, 0.3) * (0.02 * width + t * 0.48 * width);
    const double d = ground_depth(y_base);
    const Color body = jitter({150, 40, 40}, layout, 90);
    const int x0 = static_cast<int>(cx - cw / 2);
    const int x1 = static_cast<int>(cx + cw / 2);
    const int y1 = static_cast<int>(y_base);
    const int y0 = static_cast<int>(y_base - ch);
    cv.fill_rect(x0, y0, x1, y1, body, d);
    cv.fill_rect(x0 + (x1 - x0) / 6, y0 + (y1 - y0) / 8, x1 - (x1 - x0) / 6, y0 + (y1 - y0) / 2,
                 {45, 55, 65}, d);
    cv.fill_rect(x0 + 1, y1 - (y1 - y0) / 4, x0 + (x1 - x0) / 5, y1 - (y1 - y0) / 8, {230, 200, 120}, d);
    cv.fill_rect(x1 - (x1 - x0) / 5, y1 - (y1 - y0) / 4, x1 - 1, y1 - (y1 - y0) / 8, {230, 200, 120}, d);
  }

  // Mild optics and sensor grain so clean frames are not synthetically sharp.
  LinearImage soft = gaussian_blur(cv.rgb, 0.6);
  for (double& v : soft.v) v += 1.5 * texture.normal();

  std::vector<double> depth(cv.depth.v.begin(), cv.depth.v.end());
  for (double& d : depth) d = std::clamp(d, 0.0, 1.0);
  return {quantize(soft), DepthMap(width, height, std::move(depth))};
}

}  // namespace sensorsentry
