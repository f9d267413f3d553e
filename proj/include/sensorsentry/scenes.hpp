// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file scenes.hpp
/// @brief Procedural forward-camera road scenes with paired depth, for
/// tests, calibration demos and micro-datasets when no real data is at hand.

#pragma once

#include <cstdint>

#include "sensorsentry/raster.hpp"

namespace sensorsentry {

struct Scene {
  ImageBuffer image;
  DepthMap depth;  // 0 = near, 1 = far (sky)
};

/// Sky, horizon, textured verge, road with lane markings, buildings with
/// windows and a few vehicles. Fully determined by (width, height, seed).
Scene make_road_scene(int width, int height, std::uint64_t seed);

}  // namespace sensorsentry
