// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

// Writes procedural road scenes and their depth maps:
//   <out>/images/scene_NNN.png  and  <out>/depth/scene_NNN.png

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sensorsentry/image_io.hpp"
#include "sensorsentry/rng.hpp"
#include "sensorsentry/scenes.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate procedural road scenes with depth", "make_scenes"};
  std::string out;
  int count = 20;
  int width = 256;
  int height = 192;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--count", count, "Number of scenes")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--width", width, "Width in pixels")->capture_default_str()->check(CLI::Range(16, 8192));
  app.add_option("--height", height, "Height in pixels")->capture_default_str()->check(CLI::Range(16, 8192));
  app.add_option("--seed", seed, "Scene seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  try {
    fs::create_directories(fs::path(out) / "images");
    fs::create_directories(fs::path(out) / "depth");
    for (int i = 0; i < count; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%03d.png", i);
      const auto scene = sensorsentry::make_road_scene(
          width, height, sensorsentry::derive_key(seed, static_cast<std::uint64_t>(i)));
      sensorsentry::write_png(scene.image, fs::path(out) / "images" / name);
      sensorsentry::write_depth_png(scene.depth, fs::path(out) / "depth" / name);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << count << " scenes to " << out << "\n";
  return 0;
}
