// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/image_io.hpp"
#include "sensorsentry/labelgen.hpp"
#include "sensorsentry/manifest.hpp"
#include "sensorsentry/scenes.hpp"
#include "testing.hpp"

namespace sensorsentry {
namespace {

namespace fs = std::filesystem;

TEST(Sampling, CategoricalFrequencies) {
  SamplingPolicy policy;
  policy.global_seed = 2024;
  const int n = 100000;
  int clean = 0, two = 0, degraded = 0;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_assignment(policy, i);
    if (a.empty()) {
      ++clean;
    } else {
      ++degraded;
      two += a.size() == 2;
    }
  }
  EXPECT_NEAR(clean / static_cast<double>(n), 0.15, 0.01);
  EXPECT_NEAR(two / static_cast<double>(degraded), 0.25, 0.01);
}

TEST(Sampling, NoIncompatiblePairsAndFormationOrder) {
  SamplingPolicy policy;
  policy.global_seed = 7;
  policy.two_mode_fraction = 0.9;
  int incompatible = 0, unordered = 0, out_of_range = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto a = sample_assignment(policy, i);
    ASSERT_LE(a.size(), 2u);
    for (const auto& ms : a) out_of_range += !(ms.severity >= 0.0 && ms.severity < 1.0);
    if (a.size() == 2) {
      incompatible += !compatible(a[0].mode, a[0].severity, a[1].mode, a[1].severity);
      unordered += formation_order(a[0].mode) > formation_order(a[1].mode);
    }
  }
  EXPECT_EQ(incompatible, 0);
  EXPECT_EQ(unordered, 0);
  EXPECT_EQ(out_of_range, 0);
}

TEST(Sampling, DeterministicPerIndex) {
  SamplingPolicy p;
  p.global_seed = 99;
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_assignment(p, i), sample_assignment(p, i));
  SamplingPolicy q = p;
  q.global_seed = 100;
  int same = 0;
  for (int i = 0; i < 200; ++i) same += sample_assignment(p, i) == sample_assignment(q, i);
  EXPECT_LT(same, 60);
}

TEST(Sampling, PolicyValidation) {
  SamplingPolicy p;
  p.clean_fraction = 1.2;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.clean_fraction = 0.1;
  p.two_mode_fraction = -0.1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  SamplingPolicy all_clean;
  all_clean.clean_fraction = 1.0;
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_assignment(all_clean, i).empty());
}

TEST(ComposeMasks, PointwiseMaximum) {
  const SpatialMask a(2, 2, std::vector<double>{0.1, 0.9, 0.0, 0.5});
  const SpatialMask b(2, 2, std::vector<double>{0.3, 0.2, 0.0, 0.5});
  const SpatialMask c(2, 2, std::vector<double>{0.0, 0.0, 0.7, 0.4});
  const std::vector<SpatialMask> masks{a, b, c};
  EXPECT_EQ(compose_masks(masks), SpatialMask(2, 2, std::vector<double>{0.3, 0.9, 0.7, 0.5}));
  EXPECT_EQ(compose_masks(std::span(masks).first(1)), a);
  EXPECT_THROW(compose_masks({}), InvalidArgument);
  const std::vector<SpatialMask> bad{a, SpatialMask(3, 2, 0.0)};
  EXPECT_THROW(compose_masks(bad), DimensionMismatch);
}

TEST(LabelRecord, HealthRederivesFromSeverities) {
  SamplingPolicy p;
  p.global_seed = 5;
  for (int i = 0; i < 2000; ++i) {
    const auto a = sample_assignment(p, i);
    const auto r = make_label_record("img", "src.png", a, record_seed(5, i));
    const auto s = to_severity_vector(a);
    EXPECT_NEAR(r.health_target.value(), static_cast<double>(testing::gshi_reference(s.values())),
                1e-12);
    EXPECT_EQ(r.regime, classify_regime(r.health_target));
    for (auto m : kAllModes) {
      const bool listed =
          std::any_of(a.begin(), a.end(), [&](const ModeSeverity& ms) { return ms.mode == m; });
      EXPECT_EQ(r.presence.active(m), listed);
    }
  }
}

TEST(LabelRecord, PathsAndMaskValidity) {
  const auto clean = make_label_record("x1", "s.png", {}, 1);
  EXPECT_EQ(clean.output, "images/x1.png");
  EXPECT_FALSE(clean.mask_valid);
  EXPECT_FALSE(clean.mask);
  EXPECT_EQ(clean.health_target.value(), 1.0);
  EXPECT_EQ(clean.regime, Regime::Healthy);

  const auto noisy = make_label_record("x2", "s.png", {{DegradationMode::SensorNoise, 0.5}}, 1);
  EXPECT_FALSE(noisy.mask_valid);
  const auto foggy = make_label_record(
      "x3", "s.png", {{DegradationMode::Fog, 0.5}, {DegradationMode::SensorNoise, 0.5}}, 1);
  EXPECT_TRUE(foggy.mask_valid);
  EXPECT_EQ(*foggy.mask, "masks/x3.png");
}

TEST(SynthesizeAssignment, ComposesInOrderWithPerModeStreams) {
  const auto scene = make_road_scene(64, 48, 3);
  const std::uint64_t seed = record_seed(1, 0);
  const Assignment a{{DegradationMode::Fog, 0.5}, {DegradationMode::SensorNoise, 0.4}};
  const auto out = synthesize_assignment(scene.image, scene.depth, a, seed);

  const auto fog = apply(scene.image, scene.depth,
                         {DegradationMode::Fog, 0.5, mode_stream(seed, DegradationMode::Fog)});
  const auto noise =
      apply(fog.image, scene.depth,
            {DegradationMode::SensorNoise, 0.4, mode_stream(seed, DegradationMode::SensorNoise)});
  EXPECT_EQ(out.image, noise.image);
  ASSERT_TRUE(out.mask);
  EXPECT_EQ(*out.mask, *fog.mask);

  const auto clean = synthesize_assignment(scene.image, scene.depth, {}, seed);
  EXPECT_EQ(clean.image, scene.image);
  EXPECT_FALSE(clean.mask);
}

TEST(SeveritySweep, SharesStreamAcrossGrid) {
  const auto scene = make_road_scene(64, 48, 4);
  const auto grid = default_severity_grid();
  ASSERT_EQ(grid.size(), 11u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid.back(), 1.0);
  const auto results = severity_sweep(scene.image, scene.depth, DegradationMode::Glare, grid, 42);
  ASSERT_EQ(results.size(), grid.size());
  EXPECT_EQ(results[0].image, scene.image);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const auto direct = apply(scene.image, scene.depth, {DegradationMode::Glare, grid[k], 42});
    EXPECT_EQ(results[k].image, direct.image);
    EXPECT_EQ(results[k].knobs, direct.knobs);
  }
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override { testing::write_scene_set(dir_.path() / "src", 6, 64, 48, 77); }
  fs::path src() const { return dir_.path() / "src"; }
  fs::path out(const std::string& name) const { return dir_.path() / name; }
  testing::ScratchDir dir_{"dataset"};
};

TEST_F(DatasetTest, DiscoverPairsDepthByStem) {
  fs::remove(src() / "depth" / "scene_002.png");
  const auto sources = discover_sources(src() / "images", src() / "depth");
  ASSERT_EQ(sources.size(), 6u);
  EXPECT_EQ(sources[0].image.filename(), "scene_000.png");
  EXPECT_TRUE(sources[0].depth);
  EXPECT_FALSE(sources[2].depth);
  EXPECT_THROW(discover_sources(src() / "missing", std::nullopt), DataError);
}

TEST_F(DatasetTest, ManifestConsistentAndJobIndependent) {
  const auto sources = discover_sources(src() / "images", src() / "depth");
  GenerateOptions opts;
  opts.policy.global_seed = 3;
  opts.count = 15;
  opts.jobs = 1;
  const auto a = generate_dataset(sources, out("a"), opts);
  opts.jobs = 4;
  const auto b = generate_dataset(sources, out("b"), opts);
  ASSERT_EQ(a.records.size(), 15u);
  EXPECT_TRUE(a.errors.empty());

  for (const char* f : {"manifest.jsonl", "errors.jsonl", "checksums.txt"}) {
    EXPECT_EQ(testing::read_file(out("a") / f), testing::read_file(out("b") / f)) << f;
  }
  const auto manifest = read_manifest(out("a") / "manifest.jsonl");
  ASSERT_EQ(manifest.size(), 15u);
  for (const auto& r : manifest) {
    EXPECT_NEAR(r.health_target.value(),
                static_cast<double>(testing::gshi_reference(r.severities().values())), 1e-12);
    EXPECT_EQ(testing::read_file(out("a") / r.output), testing::read_file(out("b") / r.output));
    EXPECT_EQ(r.mask_valid, r.mask.has_value());
    if (r.mask) {
      const auto m = read_mask_png(out("a") / *r.mask);
      const auto img = read_image(out("a") / r.output);
      EXPECT_TRUE(m.same_shape(img.width(), img.height()));
    }
  }
  EXPECT_EQ(manifest.front().image_id, "img_000000");
  EXPECT_EQ(manifest[7].source, manifest[1].source);
}

TEST_F(DatasetTest, ResumeSkipsMatchingRecords) {
  const auto sources = discover_sources(src() / "images", src() / "depth");
  GenerateOptions opts;
  opts.policy.global_seed = 4;
  opts.count = 8;
  const auto first = generate_dataset(sources, out("r"), opts);
  EXPECT_EQ(first.reused, 0u);
  const auto manifest = testing::read_file(out("r") / "manifest.jsonl");
  const auto second = generate_dataset(sources, out("r"), opts);
  EXPECT_EQ(second.reused, 8u);
  EXPECT_EQ(testing::read_file(out("r") / "manifest.jsonl"), manifest);

  // A damaged output is rebuilt.
  const auto victim = out("r") / first.records[3].output;
  fs::resize_file(victim, 10);
  const auto third = generate_dataset(sources, out("r"), opts);
  EXPECT_EQ(third.reused, 7u);
  EXPECT_EQ(sha256_file(victim), sha256_file(out("r") / first.records[3].output));
  const auto rebuilt = read_image(victim);
  EXPECT_EQ(rebuilt.width(), 64);
}

TEST_F(DatasetTest, MissingDepthIsReportedPerRecord) {
  const auto sources = discover_sources(src() / "images", std::nullopt);
  GenerateOptions opts;
  opts.policy.global_seed = 11;
  opts.policy.clean_fraction = 0.0;
  opts.count = 60;
  const auto r = generate_dataset(sources, out("nodepth"), opts);
  EXPECT_FALSE(r.errors.empty());
  EXPECT_EQ(r.records.size() + r.errors.size(), 60u);
  for (const auto& e : r.errors) EXPECT_EQ(e.kind, "depth_required");
  for (const auto& rec : r.records) {
    for (const auto& ms : rec.modes) {
      EXPECT_NE(ms.mode, DegradationMode::Fog);
      EXPECT_NE(ms.mode, DegradationMode::DefocusBlur);
    }
  }
  const auto errors = testing::read_file(out("nodepth") / "errors.jsonl");
  EXPECT_EQ(static_cast<std::size_t>(std::count(errors.begin(), errors.end(), '\n')),
            r.errors.size());
}

TEST_F(DatasetTest, SweepSetLayout) {
  const auto sources = discover_sources(src() / "images", src() / "depth");
  SweepOptions opts;
  opts.modes = {DegradationMode::Fog, DegradationMode::Vignetting};
  opts.grid = {0.0, 0.5, 1.0};
  opts.seed = 9;
  const auto r = generate_sweep_set(std::span(sources).first(2), out("sw"), opts);
  ASSERT_EQ(r.records.size(), 2u * 2u * 3u);
  std::set<std::string> ids;
  for (const auto& rec : r.records) {
    ids.insert(rec.image_id);
    ASSERT_TRUE(rec.sweep);
    if (rec.sweep->severity == 0.0) {
      EXPECT_TRUE(rec.modes.empty());
    } else {
      ASSERT_EQ(rec.modes.size(), 1u);
      EXPECT_EQ(rec.modes[0].mode, rec.sweep->mode);
      EXPECT_EQ(rec.modes[0].severity, rec.sweep->severity);
    }
  }
  EXPECT_EQ(ids.size(), r.records.size());
  EXPECT_TRUE(ids.count("sw0001_vignetting_02"));
  const auto manifest = read_manifest(out("sw") / "manifest.jsonl");
  EXPECT_EQ(manifest.size(), r.records.size());
}

TEST(Sha256, KnownDigest) {
  testing::ScratchDir dir("sha");
  {
    std::ofstream f(dir.path() / "abc.txt", std::ios::binary);
    f << "abc";
  }
  EXPECT_EQ(sha256_file(dir.path() / "abc.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace sensorsentry
