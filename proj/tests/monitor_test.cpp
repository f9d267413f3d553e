// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/eval.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/labelgen.hpp"
#include "sensorsentry/monitor.hpp"
#include "sensorsentry/scenes.hpp"
#include "testing.hpp"

namespace sensorsentry {
namespace {

constexpr int kWidth = 256;
constexpr int kHeight = 192;

std::vector<CalibrationImage> clean_set(std::uint64_t seed, int count) {
  std::vector<CalibrationImage> out;
  for (int i = 0; i < count; ++i) {
    auto scene = make_road_scene(kWidth, kHeight, derive_key(seed, i));
    out.push_back({std::move(scene.image), std::move(scene.depth)});
  }
  return out;
}

class MonitorTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    calibration_images_ = new std::vector<CalibrationImage>(clean_set(61, 10));
    CalibrationOptions opts;
    opts.jobs = 4;
    table_ = new CalibrationTable(calibrate(*calibration_images_, 5, opts));
  }
  static void TearDownTestSuite() {
    delete table_;
    delete calibration_images_;
  }
  static const CalibrationTable& table() { return *table_; }
  static const std::vector<CalibrationImage>& calibration_images() { return *calibration_images_; }

 private:
  static CalibrationTable* table_;
  static std::vector<CalibrationImage>* calibration_images_;
};

CalibrationTable* MonitorTest::table_ = nullptr;
std::vector<CalibrationImage>* MonitorTest::calibration_images_ = nullptr;

TEST(Isotonic, PoolsAdjacentViolators) {
  const auto fit = isotonic_fit({{1, 1}, {2, 3}, {3, 2}, {4, 4}});
  ASSERT_EQ(fit.size(), 3u);
  EXPECT_EQ(fit[0], (std::pair<double, double>{1, 1}));
  EXPECT_EQ(fit[1], (std::pair<double, double>{2.5, 2.5}));
  EXPECT_EQ(fit[2], (std::pair<double, double>{4, 4}));

  const auto ties = isotonic_fit({{2, 0.0}, {1, 0.5}, {2, 1.0}});
  ASSERT_EQ(ties.size(), 2u);
  EXPECT_EQ(ties[1], (std::pair<double, double>{2, 0.5}));
  EXPECT_THROW(isotonic_fit({}), InvalidArgument);
}

TEST(Isotonic, IdentityStatisticGivesIdentityMap) {
  std::vector<std::pair<double, double>> pairs;
  for (int k = 0; k <= 10; ++k) pairs.emplace_back(k / 10.0, k / 10.0);
  const std::vector<double> clean{0.0, 0.0, 0.0};
  for (const auto& c : {fit_transfer(pairs, {}, 0.9), fit_transfer(pairs, clean, 0.9)}) {
    EXPECT_TRUE(c.monotone());
    for (int k = 0; k <= 10; ++k) EXPECT_NEAR(c(k / 10.0), k / 10.0, 1e-12);
    EXPECT_NEAR(c(0.35), 0.35, 1e-12);
  }
}

TEST(Isotonic, DeadZoneSilencesCleanRange) {
  std::vector<std::pair<double, double>> pairs;
  for (int k = 0; k <= 10; ++k) pairs.emplace_back(1.0 + k, k / 10.0);
  const std::vector<double> clean{0.8, 1.0, 1.2, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 3.0};
  const auto c = fit_transfer(pairs, clean, 0.9);
  EXPECT_TRUE(c.monotone());
  for (double v : clean) {
    if (v < 1.95) {
      EXPECT_EQ(c(v), 0.0) << v;
    }
  }
  EXPECT_GT(c(3.0), 0.0);
  EXPECT_NEAR(c(11.0), 1.0, 1e-12);
  EXPECT_GT(c(5.0), 0.0);
}

TEST(CalibrationTableFormat, RoundTrip) {
  CalibrationTable t;
  EXPECT_FALSE(t.calibrated());
  for (auto m : kAllModes) {
    TransferCurve c;
    c.baseline = 0.1 * static_cast<double>(mode_id(m));
    c.points = {{0.0, 0.0}, {1.0 / 3.0, 0.5}, {2.0, 1.0}};
    t.set_curve(m, c);
  }
  t.set_exposure_reference(0.4321);
  EXPECT_TRUE(t.calibrated());
  const auto back = CalibrationTable::parse(t.serialize());
  EXPECT_EQ(back, t);
  EXPECT_EQ(t.serialize().rfind(CalibrationTable::kHeader, 0), 0u);

  testing::ScratchDir dir("calib");
  t.save(dir.path() / "c.txt");
  EXPECT_EQ(CalibrationTable::load(dir.path() / "c.txt"), t);
  EXPECT_THROW(CalibrationTable::parse("mode fog baseline 0 points 0:0\n"), DataError);
  EXPECT_THROW(CalibrationTable::load(dir.path() / "nope.txt"), DataError);
}

TEST(Calibrate, RejectsTooFewImages) {
  const auto few = clean_set(3, 4);
  EXPECT_THROW(calibrate(few, 1), CalibrationError);
}

TEST(Estimate, RequiresCalibration) {
  const auto scene = make_road_scene(64, 48, 1);
  EXPECT_THROW(estimate(scene.image, CalibrationTable{}), CalibrationError);
}

TEST_F(MonitorTest, TransfersAreMonotone) {
  for (auto m : kAllModes) {
    ASSERT_TRUE(table().curve(m)) << mode_name(m);
    const auto& c = *table().curve(m);
    EXPECT_TRUE(c.monotone()) << mode_name(m);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_LE(c.points[i - 1].second, c.points[i].second) << mode_name(m);
    }
  }
}

TEST_F(MonitorTest, CalibrationIsDeterministicAcrossJobs) {
  CalibrationOptions opts;
  opts.jobs = 1;
  EXPECT_EQ(calibrate(calibration_images(), 5, opts), table());
  EXPECT_EQ(CalibrationTable::parse(table().serialize()), table());
}

TEST_F(MonitorTest, OutputContract) {
  const auto scene = make_road_scene(kWidth, kHeight, 777);
  const auto out = estimate(scene.image, table());
  EXPECT_NEAR(out.health.value(), compute_gshi(out.severities).value(), 1e-12);
  EXPECT_TRUE(out.uncertainty.same_shape(kWidth, kHeight));
  for (auto m : kAllModes) {
    EXPECT_EQ(out.presence.active(m), out.severities[m] > kPresenceThreshold);
  }
  const auto again = estimate(scene.image, table());
  EXPECT_EQ(again.severities, out.severities);
  EXPECT_EQ(again.uncertainty, out.uncertainty);
}

TEST_F(MonitorTest, HeldOutCleanImagesStayQuiet) {
  for (const auto& ci : clean_set(9001, 20)) {
    const auto out = estimate(ci.image, table());
    EXPECT_GE(out.health.value(), 0.7);
    for (auto m : kAllModes) EXPECT_LE(out.severities[m], 0.15) << mode_name(m);
  }
}

TEST_F(MonitorTest, BlackImageIsLowLight) {
  const ImageBuffer black(kWidth, kHeight);
  const auto out = estimate(black, table());
  EXPECT_GE(out.severities[DegradationMode::LowLight], 0.9);
  EXPECT_LT(out.health.value(), 0.6);
}

TEST_F(MonitorTest, FogEstimateTracksSeverity) {
  const auto grid = default_severity_grid();
  for (const auto& ci : clean_set(4242, 3)) {
    const auto sweep = severity_sweep(ci.image, ci.depth, DegradationMode::Fog, grid, 12);
    std::vector<double> est;
    for (const auto& r : sweep) est.push_back(estimate(r.image, table()).severities[DegradationMode::Fog]);
    EXPECT_GE(spearman(grid, est), 0.9);
  }
}

TEST_F(MonitorTest, InSampleSeverityError) {
  using M = DegradationMode;
  const auto grid = default_severity_grid();
  for (M m : {M::Fog, M::LowLight, M::SensorNoise, M::JpegCompression, M::Vignetting,
              M::MotionBlur, M::DefocusBlur}) {
    double err = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < calibration_images().size(); ++i) {
      const auto& ci = calibration_images()[i];
      const auto sweep =
          severity_sweep(ci.image, ci.depth, m, grid, calibration_stream(5, i, m));
      for (std::size_t k = 0; k < grid.size(); ++k) {
        err += std::abs(estimate(sweep[k].image, table()).severities[m] - grid[k]);
        ++n;
      }
    }
    EXPECT_LE(err / n, 0.15) << mode_name(m);
  }
}

TEST_F(MonitorTest, UncertaintyFollowsOcclusion) {
  const auto scene = make_road_scene(kWidth, kHeight, 31337);
  const auto r = apply(scene.image, scene.depth, {DegradationMode::LensOcclusion, 0.8, 3});
  const auto out = estimate(r.image, table());
  const double occluded = ause(out.uncertainty, *r.mask);
  const double constant = ause(SpatialMask(kWidth, kHeight, 0.5), *r.mask);
  EXPECT_LT(occluded, constant);
}

}  // namespace
}  // namespace sensorsentry
