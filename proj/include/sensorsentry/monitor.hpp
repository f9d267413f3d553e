// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file monitor.hpp
/// @brief Training-free camera health monitor built from classical image
/// statistics and calibrated monotone transfers.
///
/// The monitor consumes a single RGB image. It never sees depth, detector
/// output or previous frames.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sensorsentry/core.hpp"
#include "sensorsentry/raster.hpp"
#include "sensorsentry/synthesis.hpp"

namespace sensorsentry {

inline constexpr double kPresenceThreshold = 0.1;
inline constexpr int kUncertaintyTile = 16;

/// Raw per-mode statistics, each increasing with its mode's severity.
struct ModeStatistics {
  std::array<double, kNumModes> raw{};
  double mean_luminance = 0.0;

  double operator[](DegradationMode m) const { return raw[mode_id(m)]; }
};

/// Statistics of one image. exposure_reference is the clean mean luminance
/// the exposure statistic measures deviation from.
ModeStatistics compute_statistics(const ImageBuffer& img, double exposure_reference = 0.45);

/// Non-decreasing step fit of y on x (pool adjacent violators). Equal x
/// values are pooled first; returns one (mean x, level) point per block.
std::vector<std::pair<double, double>> isotonic_fit(std::vector<std::pair<double, double>> xy);

/// Monotone piecewise-linear map from (raw - baseline) to severity, constant
/// beyond the end points.
struct TransferCurve {
  double baseline = 0.0;
  std::vector<std::pair<double, double>> points;

  double operator()(double raw) const;
  bool monotone() const;
  friend bool operator==(const TransferCurve&, const TransferCurve&) = default;
};

/// Fits a transfer from (raw, severity) pairs. Raw values at or below the
/// clean_quantile of clean_raw map to zero so clean inputs stay quiet.
TransferCurve fit_transfer(std::span<const std::pair<double, double>> pairs,
                           std::span<const double> clean_raw, double clean_quantile);

class CalibrationTable {
 public:
  static constexpr std::string_view kHeader = "# sensorsentry calibration v1";

  bool calibrated() const;
  const std::optional<TransferCurve>& curve(DegradationMode m) const {
    return curves_[mode_id(m)];
  }
  void set_curve(DegradationMode m, TransferCurve c) { curves_[mode_id(m)] = std::move(c); }
  double exposure_reference() const { return exposure_reference_; }
  void set_exposure_reference(double v) { exposure_reference_ = v; }

  std::string serialize() const;
  static CalibrationTable parse(std::string_view text);
  static CalibrationTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const CalibrationTable&, const CalibrationTable&) = default;

 private:
  std::array<std::optional<TransferCurve>, kNumModes> curves_;
  double exposure_reference_ = 0.45;
};

struct CalibrationImage {
  ImageBuffer image;
  std::optional<DepthMap> depth;  // vertical ramp used when absent
};

struct CalibrationOptions {
  std::vector<double> grid;  // empty: {0, 0.1, ..., 1}
  double clean_quantile = 0.9;
  int jobs = 1;
  SeverityMapping mapping;
};

inline constexpr std::size_t kMinCalibrationImages = 10;

/// Stream of the calibration sweep of image image_index for mode m.
std::uint64_t calibration_stream(std::uint64_t seed, std::size_t image_index, DegradationMode m);

/// Sweeps every mode over the grid on each clean image and fits one transfer
/// per mode. Throws CalibrationError with fewer than 10 images.
CalibrationTable calibrate(std::span<const CalibrationImage> clean, std::uint64_t seed,
                           const CalibrationOptions& options = {});

/// Depth stand-in when none is supplied: far (1) at the top row, near (0) at
/// the bottom.
DepthMap vertical_ramp_depth(int width, int height);

struct MonitorOutput {
  PresenceVector presence;
  SeverityVector severities;
  HealthScore health;
  SpatialMask uncertainty;
  ModeStatistics statistics;
};

/// Throws CalibrationError when the table is not calibrated.
MonitorOutput estimate(const ImageBuffer& img, const CalibrationTable& table,
                       const RiskWeightTable& weights = default_risk_table());

}  // namespace sensorsentry
