// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file core.hpp
/// @brief Degradation taxonomy, severity/presence vectors, health scores,
/// operating regimes and the GSHI risk-weight table.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sensorsentry {

inline constexpr std::size_t kNumModes = 12;
inline constexpr std::size_t kNumGroups = 6;

/// Camera degradation modes. The numeric ids are frozen (they index every
/// severity/presence vector and appear in manifests) and follow the row order
/// of the default risk table.
enum class DegradationMode : std::uint8_t {
  Fog = 0,
  Rain = 1,
  Snow = 2,
  LowLight = 3,
  MotionBlur = 4,
  DefocusBlur = 5,
  Glare = 6,
  Vignetting = 7,
  SensorNoise = 8,
  ExposureShift = 9,
  JpegCompression = 10,
  LensOcclusion = 11,
};

enum class ModeGroup : std::uint8_t {
  Weather = 0,
  Illumination = 1,
  Optical = 2,
  Motion = 3,
  SensorPipeline = 4,
  Occlusion = 5,
};

inline constexpr std::array<DegradationMode, kNumModes> kAllModes = {
    DegradationMode::Fog,           DegradationMode::Rain,
    DegradationMode::Snow,          DegradationMode::LowLight,
    DegradationMode::MotionBlur,    DegradationMode::DefocusBlur,
    DegradationMode::Glare,         DegradationMode::Vignetting,
    DegradationMode::SensorNoise,   DegradationMode::ExposureShift,
    DegradationMode::JpegCompression, DegradationMode::LensOcclusion,
};

inline constexpr std::array<ModeGroup, kNumGroups> kAllGroups = {
    ModeGroup::Weather, ModeGroup::Illumination,   ModeGroup::Optical,
    ModeGroup::Motion,  ModeGroup::SensorPipeline, ModeGroup::Occlusion,
};

constexpr std::size_t mode_id(DegradationMode m) {
  return static_cast<std::size_t>(m);
}
constexpr std::size_t group_id(ModeGroup g) { return static_cast<std::size_t>(g); }

constexpr DegradationMode mode_from_id(std::size_t id) { return kAllModes.at(id); }

constexpr ModeGroup group_of(DegradationMode m) {
  switch (m) {
    case DegradationMode::Fog:
    case DegradationMode::Rain:
    case DegradationMode::Snow:
      return ModeGroup::Weather;
    case DegradationMode::LowLight:
    case DegradationMode::ExposureShift:
      return ModeGroup::Illumination;
    case DegradationMode::DefocusBlur:
    case DegradationMode::Glare:
    case DegradationMode::Vignetting:
      return ModeGroup::Optical;
    case DegradationMode::MotionBlur:
      return ModeGroup::Motion;
    case DegradationMode::SensorNoise:
    case DegradationMode::JpegCompression:
      return ModeGroup::SensorPipeline;
    case DegradationMode::LensOcclusion:
      return ModeGroup::Occlusion;
  }
  return ModeGroup::Weather;
}

/// Modes whose synthesis produces a physically meaningful spatial footprint.
constexpr bool has_spatial_footprint(DegradationMode m) {
  switch (m) {
    case DegradationMode::Fog:
    case DegradationMode::Rain:
    case DegradationMode::Snow:
    case DegradationMode::DefocusBlur:
    case DegradationMode::Glare:
    case DegradationMode::Vignetting:
    case DegradationMode::LensOcclusion:
      return true;
    default:
      return false;
  }
}

/// snake_case identifier used in files and on the command line.
std::string_view mode_name(DegradationMode m);
/// Human-readable label, e.g. "Haze/Fog".
std::string_view mode_label(DegradationMode m);
std::string_view group_name(ModeGroup g);

/// Accepts the snake_case name and a few aliases ("jpeg_compression",
/// "occlusion", "haze", ...). Case-insensitive.
std::optional<DegradationMode> parse_mode(std::string_view text);
std::optional<ModeGroup> parse_group(std::string_view text);

/// Per-mode severities in [0,1]. Construction rejects NaN and out-of-range
/// entries; use clamped() for raw outputs of external estimators.
class SeverityVector {
 public:
  SeverityVector() { values_.fill(0.0); }
  explicit SeverityVector(const std::array<double, kNumModes>& values);

  static SeverityVector clamped(const std::array<double, kNumModes>& raw);

  double operator[](DegradationMode m) const { return values_[mode_id(m)]; }
  double at(std::size_t id) const { return values_.at(id); }
  void set(DegradationMode m, double severity);

  const std::array<double, kNumModes>& values() const { return values_; }
  bool all_zero() const;

  friend bool operator==(const SeverityVector&, const SeverityVector&) = default;

 private:
  std::array<double, kNumModes> values_;
};

/// Multi-label presence: booleans for targets (stored as 0/1) or
/// probabilities in [0,1] for predictions.
class PresenceVector {
 public:
  PresenceVector() { values_.fill(0.0); }
  explicit PresenceVector(const std::array<double, kNumModes>& values);
  static PresenceVector from_flags(const std::array<bool, kNumModes>& flags);

  double operator[](DegradationMode m) const { return values_[mode_id(m)]; }
  double at(std::size_t id) const { return values_.at(id); }
  bool active(DegradationMode m) const { return values_[mode_id(m)] > 0.5; }
  void set(DegradationMode m, double p);

  const std::array<double, kNumModes>& values() const { return values_; }

  friend bool operator==(const PresenceVector&, const PresenceVector&) = default;

 private:
  std::array<double, kNumModes> values_;
};

/// Scalar camera health in [0,1]. Values outside the range are clamped (and
/// logged); NaN is rejected.
class HealthScore {
 public:
  HealthScore() = default;
  explicit HealthScore(double value);

  double value() const { return value_; }

  friend auto operator<=>(const HealthScore&, const HealthScore&) = default;

 private:
  double value_ = 1.0;
};

/// Operating regime. Enumerator values encode the order
/// Critical < Degraded < Healthy.
enum class Regime : std::uint8_t { Critical = 0, Degraded = 1, Healthy = 2 };

inline constexpr double kHealthyThreshold = 0.9;
inline constexpr double kDegradedThreshold = 0.6;

/// Healthy for h >= 0.9, Degraded for 0.6 <= h < 0.9, Critical below 0.6.
Regime classify_regime(HealthScore h);
std::string_view regime_name(Regime r);

/// Risk weights of the multiplicative health index: a base weight per mode
/// and a scale per group, with an optional per-mode scale override for rows
/// whose scale departs from their group's.
class RiskWeightTable {
 public:
  RiskWeightTable();

  double base_weight(DegradationMode m) const { return base_[mode_id(m)]; }
  double group_scale(ModeGroup g) const { return group_[group_id(g)]; }
  std::optional<double> scale_override(DegradationMode m) const {
    return override_[mode_id(m)];
  }
  /// alpha_{g(i)} as applied to mode m.
  double scale_for(DegradationMode m) const;
  /// w_i * alpha_{g(i)}.
  double effective_exponent(DegradationMode m) const;

  void set_base_weight(DegradationMode m, double w);
  void set_group_scale(ModeGroup g, double alpha);
  void set_scale_override(DegradationMode m, std::optional<double> alpha);

  friend bool operator==(const RiskWeightTable&, const RiskWeightTable&) = default;

 private:
  std::array<double, kNumModes> base_;
  std::array<double, kNumGroups> group_;
  std::array<std::optional<double>, kNumModes> override_;
};

/// The published weight table (12 rows).
RiskWeightTable default_risk_table();

/// Plain-text key/value format with [base_weight] and [group_scale]
/// sections. Mode keys inside [group_scale] are per-mode overrides.
std::string serialize_risk_table(const RiskWeightTable& table);
RiskWeightTable parse_risk_table(std::string_view text);
RiskWeightTable load_risk_table(const std::string& path);
void save_risk_table(const RiskWeightTable& table, const std::string& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace sensorsentry
