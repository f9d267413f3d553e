// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "sensorsentry/error.hpp"

namespace sensorsentry {
namespace {

struct ModeInfo {
  std::string_view name;
  std::string_view label;
};

constexpr std::array<ModeInfo, kNumModes> kModeInfo = {{
    {"fog", "Haze/Fog"},
    {"rain", "Rain"},
    {"snow", "Snow"},
    {"low_light", "Low Light"},
    {"motion_blur", "Motion Blur"},
    {"defocus_blur", "Defocus Blur"},
    {"glare", "Glare/Flare"},
    {"vignetting", "Vignetting"},
    {"sensor_noise", "Sensor Noise"},
    {"exposure_shift", "Exposure Shift"},
    {"jpeg", "JPEG Compression"},
    {"lens_occlusion", "Lens Occlusion"},
}};

constexpr std::array<std::string_view, kNumGroups> kGroupNames = {
    "weather", "illumination", "optical", "motion", "sensor_pipeline", "occlusion"};

std::string normalize_key(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '-' || c == ' ' || c == '/') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

void check_unit(double v, const char* what) {
  if (std::isnan(v) || v < 0.0 || v > 1.0) {
    throw InvalidArgument(std::string(what) + " must lie in [0,1], got " + format_double(v));
  }
}

}  // namespace

std::string_view mode_name(DegradationMode m) { return kModeInfo[mode_id(m)].name; }
std::string_view mode_label(DegradationMode m) { return kModeInfo[mode_id(m)].label; }
std::string_view group_name(ModeGroup g) { return kGroupNames[group_id(g)]; }

std::optional<DegradationMode> parse_mode(std::string_view text) {
  const std::string key = normalize_key(text);
  for (auto m : kAllModes) {
    if (key == mode_name(m)) return m;
  }
  if (key == "haze" || key == "haze_fog") return DegradationMode::Fog;
  if (key == "lowlight" || key == "low") return DegradationMode::LowLight;
  if (key == "motion") return DegradationMode::MotionBlur;
  if (key == "defocus") return DegradationMode::DefocusBlur;
  if (key == "flare" || key == "glare_flare") return DegradationMode::Glare;
  if (key == "vignette") return DegradationMode::Vignetting;
  if (key == "noise") return DegradationMode::SensorNoise;
  if (key == "exposure") return DegradationMode::ExposureShift;
  if (key == "jpeg_compression" || key == "compression") return DegradationMode::JpegCompression;
  if (key == "occlusion") return DegradationMode::LensOcclusion;
  return std::nullopt;
}

std::optional<ModeGroup> parse_group(std::string_view text) {
  const std::string key = normalize_key(text);
  for (auto g : kAllGroups) {
    if (key == group_name(g)) return g;
  }
  return std::nullopt;
}

SeverityVector::SeverityVector(const std::array<double, kNumModes>& values) : values_(values) {
  for (double v : values_) check_unit(v, "severity");
}

SeverityVector SeverityVector::clamped(const std::array<double, kNumModes>& raw) {
  std::array<double, kNumModes> out{};
  for (std::size_t i = 0; i < kNumModes; ++i) {
    if (std::isnan(raw[i])) throw InvalidArgument("severity is NaN");
    out[i] = std::clamp(raw[i], 0.0, 1.0);
    if (out[i] != raw[i]) {
      spdlog::debug("clamped {} severity {} to {}", mode_name(mode_from_id(i)), raw[i], out[i]);
    }
  }
  return SeverityVector(out);
}

void SeverityVector::set(DegradationMode m, double severity) {
  check_unit(severity, "severity");
  values_[mode_id(m)] = severity;
}

bool SeverityVector::all_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

PresenceVector::PresenceVector(const std::array<double, kNumModes>& values) : values_(values) {
  for (double v : values_) check_unit(v, "presence");
}

PresenceVector PresenceVector::from_flags(const std::array<bool, kNumModes>& flags) {
  std::array<double, kNumModes> v{};
  for (std::size_t i = 0; i < kNumModes; ++i) v[i] = flags[i] ? 1.0 : 0.0;
  return PresenceVector(v);
}

void PresenceVector::set(DegradationMode m, double p) {
  check_unit(p, "presence");
  values_[mode_id(m)] = p;
}

HealthScore::HealthScore(double value) {
  if (std::isnan(value)) throw InvalidArgument("health score is NaN");
  value_ = std::clamp(value, 0.0, 1.0);
  if (value_ != value) spdlog::info("clamped health score {} to {}", value, value_);
}

Regime classify_regime(HealthScore h) {
  if (h.value() >= kHealthyThreshold) return Regime::Healthy;
  if (h.value() >= kDegradedThreshold) return Regime::Degraded;
  return Regime::Critical;
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Healthy:
      return "healthy";
    case Regime::Degraded:
      return "degraded";
    case Regime::Critical:
      return "critical";
  }
  return "critical";
}

RiskWeightTable::RiskWeightTable() {
  base_.fill(1.0);
  group_.fill(1.0);
}

double RiskWeightTable::scale_for(DegradationMode m) const {
  const auto& o = override_[mode_id(m)];
  return o ? *o : group_[group_id(group_of(m))];
}

double RiskWeightTable::effective_exponent(DegradationMode m) const {
  return base_[mode_id(m)] * scale_for(m);
}

void RiskWeightTable::set_base_weight(DegradationMode m, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("risk weights must be positive");
  base_[mode_id(m)] = w;
}

void RiskWeightTable::set_group_scale(ModeGroup g, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("group scales must be positive");
  group_[group_id(g)] = alpha;
}

void RiskWeightTable::set_scale_override(DegradationMode m, std::optional<double> alpha) {
  if (alpha && (!(*alpha > 0.0) || !std::isfinite(*alpha))) {
    throw InvalidArgument("group scales must be positive");
  }
  override_[mode_id(m)] = alpha;
}

RiskWeightTable default_risk_table() {
  using M = DegradationMode;
  RiskWeightTable t;
  t.set_base_weight(M::Fog, 1.30);
  t.set_base_weight(M::Rain, 1.10);
  t.set_base_weight(M::Snow, 1.20);
  t.set_base_weight(M::LowLight, 1.30);
  t.set_base_weight(M::MotionBlur, 1.40);
  t.set_base_weight(M::DefocusBlur, 1.40);
  t.set_base_weight(M::Glare, 1.50);
  t.set_base_weight(M::Vignetting, 0.70);
  t.set_base_weight(M::SensorNoise, 1.10);
  t.set_base_weight(M::ExposureShift, 1.00);
  t.set_base_weight(M::JpegCompression, 0.80);
  t.set_base_weight(M::LensOcclusion, 1.60);

  t.set_group_scale(ModeGroup::Weather, 1.00);
  t.set_group_scale(ModeGroup::Illumination, 1.00);
  t.set_group_scale(ModeGroup::Optical, 1.10);
  t.set_group_scale(ModeGroup::Motion, 1.10);
  t.set_group_scale(ModeGroup::SensorPipeline, 0.95);
  t.set_group_scale(ModeGroup::Occlusion, 1.15);
  // Exposure sits in the illumination group but carries the 0.95 scale.
  t.set_scale_override(M::ExposureShift, 0.95);
  return t;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace sensorsentry
