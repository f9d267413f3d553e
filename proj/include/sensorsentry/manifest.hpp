// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file manifest.hpp
/// @brief JSONL records exchanged between generation, monitoring and
/// evaluation.
///
/// Manifest line fields: image_id, source, output, mask, mask_valid,
/// modes [{mode, severity}], presence [12 bools], health_target, regime, seed,
/// and on sweep sets an extra sweep {mode, severity}.
/// Prediction line fields: image_id, presence [12 reals], severities
/// [12 reals], health, uncertainty_path (optional).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sensorsentry/core.hpp"

namespace sensorsentry {

struct ModeSeverity {
  DegradationMode mode = DegradationMode::Fog;
  double severity = 0.0;

  friend bool operator==(const ModeSeverity&, const ModeSeverity&) = default;
};

using Assignment = std::vector<ModeSeverity>;

SeverityVector to_severity_vector(const Assignment& modes);

/// Marks a record produced by a severity sweep: the swept mode and grid
/// severity (the record's modes list is empty at severity 0).
struct SweepTag {
  DegradationMode mode = DegradationMode::Fog;
  double severity = 0.0;
};

struct LabelRecord {
  std::string image_id;
  std::string source;
  std::string output;               // relative to the manifest's directory
  std::optional<std::string> mask;  // present iff mask_valid
  bool mask_valid = false;
  Assignment modes;
  PresenceVector presence;
  HealthScore health_target;
  Regime regime = Regime::Healthy;
  std::uint64_t seed = 0;
  std::optional<SweepTag> sweep;

  SeverityVector severities() const { return to_severity_vector(modes); }
};

std::string to_json_line(const LabelRecord& r);
LabelRecord parse_label_record(std::string_view line);
std::vector<LabelRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(std::span<const LabelRecord> records, const std::filesystem::path& path);

struct PredictionRecord {
  std::string image_id;
  PresenceVector presence;
  SeverityVector severities;
  double health = 1.0;
  std::optional<std::string> uncertainty_path;  // relative to the predictions file
};

std::string to_json_line(const PredictionRecord& r);
PredictionRecord parse_prediction_record(std::string_view line);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path);

}  // namespace sensorsentry
