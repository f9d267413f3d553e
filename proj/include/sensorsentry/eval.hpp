// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file eval.hpp
/// @brief Evaluation protocol: calibration error, multi-label issue mAP,
/// curve correlation, early-warning lead time, threshold sweeps and
/// sparsification (AUSE).

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sensorsentry/core.hpp"
#include "sensorsentry/manifest.hpp"
#include "sensorsentry/raster.hpp"

namespace sensorsentry {

enum class ScoreKind { Health, DetectorMap };

struct CurvePoint {
  double severity = 0.0;
  double score = 0.0;
};

/// Score as a function of severity for one mode. Severities strictly
/// ascending in [0,1], at least two points.
class PerformanceCurve {
 public:
  PerformanceCurve(DegradationMode mode, ScoreKind kind, std::vector<CurvePoint> points);

  DegradationMode mode() const { return mode_; }
  ScoreKind kind() const { return kind_; }
  const std::vector<CurvePoint>& points() const { return points_; }
  std::vector<double> severities() const;
  std::vector<double> scores() const;

 private:
  DegradationMode mode_;
  ScoreKind kind_;
  std::vector<CurvePoint> points_;
};

struct EarlyWarningConfig {
  double tau_h = 0.8;
  double delta = 0.2;

  void validate() const;
};

enum class LeadStatus { Lead, NoFailure, NoWarning };

struct LeadTimeResult {
  DegradationMode mode = DegradationMode::Fog;
  std::optional<double> s_warn;
  std::optional<double> s_fail;
  std::optional<double> lead;  // s_fail - s_warn; negative for a late warning
  LeadStatus status = LeadStatus::NoFailure;

  /// Lead value, "N/F" (detector never failed) or "no warning".
  std::string render() const;
};

double health_mae(std::span<const double> pred, std::span<const double> target);
double health_mae(std::span<const HealthScore> pred, std::span<const HealthScore> target);

/// Mean |pred - target| over cells whose presence flag is set. Throws
/// InvalidArgument when no cell is active.
double severity_mae(std::span<const SeverityVector> pred, std::span<const SeverityVector> target,
                    std::span<const PresenceVector> presence);

/// All-points average precision: mean of precision at the rank of each
/// positive, ranking by descending score with ties in input order. Throws
/// InvalidArgument when there are no positives.
double average_precision(std::span<const double> scores, std::span<const bool> labels);

struct IssueMapResult {
  double map = 0.0;
  std::array<std::optional<double>, kNumModes> per_mode{};
  std::array<std::size_t, kNumModes> positives{};
  std::vector<DegradationMode> excluded;  // modes without positives
};

/// Throws InvalidArgument when no mode has a positive.
IssueMapResult issue_map(std::span<const PresenceVector> scores,
                         std::span<const PresenceVector> targets);

/// Product-moment correlation. Needs >= 3 points and non-zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Warning at the first grid severity with health < tau_h, failure at the
/// first with score < (1 - delta) * score(0). No interpolation.
LeadTimeResult lead_time(const PerformanceCurve& health, const PerformanceCurve& detector,
                         const EarlyWarningConfig& cfg = {});

struct ThresholdRow {
  double tau = 0.0;
  std::size_t lead_modes = 0;
  std::optional<double> mean_lead;
  std::optional<double> std_population;
  std::optional<double> std_sample;  // needs two leads
  std::size_t failure_modes = 0;
  std::optional<double> warning_rate;  // over failure-reaching modes
  double trigger_rate = 0.0;           // over all modes
};

using CurvePair = std::pair<PerformanceCurve, PerformanceCurve>;  // (health, detector)

std::vector<ThresholdRow> threshold_sweep(std::span<const CurvePair> pairs,
                                          std::span<const double> taus,
                                          const EarlyWarningConfig& base = {});

inline constexpr int kSparsificationSteps = 50;

struct SparsificationResult {
  std::vector<double> fractions;  // 0, 0.02, ..., 1
  std::vector<double> predicted;  // retained mean error / max error
  std::vector<double> oracle;
  double ause = 0.0;
  bool constant_uncertainty = false;
};

/// Removes k = floor(f N + 1/2) pixels in descending uncertainty (ties count
/// at their expected value under random order) and in descending true error;
/// both retained-mean curves are divided by the maximum error and the area
/// between them is integrated with the trapezoid rule.
SparsificationResult sparsification(const SpatialMask& uncertainty, const SpatialMask& error);
double ause(const SpatialMask& uncertainty, const SpatialMask& error);

/// Detector curves CSV: mode,severity,map (header line optional).
std::vector<PerformanceCurve> read_detector_curves(const std::filesystem::path& path);

struct AuseSummary {
  std::size_t samples = 0;
  double predicted = 0.0;  // mean AUSE of the supplied uncertainty maps
  double constant = 0.0;   // mean AUSE of a constant map on the same samples
};

struct CurveCorrelation {
  DegradationMode mode = DegradationMode::Fog;
  std::size_t points = 0;
  std::optional<double> pearson;
  std::optional<double> spearman;
};

struct EvaluationOptions {
  EarlyWarningConfig warning;
  std::vector<double> taus{0.7, 0.8, 0.9};
};

struct EvaluationReport {
  std::size_t matched = 0;
  std::vector<std::string> missing_predictions;    // manifest ids without a prediction
  std::vector<std::string> unmatched_predictions;  // prediction ids not in the manifest
  double health_mae = 0.0;
  std::optional<double> severity_mae;
  std::optional<IssueMapResult> issue;
  std::array<std::optional<AuseSummary>, kNumModes> ause{};
  /// Mean predicted health per sweep grid point (sweep records only).
  std::vector<PerformanceCurve> health_curves;
  /// Spearman of mean predicted health against true severity per swept mode.
  std::array<std::optional<double>, kNumModes> health_spearman{};
  std::vector<CurveCorrelation> correlations;
  std::vector<LeadTimeResult> lead_times;
  std::vector<ThresholdRow> threshold_rows;
};

/// Aligns predictions to the manifest by image_id and evaluates the
/// intersection. Image-relative paths resolve against each file's directory.
EvaluationReport evaluate_manifest(const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& predictions_path,
                                   const std::optional<std::filesystem::path>& detector_path,
                                   const EvaluationOptions& options = {});

}  // namespace sensorsentry
