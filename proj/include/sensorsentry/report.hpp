// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file report.hpp
/// @brief CSV and plain-text rendering of evaluation reports.

#pragma once

#include <filesystem>
#include <string>

#include "sensorsentry/eval.hpp"

namespace sensorsentry {

/// Published full-system figures. They need the trained network, the
/// downstream detector and the original driving datasets, so a desk-scale
/// run is not expected to reproduce them; the summary lists them for context.
struct ReferenceFigures {
  static constexpr double kHealthMae = 0.064;
  static constexpr double kIssueMap = 0.891;
  static constexpr double kAuse = 0.042;
  static constexpr double kMeanLead = 0.47;
  static constexpr double kMeanLeadStd = 0.25;
  static constexpr double kRealWeatherAccuracy = 0.842;
};

std::string format_summary(const EvaluationReport& report, const EvaluationOptions& options);

/// Writes summary.txt, metrics.csv, issue_ap.csv, ause.csv,
/// health_curves.csv and, with detector curves, correlation.csv,
/// lead_time.csv and threshold_sweep.csv.
void write_report(const EvaluationReport& report, const EvaluationOptions& options,
                  const std::filesystem::path& out_dir);

}  // namespace sensorsentry
