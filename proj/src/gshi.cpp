// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/gshi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensorsentry/error.hpp"

namespace sensorsentry {

HealthScore compute_gshi(const SeverityVector& s, const RiskWeightTable& table) {
  double log_health = 0.0;
  for (auto m : kAllModes) {
    const double si = s[m];
    if (si == 0.0) continue;
    if (si > kSaturatedSeverity) return HealthScore(0.0);
    log_health += table.effective_exponent(m) * std::log1p(-si);
  }
  return HealthScore(std::exp(log_health));
}

ObjectReliability object_reliability(const SpatialMask& uncertainty, const BoundingBox& box) {
  if (!box.valid_within(uncertainty.width(), uncertainty.height())) {
    throw InvalidGeometry("detection box [" + std::to_string(box.x_min) + "," +
                          std::to_string(box.x_max) + ")x[" + std::to_string(box.y_min) + "," +
                          std::to_string(box.y_max) + ") is empty or outside the " +
                          std::to_string(uncertainty.width()) + "x" +
                          std::to_string(uncertainty.height()) + " map");
  }
  double sum = 0.0;
  for (int y = box.y_min; y < box.y_max; ++y) {
    for (int x = box.x_min; x < box.x_max; ++x) sum += uncertainty.at(x, y);
  }
  const double mean = sum / static_cast<double>(box.area());
  return {box, std::clamp(1.0 - mean, 0.0, 1.0)};
}

double gshi_gradient_check(const SeverityVector& s, const RiskWeightTable& table,
                           DegradationMode mode, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("gradient check step must be positive");
  if (s[mode] + eps > 1.0) throw InvalidArgument("gradient check step leaves [0,1]");
  SeverityVector bumped = s;
  bumped.set(mode, s[mode] + eps);
  return compute_gshi(bumped, table).value() - compute_gshi(s, table).value();
}

}  // namespace sensorsentry
