// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file gshi.hpp
/// @brief Global Sensor Health Index and object-level reliability pooling.

#pragma once

#include "sensorsentry/core.hpp"
#include "sensorsentry/raster.hpp"

namespace sensorsentry {

/// Severities above this are treated as exactly 1 (health collapses to 0).
inline constexpr double kSaturatedSeverity = 1.0 - 1e-12;

/// H = prod_i (1 - s_i)^(w_i * alpha_g(i)), evaluated as exp(sum e_i log1p(-s_i)).
/// Returns exactly 0 when any severity is saturated.
HealthScore compute_gshi(const SeverityVector& s,
                         const RiskWeightTable& table = default_risk_table());

struct ObjectReliability {
  BoundingBox box;
  double score = 1.0;
};

/// r = 1 - mean of the uncertainty map over the half-open box.
/// Throws InvalidGeometry for empty or out-of-bounds boxes.
ObjectReliability object_reliability(const SpatialMask& uncertainty, const BoundingBox& box);

/// Forward difference GSHI(s + eps e_i) - GSHI(s); never positive.
/// Throws InvalidArgument when eps <= 0 or s_i + eps > 1.
double gshi_gradient_check(const SeverityVector& s, const RiskWeightTable& table,
                           DegradationMode mode, double eps);

}  // namespace sensorsentry
