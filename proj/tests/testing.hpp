// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file testing.hpp
/// @brief Reference implementations and fixtures shared by the unit tests
/// and the acceptance runner. The references favour directness over speed
/// and do not call into the library code they check.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "sensorsentry/core.hpp"
#include "sensorsentry/rng.hpp"

namespace sensorsentry::testing {

using BigFloat = boost::multiprecision::cpp_bin_float_50;
using Rational = boost::multiprecision::cpp_rational;

/// Product of (1 - s_i)^(w_i * alpha_i) with the published weights written
/// out as decimal literals, evaluated in 50 significant digits.
BigFloat gshi_reference(const std::array<double, kNumModes>& s);

/// Published effective exponent w_i * alpha_i in 50 digits.
BigFloat exponent_reference(DegradationMode m);

/// Average precision as an exact fraction. A positive's rank counts every
/// item with a higher score plus equal scores listed before it.
Rational average_precision_reference(const std::vector<double>& scores,
                                     const std::vector<bool>& labels);

double mean_abs_reference(const std::vector<double>& a, const std::vector<double>& b);
double pearson_reference(const std::vector<double>& x, const std::vector<double>& y);
double spearman_reference(const std::vector<double>& x, const std::vector<double>& y);

/// AUSE by enumerating every removal order consistent with the uncertainty
/// ranking (all permutations inside tie groups) and averaging the retained
/// error. Only for tiny maps.
double ause_reference(const std::vector<double>& uncertainty, const std::vector<double>& error);

struct LeadReference {
  std::optional<double> s_warn;
  std::optional<double> s_fail;
};
LeadReference lead_reference(const std::vector<double>& severities,
                             const std::vector<double>& health,
                             const std::vector<double>& detector, double tau, double delta);

/// Random severity vector with k active modes (k = 0 allowed).
std::array<double, kNumModes> random_severities(RandomStream& rng, int active, double max_s = 1.0);

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes count procedural scenes as dir/images/scene_NNN.png and
/// dir/depth/scene_NNN.png.
void write_scene_set(const std::filesystem::path& dir, int count, int width, int height,
                     std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);

}  // namespace sensorsentry::testing
