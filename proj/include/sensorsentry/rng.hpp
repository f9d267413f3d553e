// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file rng.hpp
/// @brief Counter-based deterministic random streams.
///
/// Every random quantity is addressed by a key path such as
/// (global_seed, image_index, mode_id, knob_index). The n-th draw of a stream
/// is a pure function of (key, n), so results never depend on thread
/// scheduling or on how many draws other streams consumed. Conversions to
/// real numbers are done here rather than through <random> distributions,
/// whose output is implementation defined.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace sensorsentry {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t child) {
  return mix64(parent ^ mix64(child + 0x9E3779B97F4A7C15ULL));
}

constexpr std::uint64_t derive_key(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix64(root);
  for (auto p : path) k = derive_key(k, p);
  return k;
}

class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t key) : key_(key) {}

  /// Child stream, e.g. one per stochastic knob of an operator.
  constexpr RandomStream substream(std::uint64_t index) const {
    return RandomStream(derive_key(key_, index));
  }

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }
  bool bit() { return (next_u64() >> 63) != 0; }

  /// Standard normal via Box-Muller (both outputs used).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sensorsentry
