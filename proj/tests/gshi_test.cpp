// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/rng.hpp"
#include "testing.hpp"

namespace sensorsentry {
namespace {

using testing::gshi_reference;

double gshi(const std::array<double, kNumModes>& s) {
  return compute_gshi(SeverityVector(s)).value();
}

TEST(Gshi, CleanIsExactlyOne) { EXPECT_EQ(compute_gshi(SeverityVector{}).value(), 1.0); }

TEST(Gshi, SingleFog) {
  std::array<double, kNumModes> s{};
  s[mode_id(DegradationMode::Fog)] = 0.4;
  EXPECT_NEAR(gshi(s), 0.514750320266457, 1e-12);
  EXPECT_EQ(classify_regime(HealthScore(gshi(s))), Regime::Critical);
}

TEST(Gshi, FogWithNoiseUsesTableExponent) {
  std::array<double, kNumModes> s{};
  s[mode_id(DegradationMode::Fog)] = 0.3;
  s[mode_id(DegradationMode::SensorNoise)] = 0.2;
  const double h = gshi(s);
  EXPECT_NEAR(h, static_cast<double>(gshi_reference(s)), 1e-12);
  EXPECT_NEAR(h, std::pow(0.7, 1.3) * std::pow(0.8, 1.045), 1e-14);
  EXPECT_NEAR(h, 0.49815, 1e-5);
}

TEST(Gshi, SaturatedSeverityGivesZero) {
  std::array<double, kNumModes> s{};
  s[mode_id(DegradationMode::Glare)] = 1.0;
  EXPECT_EQ(gshi(s), 0.0);
}

TEST(Gshi, MatchesReferenceOnSingleModeGrid) {
  for (auto m : kAllModes) {
    for (int k = 0; k <= 20; ++k) {
      std::array<double, kNumModes> s{};
      s[mode_id(m)] = k / 20.0;
      EXPECT_NEAR(gshi(s), static_cast<double>(gshi_reference(s)), 1e-12)
          << mode_name(m) << " s=" << s[mode_id(m)];
    }
  }
}

TEST(Gshi, MatchesReferenceOnRandomVectors) {
  RandomStream rng(derive_key(11, {1}));
  for (int n = 0; n < 1000; ++n) {
    const auto s = testing::random_severities(rng, 1 + static_cast<int>(rng.below(kNumModes)));
    ASSERT_NEAR(gshi(s), static_cast<double>(gshi_reference(s)), 1e-12) << "vector " << n;
  }
}

TEST(Gshi, BoundedAndMonotoneUnderBumps) {
  RandomStream rng(derive_key(12, {2}));
  int violations = 0;
  for (int n = 0; n < 10000; ++n) {
    auto s = testing::random_severities(rng, static_cast<int>(rng.below(kNumModes + 1)));
    const double h0 = gshi(s);
    const std::size_t i = rng.below(kNumModes);
    s[i] = std::min(1.0, s[i] + rng.uniform() * (1.0 - s[i]));
    const double h1 = gshi(s);
    if (!(h0 >= 0.0 && h0 <= 1.0 && h1 >= 0.0 && h1 <= 1.0 && h1 <= h0)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Gshi, StrictlyDecreasingInEachMode) {
  for (auto m : kAllModes) {
    double prev = 1.0;
    for (int k = 1; k <= 20; ++k) {
      std::array<double, kNumModes> s{};
      s[mode_id(m)] = k / 20.0;
      const double h = gshi(s);
      EXPECT_LT(h, prev) << mode_name(m);
      prev = h;
    }
  }
}

TEST(Gshi, HonoursCustomTable) {
  RiskWeightTable flat;
  SeverityVector s;
  s.set(DegradationMode::Rain, 0.5);
  s.set(DegradationMode::Snow, 0.5);
  EXPECT_NEAR(compute_gshi(s, flat).value(), 0.25, 1e-15);
}

// Richardson extrapolation of forward differences at h, h/2, h/4, h/8.
double extrapolated_partial(const SeverityVector& s, const RiskWeightTable& table,
                            DegradationMode m, double h) {
  double r[4][4];
  for (int k = 0; k < 4; ++k) {
    const double step = h / (1 << k);
    const double bumped = s[m] + step;
    r[k][0] = gshi_gradient_check(s, table, m, step) / (bumped - s[m]);
    for (int j = 1; j <= k; ++j) {
      r[k][j] = r[k][j - 1] + (r[k][j - 1] - r[k - 1][j - 1]) / ((1 << j) - 1);
    }
  }
  return r[3][3];
}

TEST(GradientCheck, AgreesWithClosedForm) {
  const auto table = default_risk_table();
  RandomStream rng(derive_key(13, {3}));
  for (int n = 0; n < 500; ++n) {
    const auto raw = testing::random_severities(rng, 1 + static_cast<int>(rng.below(4)), 0.9);
    const SeverityVector s(raw);
    const auto m = mode_from_id(rng.below(kNumModes));
    const double h = 1e-3 * (1.0 - s[m]);
    const double analytic =
        -table.effective_exponent(m) * compute_gshi(s, table).value() / (1.0 - s[m]);
    EXPECT_NEAR(extrapolated_partial(s, table, m, h), analytic, 1e-9)
        << mode_name(m) << " s=" << s[m];
    EXPECT_LE(gshi_gradient_check(s, table, m, h), 0.0);
  }
}

TEST(GradientCheck, RejectsBadSteps) {
  SeverityVector s;
  s.set(DegradationMode::Fog, 0.95);
  const auto t = default_risk_table();
  EXPECT_THROW(gshi_gradient_check(s, t, DegradationMode::Fog, 0.0), InvalidArgument);
  EXPECT_THROW(gshi_gradient_check(s, t, DegradationMode::Fog, 0.1), InvalidArgument);
}

TEST(ObjectReliability, TwoByTwoExample) {
  const SpatialMask u(2, 2, std::vector<double>{0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(object_reliability(u, {0, 0, 2, 2}).score, 0.5);
  EXPECT_DOUBLE_EQ(object_reliability(u, {0, 0, 2, 1}).score, 1.0);
  EXPECT_DOUBLE_EQ(object_reliability(u, {1, 1, 2, 2}).score, 0.0);
}

TEST(ObjectReliability, MatchesBruteForce) {
  RandomStream rng(derive_key(14, {4}));
  const int w = 9, h = 7;
  std::vector<double> v(w * h);
  for (double& x : v) x = rng.uniform();
  const SpatialMask u(w, h, v);
  for (int n = 0; n < 200; ++n) {
    const int x0 = static_cast<int>(rng.below(w)), y0 = static_cast<int>(rng.below(h));
    const int x1 = x0 + 1 + static_cast<int>(rng.below(w - x0));
    const int y1 = y0 + 1 + static_cast<int>(rng.below(h - y0));
    long double sum = 0;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) sum += v[y * w + x];
    const double expected = static_cast<double>(1.0L - sum / ((x1 - x0) * (y1 - y0)));
    EXPECT_NEAR(object_reliability(u, {x0, y0, x1, y1}).score, expected, 1e-12);
  }
}

TEST(ObjectReliability, RejectsInvalidBoxes) {
  const SpatialMask u(4, 4, 0.5);
  EXPECT_THROW(object_reliability(u, {1, 1, 1, 3}), InvalidGeometry);
  EXPECT_THROW(object_reliability(u, {0, 0, 5, 2}), InvalidGeometry);
  EXPECT_THROW(object_reliability(u, {-1, 0, 2, 2}), InvalidGeometry);
}

}  // namespace
}  // namespace sensorsentry
