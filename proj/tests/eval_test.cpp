// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/eval.hpp"
#include "sensorsentry/rng.hpp"
#include "testing.hpp"

namespace sensorsentry {
namespace {

using testing::Rational;

double ap(const std::vector<double>& scores, const std::vector<bool>& labels) {
  auto l = std::make_unique<bool[]>(labels.size());
  std::copy(labels.begin(), labels.end(), l.get());
  return average_precision(scores, std::span<const bool>(l.get(), labels.size()));
}

TEST(AveragePrecision, AlternatingExampleIsFiveSixths) {
  const double v = ap({0.9, 0.8, 0.7, 0.6}, {true, false, true, false});
  EXPECT_EQ(v, static_cast<double>(Rational(5, 6)));
  EXPECT_EQ(testing::average_precision_reference({0.9, 0.8, 0.7, 0.6}, {true, false, true, false}),
            Rational(5, 6));
}

TEST(AveragePrecision, MatchesExactReference) {
  RandomStream rng(derive_key(41, {1}));
  for (int t = 0; t < 5000; ++t) {
    const std::size_t n = 1 + rng.below(16);
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(5)) / 4.0;
      labels[i] = rng.bit();
      any = any || labels[i];
    }
    if (!any) labels[rng.below(n)] = true;
    const auto exact = testing::average_precision_reference(scores, labels);
    ASSERT_EQ(ap(scores, labels), static_cast<double>(exact)) << "trial " << t;
  }
}

TEST(AveragePrecision, EdgeCases) {
  EXPECT_EQ(ap({0.1, 0.9}, {true, true}), 1.0);
  EXPECT_EQ(ap({0.5, 0.5}, {false, true}), 0.5);
  EXPECT_THROW(ap({0.3, 0.2}, {false, false}), InvalidArgument);
}

TEST(AveragePrecision, RandomScoresTrackPrevalence) {
  RandomStream rng(derive_key(41, {2}));
  double sum = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(500);
    std::vector<bool> l(500);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.uniform();
      l[i] = i % 5 == 0;
    }
    sum += ap(s, l);
  }
  EXPECT_NEAR(sum / trials, 0.2, 0.02);
}

TEST(IssueMap, ExcludesModesWithoutPositives) {
  std::vector<PresenceVector> scores(4), targets(4);
  const double fog_scores[] = {0.9, 0.8, 0.7, 0.6};
  const bool fog_labels[] = {true, false, true, false};
  for (int i = 0; i < 4; ++i) {
    scores[i].set(DegradationMode::Fog, fog_scores[i]);
    scores[i].set(DegradationMode::Rain, 0.25 * i);
    if (fog_labels[i]) targets[i].set(DegradationMode::Fog, 1.0);
  }
  targets[3].set(DegradationMode::Rain, 1.0);
  const auto r = issue_map(scores, targets);
  EXPECT_EQ(*r.per_mode[mode_id(DegradationMode::Fog)], static_cast<double>(Rational(5, 6)));
  EXPECT_EQ(*r.per_mode[mode_id(DegradationMode::Rain)], 1.0);
  EXPECT_EQ(r.excluded.size(), 10u);
  EXPECT_DOUBLE_EQ(r.map, (5.0 / 6.0 + 1.0) / 2.0);
  EXPECT_EQ(r.positives[mode_id(DegradationMode::Fog)], 2u);

  std::vector<PresenceVector> empty_targets(4);
  EXPECT_THROW(issue_map(scores, empty_targets), InvalidArgument);
}

TEST(Regression, HealthMaeMatchesReference) {
  RandomStream rng(derive_key(42, {1}));
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(16);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    ASSERT_NEAR(health_mae(a, b), testing::mean_abs_reference(a, b), 1e-12);
  }
  const std::vector<HealthScore> p{HealthScore(0.5), HealthScore(1.0)};
  const std::vector<HealthScore> q{HealthScore(0.25), HealthScore(0.5)};
  EXPECT_DOUBLE_EQ(health_mae(p, q), 0.375);
  const std::vector<double> one{0.1};
  EXPECT_THROW(health_mae(one, std::vector<double>{0.1, 0.2}), InvalidArgument);
}

TEST(Regression, SeverityMaeMatchesReference) {
  RandomStream rng(derive_key(42, {2}));
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(3);
    std::vector<SeverityVector> pred, target;
    std::vector<PresenceVector> presence;
    std::vector<double> pa, ta;
    for (std::size_t i = 0; i < n; ++i) {
      pred.emplace_back(testing::random_severities(rng, 12));
      target.emplace_back(testing::random_severities(rng, 2));
      PresenceVector pv;
      for (auto m : kAllModes) {
        if (target.back()[m] > 0.0 || rng.below(8) == 0) {
          pv.set(m, 1.0);
          pa.push_back(pred.back()[m]);
          ta.push_back(target.back()[m]);
        }
      }
      presence.push_back(pv);
    }
    if (pa.empty()) continue;
    ASSERT_NEAR(severity_mae(pred, target, presence), testing::mean_abs_reference(pa, ta), 1e-12);
  }
  std::vector<SeverityVector> one(1);
  std::vector<PresenceVector> none(1);
  EXPECT_THROW(severity_mae(one, one, none), InvalidArgument);
}

TEST(Correlation, PearsonAndSpearmanMatchReference) {
  RandomStream rng(derive_key(43, {1}));
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 3 + rng.below(14);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(6));
      y[i] = rng.uniform() + 0.3 * x[i];
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    ASSERT_NEAR(pearson(x, y), testing::pearson_reference(x, y), 1e-12);
    ASSERT_NEAR(spearman(x, y), testing::spearman_reference(x, y), 1e-12);
  }
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 5, 1, 0}),
                   -1.0);
  EXPECT_THROW(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
               InvalidArgument);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
}

std::vector<double> grid21() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
  return g;
}

PerformanceCurve curve(DegradationMode m, ScoreKind kind, const std::vector<double>& s,
                       const std::vector<double>& v) {
  std::vector<CurvePoint> pts;
  for (std::size_t i = 0; i < s.size(); ++i) pts.push_back({s[i], v[i]});
  return PerformanceCurve(m, kind, pts);
}

TEST(LeadTime, RecoversDesignedCrossings) {
  const auto g = grid21();
  std::vector<double> health, detector;
  for (std::size_t i = 0; i < g.size(); ++i) {
    health.push_back(0.995 - 0.04 * static_cast<double>(i));
    detector.push_back(0.6 - 0.018 * static_cast<double>(i));
  }
  const auto h = curve(DegradationMode::Fog, ScoreKind::Health, g, health);
  const auto d = curve(DegradationMode::Fog, ScoreKind::DetectorMap, g, detector);
  // First grid index below tau: 0.9 -> 3, 0.8 -> 5, 0.7 -> 8; detector fails at 7.
  const std::pair<double, std::size_t> designed[] = {{0.9, 3}, {0.8, 5}, {0.7, 8}};
  for (const auto& [tau, warn_idx] : designed) {
    const auto r = lead_time(h, d, {tau, 0.2});
    ASSERT_EQ(r.status, LeadStatus::Lead);
    EXPECT_EQ(*r.s_warn, g[warn_idx]);
    EXPECT_EQ(*r.s_fail, g[7]);
    EXPECT_EQ(*r.lead, g[7] - g[warn_idx]);
    const auto ref = testing::lead_reference(g, health, detector, tau, 0.2);
    EXPECT_EQ(r.s_warn, ref.s_warn);
    EXPECT_EQ(r.s_fail, ref.s_fail);
  }
  EXPECT_LT(*lead_time(h, d, {0.7, 0.2}).lead, 0.0);
}

TEST(LeadTime, NoFailureRendersNF) {
  const auto g = grid21();
  std::vector<double> health, flat(g.size(), 0.5);
  for (double s : g) health.push_back(1.0 - s);
  const auto r = lead_time(curve(DegradationMode::Rain, ScoreKind::Health, g, health),
                           curve(DegradationMode::Rain, ScoreKind::DetectorMap, g, flat));
  EXPECT_EQ(r.status, LeadStatus::NoFailure);
  EXPECT_FALSE(r.s_fail);
  EXPECT_FALSE(r.lead);
  EXPECT_EQ(r.render(), "N/F");

  std::vector<double> detector;
  for (double s : g) detector.push_back(0.5 * (1.0 - s));
  const auto nw = lead_time(curve(DegradationMode::Rain, ScoreKind::Health, g, flat),
                            curve(DegradationMode::Rain, ScoreKind::DetectorMap, g, detector),
                            {0.4, 0.2});
  EXPECT_EQ(nw.status, LeadStatus::NoWarning);
  EXPECT_EQ(nw.render(), "no warning");
}

TEST(LeadTime, RandomCurvesMatchReference) {
  RandomStream rng(derive_key(44, {1}));
  const auto g = grid21();
  for (int t = 0; t < 300; ++t) {
    std::vector<double> h{1.0}, d{0.4 + 0.5 * rng.uniform()};
    for (std::size_t i = 1; i < g.size(); ++i) {
      h.push_back(h.back() - 0.08 * rng.uniform());
      d.push_back(d.back() - 0.05 * rng.uniform());
    }
    const double tau = 0.6 + 0.35 * rng.uniform();
    const double delta = 0.05 + 0.5 * rng.uniform();
    const auto r = lead_time(curve(DegradationMode::Snow, ScoreKind::Health, g, h),
                             curve(DegradationMode::Snow, ScoreKind::DetectorMap, g, d),
                             {tau, delta});
    const auto ref = testing::lead_reference(g, h, d, tau, delta);
    ASSERT_EQ(r.s_warn, ref.s_warn);
    ASSERT_EQ(r.s_fail, ref.s_fail);
    if (ref.s_warn && ref.s_fail) {
      ASSERT_EQ(*r.lead, *ref.s_fail - *ref.s_warn);
    }
  }
}

TEST(LeadTime, Validation) {
  const auto g = grid21();
  const std::vector<double> v(g.size(), 0.5);
  const auto h = curve(DegradationMode::Fog, ScoreKind::Health, g, v);
  const auto other = curve(DegradationMode::Snow, ScoreKind::DetectorMap, g, v);
  EXPECT_THROW(lead_time(h, other), InvalidArgument);
  EXPECT_THROW(lead_time(h, h, {1.0, 0.2}), InvalidArgument);
  EXPECT_THROW(lead_time(h, h, {0.8, 0.0}), InvalidArgument);
  const auto late = curve(DegradationMode::Fog, ScoreKind::DetectorMap, {0.1, 0.2}, {0.5, 0.4});
  EXPECT_THROW(lead_time(h, late), InvalidArgument);
  EXPECT_THROW(curve(DegradationMode::Fog, ScoreKind::Health, {0.0}, {1.0}), InvalidArgument);
  EXPECT_THROW(curve(DegradationMode::Fog, ScoreKind::Health, {0.5, 0.5}, {1.0, 1.0}),
               InvalidArgument);
}

TEST(ThresholdSweep, AggregatesPerTau) {
  const auto g = grid21();
  std::vector<CurvePair> pairs;
  // Mode A warns at 0.15/0.25/0.4 for tau .9/.8/.7 and fails at 0.35.
  // Mode B warns later and never fails. Mode C fails at 0.1 and never warns.
  std::vector<double> ha, da, hb, db, hc, dc;
  for (double s : g) {
    ha.push_back(s < 0.15 ? 0.95 : s < 0.25 ? 0.85 : s < 0.4 ? 0.75 : 0.5);
    da.push_back(s < 0.35 ? 0.5 : 0.3);
    hb.push_back(s < 0.5 ? 0.95 : 0.65);
    db.push_back(0.5);
    hc.push_back(0.99);
    dc.push_back(s < 0.1 ? 0.5 : 0.1);
  }
  pairs.emplace_back(curve(DegradationMode::Fog, ScoreKind::Health, g, ha),
                     curve(DegradationMode::Fog, ScoreKind::DetectorMap, g, da));
  pairs.emplace_back(curve(DegradationMode::Rain, ScoreKind::Health, g, hb),
                     curve(DegradationMode::Rain, ScoreKind::DetectorMap, g, db));
  pairs.emplace_back(curve(DegradationMode::Snow, ScoreKind::Health, g, hc),
                     curve(DegradationMode::Snow, ScoreKind::DetectorMap, g, dc));
  const std::vector<double> taus{0.7, 0.8, 0.9};
  const auto rows = threshold_sweep(pairs, taus);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.failure_modes, 2u);
    EXPECT_EQ(row.lead_modes, 1u);
    EXPECT_FALSE(row.std_sample);
    EXPECT_EQ(*row.std_population, 0.0);
    EXPECT_DOUBLE_EQ(row.trigger_rate, 2.0 / 3.0);
  }
  EXPECT_DOUBLE_EQ(*rows[0].mean_lead, g[7] - g[8]);
  EXPECT_EQ(*rows[0].warning_rate, 0.0);
  EXPECT_DOUBLE_EQ(*rows[1].mean_lead, g[7] - g[5]);
  EXPECT_EQ(*rows[1].warning_rate, 0.5);
  EXPECT_DOUBLE_EQ(*rows[2].mean_lead, g[7] - g[3]);
  EXPECT_THROW(threshold_sweep({}, taus), InvalidArgument);
}

SpatialMask mask3x3(std::vector<double> v) { return SpatialMask(3, 3, std::move(v)); }

TEST(Sparsification, HandComputedThreeByThree) {
  const std::vector<double> err{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const auto e = mask3x3(err);

  const auto perfect = sparsification(mask3x3(err), e);
  EXPECT_EQ(perfect.fractions.size(), 51u);
  EXPECT_EQ(perfect.predicted, perfect.oracle);
  EXPECT_EQ(perfect.ause, 0.0);
  EXPECT_FALSE(perfect.constant_uncertainty);
  // Nothing removed: mean 0.5 over max 0.9.
  EXPECT_DOUBLE_EQ(perfect.oracle[0], 0.5 / 0.9);
  // f = 0.5 removes floor(4.5 + 0.5) = 5 pixels, leaving 0.1..0.4.
  EXPECT_NEAR(perfect.oracle[25], 0.25 / 0.9, 1e-15);
  EXPECT_EQ(perfect.oracle[50], 0.0);

  std::vector<double> reversed(err.rbegin(), err.rend());
  const auto worst = sparsification(mask3x3(reversed), e);
  EXPECT_NEAR(worst.predicted[25], 0.75 / 0.9, 1e-15);
  EXPECT_GT(worst.ause, 0.0);
  EXPECT_NEAR(worst.ause, testing::ause_reference(reversed, err), 1e-12);
}

TEST(Sparsification, ConstantMapIsRandomOrder) {
  const std::vector<double> err{0.0, 0.2, 0.2, 0.4, 0.5, 0.1, 0.7, 0.3, 0.9};
  const auto r = sparsification(SpatialMask(3, 3, 0.5), mask3x3(err));
  EXPECT_TRUE(r.constant_uncertainty);
  const double mean = std::accumulate(err.begin(), err.end(), 0.0) / 9.0;
  for (int j = 0; j <= 50; ++j) {
    // Everything is removed once floor(9 f + 1/2) reaches 9, from f = 0.96 on.
    const double want = j < 48 ? mean / 0.9 : 0.0;
    EXPECT_NEAR(r.predicted[j], want, 1e-15) << j;
  }
  EXPECT_NEAR(r.ause, testing::ause_reference(std::vector<double>(9, 0.5), err), 1e-12);
}

TEST(Sparsification, MatchesPermutationReference) {
  RandomStream rng(derive_key(45, {1}));
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + static_cast<int>(rng.below(4));
    const int h = 1 + static_cast<int>(rng.below(4));
    std::vector<double> u(w * h), e(w * h);
    for (int i = 0; i < w * h; ++i) {
      u[i] = static_cast<double>(rng.below(7)) / 6.0;
      e[i] = rng.uniform();
    }
    const double got = ause(SpatialMask(w, h, u), SpatialMask(w, h, e));
    ASSERT_NEAR(got, testing::ause_reference(u, e), 1e-12) << "trial " << t;
  }
}

TEST(Sparsification, ZeroErrorAndShapeMismatch) {
  const auto r = sparsification(SpatialMask(2, 2, 0.3), SpatialMask(2, 2, 0.0));
  EXPECT_EQ(r.ause, 0.0);
  EXPECT_THROW(ause(SpatialMask(2, 2, 0.0), SpatialMask(3, 2, 0.0)), DimensionMismatch);
}

TEST(DetectorCurves, ReadCsv) {
  testing::ScratchDir dir("det");
  {
    std::ofstream f(dir.path() / "d.csv");
    f << "mode,severity,map\nfog,0.5,0.4\nfog,0,0.6\nrain,0,0.6\nrain,1,0.2\n";
  }
  const auto curves = read_detector_curves(dir.path() / "d.csv");
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].mode(), DegradationMode::Fog);
  EXPECT_EQ(curves[0].severities(), (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(curves[0].scores(), (std::vector<double>{0.6, 0.4}));
  {
    std::ofstream f(dir.path() / "bad.csv");
    f << "hail,0,0.5\n";
  }
  EXPECT_THROW(read_detector_curves(dir.path() / "bad.csv"), DataError);
  {
    std::ofstream f(dir.path() / "dup.csv");
    f << "fog,0,0.5\nfog,0,0.4\n";
  }
  EXPECT_THROW(read_detector_curves(dir.path() / "dup.csv"), DataError);
}

}  // namespace
}  // namespace sensorsentry
