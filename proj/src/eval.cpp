// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/image_io.hpp"

namespace sensorsentry {
namespace {

namespace fs = std::filesystem;

template <typename A, typename B>
void require_same_length(const A& a, const B& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

std::optional<double> first_below(const PerformanceCurve& c, double threshold) {
  for (const auto& p : c.points()) {
    if (p.score < threshold) return p.severity;
  }
  return std::nullopt;
}

// Retained-error curve: removed(k) gives the summed error of the first k
// removed pixels.
template <typename Removed>
std::vector<double> retained_curve(std::size_t n, double total, double max_error, Removed removed) {
  std::vector<double> out;
  out.reserve(kSparsificationSteps + 1);
  for (int j = 0; j <= kSparsificationSteps; ++j) {
    const auto k = static_cast<std::size_t>(
        std::floor(static_cast<double>(j) * static_cast<double>(n) / kSparsificationSteps + 0.5));
    const std::size_t kept = n - std::min(k, n);
    double mean = 0.0;
    if (kept > 0) mean = std::max(0.0, total - removed(std::min(k, n))) / static_cast<double>(kept);
    out.push_back(max_error > 0.0 ? mean / max_error : 0.0);
  }
  return out;
}

fs::path resolve(const fs::path& base_file, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : base_file.parent_path() / p;
}

}  // namespace

PerformanceCurve::PerformanceCurve(DegradationMode mode, ScoreKind kind,
                                   std::vector<CurvePoint> points)
    : mode_(mode), kind_(kind), points_(std::move(points)) {
  if (points_.size() < 2) throw InvalidArgument("a performance curve needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double s = points_[i].severity;
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("curve severities must lie in [0,1]");
    if (i > 0 && !(s > points_[i - 1].severity)) {
      throw InvalidArgument("curve severities must be strictly ascending");
    }
    if (!std::isfinite(points_[i].score)) throw InvalidArgument("curve scores must be finite");
  }
}

std::vector<double> PerformanceCurve::severities() const {
  std::vector<double> v;
  for (const auto& p : points_) v.push_back(p.severity);
  return v;
}

std::vector<double> PerformanceCurve::scores() const {
  std::vector<double> v;
  for (const auto& p : points_) v.push_back(p.score);
  return v;
}

void EarlyWarningConfig::validate() const {
  if (!(tau_h > 0.0 && tau_h < 1.0)) throw InvalidArgument("tau_h must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
}

std::string LeadTimeResult::render() const {
  switch (status) {
    case LeadStatus::Lead:
      return format_double(*lead);
    case LeadStatus::NoFailure:
      return "N/F";
    case LeadStatus::NoWarning:
      return "no warning";
  }
  return "";
}

double health_mae(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target, "health_mae");
  if (pred.empty()) throw InvalidArgument("health_mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

double health_mae(std::span<const HealthScore> pred, std::span<const HealthScore> target) {
  std::vector<double> p, t;
  for (const auto& h : pred) p.push_back(h.value());
  for (const auto& h : target) t.push_back(h.value());
  return health_mae(p, t);
}

double severity_mae(std::span<const SeverityVector> pred, std::span<const SeverityVector> target,
                    std::span<const PresenceVector> presence) {
  require_same_length(pred, target, "severity_mae");
  require_same_length(pred, presence, "severity_mae");
  double sum = 0.0;
  std::size_t cells = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    for (DegradationMode m : kAllModes) {
      if (!presence[n].active(m)) continue;
      sum += std::abs(pred[n][m] - target[n][m]);
      ++cells;
    }
  }
  if (cells == 0) throw InvalidArgument("severity_mae: no active cells");
  return sum / static_cast<double>(cells);
}

double average_precision(std::span<const double> scores, std::span<const bool> labels) {
  require_same_length(scores, labels, "average_precision");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  long double precision_sum = 0.0L;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    precision_sum += static_cast<long double>(hits) / static_cast<long double>(rank + 1);
  }
  if (hits == 0) throw InvalidArgument("average_precision: no positives");
  return static_cast<double>(precision_sum / static_cast<long double>(hits));
}

IssueMapResult issue_map(std::span<const PresenceVector> scores,
                         std::span<const PresenceVector> targets) {
  require_same_length(scores, targets, "issue_map");
  IssueMapResult r;
  long double sum = 0.0L;
  std::size_t evaluated = 0;
  for (DegradationMode m : kAllModes) {
    const std::size_t n = scores.size();
    std::vector<double> s(n);
    auto labels = std::make_unique<bool[]>(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = scores[i][m];
      labels[i] = targets[i].active(m);
      pos += labels[i];
    }
    r.positives[mode_id(m)] = pos;
    if (pos == 0) {
      r.excluded.push_back(m);
      continue;
    }
    const double ap = average_precision(s, std::span<const bool>(labels.get(), n));
    r.per_mode[mode_id(m)] = ap;
    sum += ap;
    ++evaluated;
  }
  if (evaluated == 0) throw InvalidArgument("issue_map: no mode has a positive sample");
  r.map = static_cast<double>(sum / static_cast<long double>(evaluated));
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "pearson");
  if (x.size() < 3) throw InvalidArgument("pearson: need at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw InvalidArgument("pearson: degenerate variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

LeadTimeResult lead_time(const PerformanceCurve& health, const PerformanceCurve& detector,
                         const EarlyWarningConfig& cfg) {
  cfg.validate();
  if (health.mode() != detector.mode()) throw InvalidArgument("lead_time: curve modes differ");
  if (detector.points().front().severity != 0.0) {
    throw InvalidArgument("lead_time: detector curve lacks the clean point s = 0");
  }
  LeadTimeResult r;
  r.mode = health.mode();
  r.s_warn = first_below(health, cfg.tau_h);
  r.s_fail = first_below(detector, (1.0 - cfg.delta) * detector.points().front().score);
  if (!r.s_fail) {
    r.status = LeadStatus::NoFailure;
  } else if (!r.s_warn) {
    r.status = LeadStatus::NoWarning;
  } else {
    r.status = LeadStatus::Lead;
    r.lead = *r.s_fail - *r.s_warn;
  }
  return r;
}

std::vector<ThresholdRow> threshold_sweep(std::span<const CurvePair> pairs,
                                          std::span<const double> taus,
                                          const EarlyWarningConfig& base) {
  if (pairs.empty() || taus.empty()) throw InvalidArgument("threshold_sweep: empty input");
  std::vector<ThresholdRow> rows;
  for (double tau : taus) {
    EarlyWarningConfig cfg = base;
    cfg.tau_h = tau;
    cfg.validate();
    ThresholdRow row;
    row.tau = tau;
    std::vector<double> leads;
    std::size_t warned_in_time = 0, triggered = 0;
    for (const auto& [health, detector] : pairs) {
      const auto r = lead_time(health, detector, cfg);
      if (r.s_warn) ++triggered;
      if (r.s_fail) {
        ++row.failure_modes;
        if (r.s_warn && *r.s_warn <= *r.s_fail) ++warned_in_time;
      }
      if (r.status == LeadStatus::Lead) leads.push_back(*r.lead);
    }
    row.lead_modes = leads.size();
    if (!leads.empty()) {
      const double n = static_cast<double>(leads.size());
      const double mean = std::accumulate(leads.begin(), leads.end(), 0.0) / n;
      double ss = 0.0;
      for (double l : leads) ss += (l - mean) * (l - mean);
      row.mean_lead = mean;
      row.std_population = std::sqrt(ss / n);
      if (leads.size() > 1) row.std_sample = std::sqrt(ss / (n - 1.0));
    }
    if (row.failure_modes > 0) {
      row.warning_rate = static_cast<double>(warned_in_time) / static_cast<double>(row.failure_modes);
    }
    row.trigger_rate = static_cast<double>(triggered) / static_cast<double>(pairs.size());
    rows.push_back(row);
  }
  return rows;
}

SparsificationResult sparsification(const SpatialMask& uncertainty, const SpatialMask& error) {
  if (!uncertainty.same_shape(error)) throw DimensionMismatch("uncertainty and error maps differ in shape");
  const auto u = uncertainty.values();
  const auto e = error.values();
  const std::size_t n = e.size();
  SparsificationResult r;
  for (int j = 0; j <= kSparsificationSteps; ++j) {
    r.fractions.push_back(static_cast<double>(j) / kSparsificationSteps);
  }
  r.constant_uncertainty = std::all_of(u.begin(), u.end(), [&](double v) { return v == u[0]; });
  if (r.constant_uncertainty) spdlog::debug("sparsification: constant uncertainty map");

  const double total = std::accumulate(e.begin(), e.end(), 0.0);
  const double max_error = *std::max_element(e.begin(), e.end());

  // Oracle: largest errors first.
  std::vector<double> sorted_err(e.begin(), e.end());
  std::sort(sorted_err.begin(), sorted_err.end(), std::greater<>());
  std::vector<double> oracle_prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) oracle_prefix[i + 1] = oracle_prefix[i] + sorted_err[i];
  r.oracle = retained_curve(n, total, max_error, [&](std::size_t k) { return oracle_prefix[k]; });

  // Predicted: groups of equal uncertainty in descending order; a partly
  // removed group contributes its mean error per removed pixel.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
  struct Group {
    std::size_t start;
    std::size_t size;
    double sum;
  };
  std::vector<Group> groups;
  std::vector<double> group_prefix{0.0};
  for (std::size_t i = 0; i < n;) {
    Group g{i, 0, 0.0};
    std::size_t j = i;
    while (j < n && u[idx[j]] == u[idx[i]]) {
      g.sum += e[idx[j]];
      ++j;
    }
    g.size = j - i;
    groups.push_back(g);
    group_prefix.push_back(group_prefix.back() + g.sum);
    i = j;
  }
  auto removed = [&](std::size_t k) {
    if (k == 0) return 0.0;
    if (k >= n) return total;
    // Group containing position k-1.
    const auto it = std::upper_bound(groups.begin(), groups.end(), k - 1,
                                     [](std::size_t pos, const Group& g) { return pos < g.start; });
    const std::size_t gi = static_cast<std::size_t>(it - groups.begin()) - 1;
    const Group& g = groups[gi];
    const double partial = static_cast<double>(k - g.start) / static_cast<double>(g.size);
    return group_prefix[gi] + partial * g.sum;
  };
  r.predicted = retained_curve(n, total, max_error, removed);

  double area = 0.0;
  for (int j = 0; j < kSparsificationSteps; ++j) {
    const double d0 = r.predicted[j] - r.oracle[j];
    const double d1 = r.predicted[j + 1] - r.oracle[j + 1];
    area += 0.5 * (d0 + d1) * (r.fractions[j + 1] - r.fractions[j]);
  }
  r.ause = area;
  return r;
}

double ause(const SpatialMask& uncertainty, const SpatialMask& error) {
  return sparsification(uncertainty, error).ause;
}

std::vector<PerformanceCurve> read_detector_curves(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::size_t, std::vector<CurvePoint>> by_mode;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (f.size() != 3) throw DataError(where + "expected mode,severity,map");
    if (line_no == 1 && f[0] == "mode") continue;
    const auto m = parse_mode(f[0]);
    if (!m) throw DataError(where + "unknown mode '" + f[0] + "'");
    by_mode[mode_id(*m)].push_back({parse_double(f[1]), parse_double(f[2])});
  }
  std::vector<PerformanceCurve> out;
  for (auto& [id, pts] : by_mode) {
    std::sort(pts.begin(), pts.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.severity < b.severity; });
    try {
      out.emplace_back(mode_from_id(id), ScoreKind::DetectorMap, std::move(pts));
    } catch (const InvalidArgument& e) {
      throw DataError(path.string() + ": " + std::string(mode_name(mode_from_id(id))) + ": " + e.what());
    }
  }
  return out;
}

EvaluationReport evaluate_manifest(const fs::path& manifest_path, const fs::path& predictions_path,
                                   const std::optional<fs::path>& detector_path,
                                   const EvaluationOptions& options) {
  options.warning.validate();
  const auto records = read_manifest(manifest_path);
  const auto predictions = read_predictions(predictions_path);
  EvaluationReport rep;

  std::unordered_map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < predictions.size(); ++i) pred_index[predictions[i].image_id] = i;
  std::unordered_map<std::string, bool> in_manifest;
  for (const auto& r : records) in_manifest[r.image_id] = true;
  for (const auto& p : predictions) {
    if (!in_manifest.count(p.image_id)) rep.unmatched_predictions.push_back(p.image_id);
  }

  std::vector<const LabelRecord*> recs;
  std::vector<const PredictionRecord*> preds;
  for (const auto& r : records) {
    const auto it = pred_index.find(r.image_id);
    if (it == pred_index.end()) {
      rep.missing_predictions.push_back(r.image_id);
      continue;
    }
    recs.push_back(&r);
    preds.push_back(&predictions[it->second]);
  }
  if (!rep.missing_predictions.empty() || !rep.unmatched_predictions.empty()) {
    spdlog::warn("{} manifest records lack predictions, {} predictions lack records",
                 rep.missing_predictions.size(), rep.unmatched_predictions.size());
  }
  rep.matched = recs.size();
  if (recs.empty()) throw DataError("no predictions match the manifest");

  std::vector<double> hp, ht;
  std::vector<SeverityVector> sp, st;
  std::vector<PresenceVector> pp, pt;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    hp.push_back(preds[i]->health);
    ht.push_back(recs[i]->health_target.value());
    sp.push_back(preds[i]->severities);
    st.push_back(recs[i]->severities());
    pp.push_back(preds[i]->presence);
    pt.push_back(recs[i]->presence);
  }
  rep.health_mae = health_mae(hp, ht);
  try {
    rep.severity_mae = severity_mae(sp, st, pt);
  } catch (const InvalidArgument&) {
    spdlog::info("severity MAE undefined: no active modes among matched records");
  }
  try {
    rep.issue = issue_map(pp, pt);
  } catch (const InvalidArgument&) {
    spdlog::info("issue mAP undefined: no positive labels among matched records");
  }

  // Sparsification per spatial mode over mask-valid samples.
  std::array<AuseSummary, kNumModes> ause_acc{};
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = *recs[i];
    if (!r.mask_valid || !r.mask || !preds[i]->uncertainty_path) continue;
    const SpatialMask err = read_mask_png(resolve(manifest_path, *r.mask));
    const SpatialMask unc = read_mask_png(resolve(predictions_path, *preds[i]->uncertainty_path));
    const double a_pred = ause(unc, err);
    const double a_const = ause(SpatialMask(err.width(), err.height(), 0.5), err);
    for (const auto& ms : r.modes) {
      if (!has_spatial_footprint(ms.mode)) continue;
      auto& acc = ause_acc[mode_id(ms.mode)];
      ++acc.samples;
      acc.predicted += a_pred;
      acc.constant += a_const;
    }
  }
  for (std::size_t m = 0; m < kNumModes; ++m) {
    if (ause_acc[m].samples == 0) continue;
    AuseSummary s = ause_acc[m];
    s.predicted /= static_cast<double>(s.samples);
    s.constant /= static_cast<double>(s.samples);
    rep.ause[m] = s;
  }

  // Sweep curves: mean predicted health per (mode, grid severity).
  std::array<std::map<double, std::pair<double, std::size_t>>, kNumModes> sweep_acc;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!recs[i]->sweep) continue;
    auto& cell = sweep_acc[mode_id(recs[i]->sweep->mode)][recs[i]->sweep->severity];
    cell.first += preds[i]->health;
    ++cell.second;
  }
  for (DegradationMode m : kAllModes) {
    const auto& acc = sweep_acc[mode_id(m)];
    if (acc.size() < 2) continue;
    std::vector<CurvePoint> pts;
    for (const auto& [s, v] : acc) pts.push_back({s, v.first / static_cast<double>(v.second)});
    rep.health_curves.emplace_back(m, ScoreKind::Health, pts);
    const auto& c = rep.health_curves.back();
    if (pts.size() >= 3) {
      try {
        rep.health_spearman[mode_id(m)] = spearman(c.severities(), c.scores());
      } catch (const InvalidArgument&) {
        spdlog::info("{}: predicted health is constant across the sweep", mode_name(m));
      }
    }
  }

  if (detector_path) {
    const auto detectors = read_detector_curves(*detector_path);
    std::vector<CurvePair> pairs;
    for (const auto& det : detectors) {
      const auto hc = std::find_if(rep.health_curves.begin(), rep.health_curves.end(),
                                   [&](const PerformanceCurve& c) { return c.mode() == det.mode(); });
      if (hc == rep.health_curves.end()) {
        spdlog::warn("{}: detector curve has no matching sweep in the manifest", mode_name(det.mode()));
        continue;
      }
      CurveCorrelation cc;
      cc.mode = det.mode();
      std::vector<double> hx, dy;
      for (const auto& hp_pt : hc->points()) {
        for (const auto& dp : det.points()) {
          if (std::abs(hp_pt.severity - dp.severity) < 1e-9) {
            hx.push_back(hp_pt.score);
            dy.push_back(dp.score);
          }
        }
      }
      cc.points = hx.size();
      try {
        cc.pearson = pearson(hx, dy);
        cc.spearman = spearman(hx, dy);
      } catch (const InvalidArgument& e) {
        spdlog::info("{}: correlation undefined ({})", mode_name(det.mode()), e.what());
      }
      rep.correlations.push_back(cc);
      rep.lead_times.push_back(lead_time(*hc, det, options.warning));
      pairs.emplace_back(*hc, det);
    }
    if (!pairs.empty() && !options.taus.empty()) {
      rep.threshold_rows = threshold_sweep(pairs, options.taus, options.warning);
    }
  }
  return rep;
}

}  // namespace sensorsentry
