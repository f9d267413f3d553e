// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sensorsentry/error.hpp"

namespace sensorsentry {
namespace {

namespace fs = std::filesystem;

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string pct(double v) { return fmt::format("{:.1f}%", 100.0 * v); }

std::string lead_status_name(LeadStatus s) {
  switch (s) {
    case LeadStatus::Lead:
      return "lead";
    case LeadStatus::NoFailure:
      return "N/F";
    case LeadStatus::NoWarning:
      return "no_warning";
  }
  return "";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_summary(const EvaluationReport& r, const EvaluationOptions& options) {
  std::ostringstream s;
  s << "SensorSentry evaluation\n";
  s << "Reference figures of the full learned system (not reproducible at desk scale):\n";
  s << fmt::format("  health MAE {:.3f}, issue mAP {:.3f}, AUSE {:.3f}, lead {:.2f} +/- {:.2f}, "
                   "real-weather accuracy {:.1f}%\n",
                   ReferenceFigures::kHealthMae, ReferenceFigures::kIssueMap,
                   ReferenceFigures::kAuse, ReferenceFigures::kMeanLead,
                   ReferenceFigures::kMeanLeadStd, 100.0 * ReferenceFigures::kRealWeatherAccuracy);
  s << "\n";
  s << fmt::format("records evaluated: {} (missing predictions {}, unmatched predictions {})\n",
                   r.matched, r.missing_predictions.size(), r.unmatched_predictions.size());
  s << fmt::format("health MAE: {:.4f}\n", r.health_mae);
  s << "severity MAE (active modes): "
    << (r.severity_mae ? fmt::format("{:.4f}", *r.severity_mae) : std::string("n/a")) << "\n";
  if (r.issue) {
    s << fmt::format("issue mAP: {:.4f}", r.issue->map);
    if (!r.issue->excluded.empty()) {
      s << " (excluded, no positives:";
      for (auto m : r.issue->excluded) s << " " << mode_name(m);
      s << ")";
    }
    s << "\n";
  } else {
    s << "issue mAP: n/a\n";
  }
  bool any_ause = false;
  for (DegradationMode m : kAllModes) {
    const auto& a = r.ause[mode_id(m)];
    if (!a) continue;
    if (!any_ause) s << "AUSE (predicted / constant map):\n";
    any_ause = true;
    s << fmt::format("  {:<16} {:.4f} / {:.4f}  ({} samples)\n", mode_name(m), a->predicted,
                     a->constant, a->samples);
  }
  bool any_sweep = false;
  for (DegradationMode m : kAllModes) {
    const auto& rho = r.health_spearman[mode_id(m)];
    if (!rho) continue;
    if (!any_sweep) s << "Spearman(true severity, mean predicted health):\n";
    any_sweep = true;
    s << fmt::format("  {:<16} {:+.3f}\n", mode_name(m), *rho);
  }
  if (!r.lead_times.empty()) {
    s << fmt::format("early warning (tau_H = {}, delta = {}):\n",
                     format_double(options.warning.tau_h), format_double(options.warning.delta));
    for (std::size_t i = 0; i < r.lead_times.size(); ++i) {
      const auto& lt = r.lead_times[i];
      const auto& cc = r.correlations[i];
      s << fmt::format("  {:<16} pearson {:>7}  lead {}\n", mode_name(lt.mode),
                       cc.pearson ? fmt::format("{:+.3f}", *cc.pearson) : std::string("n/a"),
                       lt.render());
    }
  }
  if (!r.threshold_rows.empty()) {
    s << "threshold sweep:\n";
    for (const auto& row : r.threshold_rows) {
      s << fmt::format("  tau {:.2f}: lead {} +/- {} (sample {}), warning rate {}, trigger rate {}\n",
                       row.tau, row.mean_lead ? fmt::format("{:.3f}", *row.mean_lead) : "n/a",
                       row.std_population ? fmt::format("{:.3f}", *row.std_population) : "n/a",
                       row.std_sample ? fmt::format("{:.3f}", *row.std_sample) : "n/a",
                       row.warning_rate ? pct(*row.warning_rate) : "n/a", pct(row.trigger_rate));
    }
  }
  return s.str();
}

void write_report(const EvaluationReport& r, const EvaluationOptions& options,
                  const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir / "summary.txt", format_summary(r, options));

  {
    std::ostringstream c;
    c << "metric,value\n";
    c << "records," << r.matched << "\n";
    c << "missing_predictions," << r.missing_predictions.size() << "\n";
    c << "unmatched_predictions," << r.unmatched_predictions.size() << "\n";
    c << "health_mae," << format_double(r.health_mae) << "\n";
    c << "severity_mae," << opt(r.severity_mae) << "\n";
    c << "issue_map," << (r.issue ? format_double(r.issue->map) : "") << "\n";
    c << "reference_health_mae," << format_double(ReferenceFigures::kHealthMae) << "\n";
    c << "reference_issue_map," << format_double(ReferenceFigures::kIssueMap) << "\n";
    c << "reference_ause," << format_double(ReferenceFigures::kAuse) << "\n";
    c << "reference_mean_lead," << format_double(ReferenceFigures::kMeanLead) << "\n";
    write_file(out_dir / "metrics.csv", c.str());
  }
  {
    std::ostringstream c;
    c << "mode,ap,positives\n";
    if (r.issue) {
      for (DegradationMode m : kAllModes) {
        c << mode_name(m) << "," << opt(r.issue->per_mode[mode_id(m)]) << ","
          << r.issue->positives[mode_id(m)] << "\n";
      }
    }
    write_file(out_dir / "issue_ap.csv", c.str());
  }
  {
    std::ostringstream c;
    c << "mode,samples,ause_predicted,ause_constant\n";
    for (DegradationMode m : kAllModes) {
      const auto& a = r.ause[mode_id(m)];
      if (!a) continue;
      c << mode_name(m) << "," << a->samples << "," << format_double(a->predicted) << ","
        << format_double(a->constant) << "\n";
    }
    write_file(out_dir / "ause.csv", c.str());
  }
  {
    std::ostringstream c;
    c << "mode,severity,mean_health\n";
    for (const auto& curve : r.health_curves) {
      for (const auto& p : curve.points()) {
        c << mode_name(curve.mode()) << "," << format_double(p.severity) << ","
          << format_double(p.score) << "\n";
      }
    }
    write_file(out_dir / "health_curves.csv", c.str());
  }
  if (!r.lead_times.empty()) {
    std::ostringstream cc, lt;
    cc << "mode,points,pearson,spearman\n";
    for (const auto& c : r.correlations) {
      cc << mode_name(c.mode) << "," << c.points << "," << opt(c.pearson) << ","
         << opt(c.spearman) << "\n";
    }
    lt << "mode,s_warn,s_fail,lead,status\n";
    for (const auto& l : r.lead_times) {
      lt << mode_name(l.mode) << "," << opt(l.s_warn) << "," << opt(l.s_fail) << ","
         << opt(l.lead) << "," << lead_status_name(l.status) << "\n";
    }
    write_file(out_dir / "correlation.csv", cc.str());
    write_file(out_dir / "lead_time.csv", lt.str());
  }
  if (!r.threshold_rows.empty()) {
    std::ostringstream c;
    c << "tau,lead_modes,mean_lead,std_population,std_sample,failure_modes,warning_rate,"
         "trigger_rate\n";
    for (const auto& row : r.threshold_rows) {
      c << format_double(row.tau) << "," << row.lead_modes << "," << opt(row.mean_lead) << ","
        << opt(row.std_population) << "," << opt(row.std_sample) << "," << row.failure_modes
        << "," << opt(row.warning_rate) << "," << format_double(row.trigger_rate) << "\n";
    }
    write_file(out_dir / "threshold_sweep.csv", c.str());
  }
}

}  // namespace sensorsentry
