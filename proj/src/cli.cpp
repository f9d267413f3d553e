// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/eval.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/image_io.hpp"
#include "sensorsentry/labelgen.hpp"
#include "sensorsentry/manifest.hpp"
#include "sensorsentry/monitor.hpp"
#include "sensorsentry/report.hpp"
#include "sensorsentry/rng.hpp"
#include "sensorsentry/synthesis.hpp"

namespace sensorsentry::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct UsageError : Error {
  using Error::Error;
};

void install_logger() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("sensorsentry");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
  });
}

std::uint64_t default_seed() {
  const char* env = std::getenv("SENSORSENTRY_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t v = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError(std::string("SENSORSENTRY_SEED is not an unsigned integer: ") + env);
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    return parse_double(text);
  } catch (const DataError&) {
    throw UsageError(what + ": not a number: '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& t : split(text, ',')) out.push_back(parse_number(t, what));
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

DegradationMode parse_mode_arg(const std::string& text) {
  const auto m = parse_mode(text);
  if (!m) throw UsageError("unknown degradation mode '" + text + "'");
  return *m;
}

std::vector<DegradationMode> parse_modes(const std::string& text) {
  if (text == "all") return {kAllModes.begin(), kAllModes.end()};
  std::vector<DegradationMode> out;
  for (const auto& t : split(text, ',')) out.push_back(parse_mode_arg(t));
  if (out.empty()) throw UsageError("--mode: empty list");
  return out;
}

SeverityVector parse_severities(const std::string& text) {
  std::array<double, kNumModes> v{};
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--severities expects mode=value pairs");
    const auto m = parse_mode_arg(item.substr(0, eq));
    v[mode_id(m)] = parse_number(item.substr(eq + 1), "--severities");
  }
  try {
    return SeverityVector(v);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--severities: ") + e.what());
  }
}

SeverityMapping load_mapping(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_severity_mapping(ss.str());
}

RiskWeightTable load_table(const std::string& path) {
  return path.empty() ? default_risk_table() : load_risk_table(path);
}

void write_config(const ordered_json& cfg, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << cfg.dump(2) << "\n";
}

ordered_json severities_json(const SeverityVector& s) {
  ordered_json j = ordered_json::object();
  for (DegradationMode m : kAllModes) j[std::string(mode_name(m))] = s[m];
  return j;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

// ---- options -------------------------------------------------------------

struct Common {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string mapping;
  std::string table;
};

struct DegradeOpts {
  std::string image, depth, mode, out, mask;
  double severity = 0.0;
};

struct GenOpts {
  std::string src, depth, out;
  double clean_frac = 0.15;
  double two_mode_frac = 0.25;
  std::size_t count = 0;
};

struct SweepOpts {
  std::string src, depth, image, out, modes = "all", grid;
};

struct ScoreOpts {
  std::string severities;
};

struct MonitorOpts {
  std::string calib, image, uncertainty;
};

struct CalibrateOpts {
  std::string src, depth, out, grid;
  double clean_quantile = 0.9;
};

struct PredictOpts {
  std::string manifest, calib, out;
  bool no_uncertainty = false;
};

struct EvaluateOpts {
  std::string manifest, pred, detector, out;
  double tau = 0.8;
  double delta = 0.2;
  std::string tau_sweep = "0.7,0.8,0.9";
};

// ---- subcommands ---------------------------------------------------------

int cmd_degrade(const Common& c, const DegradeOpts& o, std::ostream& out) {
  const DegradationMode mode = parse_mode_arg(o.mode);
  if (!(o.severity >= 0.0 && o.severity <= 1.0)) throw UsageError("--severity must lie in [0,1]");
  const SeverityMapping mapping = load_mapping(c.mapping);
  const ImageBuffer img = read_image(o.image);
  std::optional<DepthMap> depth;
  if (!o.depth.empty()) depth = read_depth(o.depth);
  const std::uint64_t stream = mode_stream(record_seed(c.seed, 0), mode);
  const SynthesisResult r = apply(img, depth, DegradationParams{mode, o.severity, stream}, mapping);
  write_image(r.image, o.out);
  if (!o.mask.empty() && r.mask) write_mask_png(*r.mask, o.mask);

  ordered_json cfg;
  cfg["subcommand"] = "degrade";
  cfg["image"] = o.image;
  cfg["depth"] = o.depth.empty() ? ordered_json(nullptr) : ordered_json(o.depth);
  cfg["mode"] = mode_name(mode);
  cfg["severity"] = o.severity;
  cfg["seed"] = c.seed;
  cfg["rng_stream"] = stream;
  cfg["out"] = o.out;
  cfg["mask"] = o.mask.empty() ? ordered_json(nullptr) : ordered_json(o.mask);
  cfg["mapping"] = serialize_severity_mapping(mapping);
  write_config(cfg, o.out + ".config.json");

  ordered_json rec;
  rec["output"] = o.out;
  rec["mode"] = mode_name(mode);
  rec["severity"] = o.severity;
  rec["mask_valid"] = r.mask_valid;
  ordered_json knobs = ordered_json::object();
  for (const auto& [k, v] : r.knobs) knobs[k] = v;
  rec["knobs"] = knobs;
  out << rec.dump() << "\n";
  return kExitOk;
}

int cmd_gen(const Common& c, const GenOpts& o, std::ostream& out) {
  GenerateOptions g;
  g.policy.clean_fraction = o.clean_frac;
  g.policy.two_mode_fraction = o.two_mode_frac;
  g.policy.global_seed = c.seed;
  try {
    g.policy.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  g.count = o.count;
  g.jobs = c.jobs;
  g.mapping = load_mapping(c.mapping);
  const auto sources = discover_sources(o.src, opt_path(o.depth));

  ordered_json cfg;
  cfg["subcommand"] = "gen-dataset";
  cfg["src"] = o.src;
  cfg["depth"] = o.depth.empty() ? ordered_json(nullptr) : ordered_json(o.depth);
  cfg["out"] = o.out;
  cfg["seed"] = c.seed;
  cfg["clean_fraction"] = g.policy.clean_fraction;
  cfg["two_mode_fraction"] = g.policy.two_mode_fraction;
  cfg["count"] = o.count == 0 ? sources.size() : o.count;
  cfg["sources"] = sources.size();
  cfg["mapping"] = serialize_severity_mapping(g.mapping);
  write_config(cfg, fs::path(o.out) / "run_config.json");

  const auto res = generate_dataset(sources, o.out, g);
  out << fmt::format("generated {} records ({} reused, {} errors) in {}\n", res.records.size(),
                     res.reused, res.errors.size(), o.out);
  return kExitOk;
}

int cmd_sweep(const Common& c, const SweepOpts& o, std::ostream& out) {
  if (o.src.empty() == o.image.empty()) throw UsageError("sweep needs exactly one of --src or --image");
  SweepOptions s;
  s.modes = parse_modes(o.modes);
  if (!o.grid.empty()) s.grid = parse_list(o.grid, "--grid");
  s.seed = c.seed;
  s.jobs = c.jobs;
  s.mapping = load_mapping(c.mapping);
  std::vector<SourcePair> sources;
  if (!o.image.empty()) {
    sources.push_back({o.image, opt_path(o.depth)});
  } else {
    sources = discover_sources(o.src, opt_path(o.depth));
  }

  ordered_json cfg;
  cfg["subcommand"] = "sweep";
  cfg["src"] = o.src.empty() ? ordered_json(nullptr) : ordered_json(o.src);
  cfg["image"] = o.image.empty() ? ordered_json(nullptr) : ordered_json(o.image);
  cfg["depth"] = o.depth.empty() ? ordered_json(nullptr) : ordered_json(o.depth);
  cfg["out"] = o.out;
  cfg["seed"] = c.seed;
  ordered_json modes = ordered_json::array();
  for (auto m : s.modes) modes.push_back(mode_name(m));
  cfg["modes"] = modes;
  cfg["grid"] = s.grid;
  cfg["mapping"] = serialize_severity_mapping(s.mapping);
  write_config(cfg, fs::path(o.out) / "run_config.json");

  GenerationResult res;
  try {
    res = generate_sweep_set(sources, o.out, s);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  out << fmt::format("wrote {} sweep records ({} errors) in {}\n", res.records.size(),
                     res.errors.size(), o.out);
  return kExitOk;
}

int cmd_score(const Common& c, const ScoreOpts& o, std::ostream& out) {
  const SeverityVector s = parse_severities(o.severities);
  const RiskWeightTable table = load_table(c.table);
  const HealthScore h = compute_gshi(s, table);
  ordered_json cfg;
  cfg["subcommand"] = "score";
  cfg["severities"] = severities_json(s);
  cfg["table"] = c.table.empty() ? ordered_json("default") : ordered_json(c.table);
  spdlog::info("config {}", cfg.dump());
  ordered_json rec;
  rec["health"] = h.value();
  rec["regime"] = regime_name(classify_regime(h));
  out << rec.dump() << "\n";
  return kExitOk;
}

ordered_json monitor_json(const MonitorOutput& m) {
  ordered_json j;
  j["presence"] = m.presence.values();
  j["severities"] = severities_json(m.severities);
  j["health"] = m.health.value();
  j["regime"] = regime_name(classify_regime(m.health));
  return j;
}

int cmd_monitor(const Common& c, const MonitorOpts& o, std::ostream& out) {
  const CalibrationTable calib = CalibrationTable::load(o.calib);
  const RiskWeightTable table = load_table(c.table);
  const ImageBuffer img = read_image(o.image);
  const MonitorOutput m = estimate(img, calib, table);
  ordered_json cfg;
  cfg["subcommand"] = "monitor";
  cfg["calib"] = o.calib;
  cfg["image"] = o.image;
  cfg["table"] = c.table.empty() ? ordered_json("default") : ordered_json(c.table);
  cfg["uncertainty"] = o.uncertainty.empty() ? ordered_json(nullptr) : ordered_json(o.uncertainty);
  spdlog::info("config {}", cfg.dump());
  ordered_json rec;
  rec["image"] = o.image;
  const ordered_json fields = monitor_json(m);
  for (const auto& [k, v] : fields.items()) rec[k] = v;
  if (!o.uncertainty.empty()) {
    write_mask_png(m.uncertainty, o.uncertainty);
    rec["uncertainty_path"] = o.uncertainty;
  }
  out << rec.dump() << "\n";
  return kExitOk;
}

int cmd_calibrate(const Common& c, const CalibrateOpts& o, std::ostream& out) {
  const auto sources = discover_sources(o.src, opt_path(o.depth));
  std::vector<CalibrationImage> images;
  for (const auto& s : sources) {
    CalibrationImage ci{read_image(s.image), std::nullopt};
    if (s.depth) ci.depth = read_depth(*s.depth);
    images.push_back(std::move(ci));
  }
  CalibrationOptions opts;
  if (!o.grid.empty()) opts.grid = parse_list(o.grid, "--grid");
  opts.clean_quantile = o.clean_quantile;
  opts.jobs = c.jobs;
  opts.mapping = load_mapping(c.mapping);

  ordered_json cfg;
  cfg["subcommand"] = "calibrate";
  cfg["src"] = o.src;
  cfg["depth"] = o.depth.empty() ? ordered_json(nullptr) : ordered_json(o.depth);
  cfg["out"] = o.out;
  cfg["seed"] = c.seed;
  cfg["images"] = images.size();
  cfg["grid"] = opts.grid.empty() ? default_severity_grid() : opts.grid;
  cfg["clean_quantile"] = opts.clean_quantile;
  cfg["mapping"] = serialize_severity_mapping(opts.mapping);
  write_config(cfg, o.out + ".config.json");

  const CalibrationTable t = calibrate(images, c.seed, opts);
  t.save(o.out);
  out << fmt::format("calibrated on {} images, table written to {}\n", images.size(), o.out);
  return kExitOk;
}

int cmd_predict(const Common& c, const PredictOpts& o, std::ostream& out) {
  const CalibrationTable calib = CalibrationTable::load(o.calib);
  const RiskWeightTable table = load_table(c.table);
  const auto records = read_manifest(o.manifest);
  const fs::path out_path(o.out);
  const fs::path out_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  const fs::path manifest_dir = fs::path(o.manifest).has_parent_path()
                                    ? fs::path(o.manifest).parent_path()
                                    : fs::path(".");
  if (!o.no_uncertainty) fs::create_directories(out_dir / "uncertainty");

  ordered_json cfg;
  cfg["subcommand"] = "predict-manifest";
  cfg["manifest"] = o.manifest;
  cfg["calib"] = o.calib;
  cfg["out"] = o.out;
  cfg["table"] = c.table.empty() ? ordered_json("default") : ordered_json(c.table);
  cfg["uncertainty_maps"] = !o.no_uncertainty;
  write_config(cfg, o.out + ".config.json");

  std::vector<PredictionRecord> preds(records.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        const auto& r = records[i];
        const fs::path img_path =
            fs::path(r.output).is_absolute() ? fs::path(r.output) : manifest_dir / r.output;
        const MonitorOutput m = estimate(read_image(img_path), calib, table);
        PredictionRecord p;
        p.image_id = r.image_id;
        p.presence = m.presence;
        p.severities = m.severities;
        p.health = m.health.value();
        if (!o.no_uncertainty) {
          const std::string rel = "uncertainty/" + r.image_id + ".png";
          write_mask_png(m.uncertainty, out_dir / rel);
          p.uncertainty_path = rel;
        }
        preds[i] = std::move(p);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(records.size());
        return;
      }
    }
  };
  if (c.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < c.jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  write_predictions(preds, out_path);
  out << fmt::format("wrote {} predictions to {}\n", preds.size(), o.out);
  return kExitOk;
}

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  EvaluationOptions opts;
  opts.warning.tau_h = o.tau;
  opts.warning.delta = o.delta;
  opts.taus = parse_list(o.tau_sweep, "--tau-sweep");
  try {
    opts.warning.validate();
    for (double t : opts.taus) {
      if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("--tau-sweep values must lie in (0,1)");
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  ordered_json cfg;
  cfg["subcommand"] = "evaluate";
  cfg["manifest"] = o.manifest;
  cfg["pred"] = o.pred;
  cfg["detector"] = o.detector.empty() ? ordered_json(nullptr) : ordered_json(o.detector);
  cfg["tau"] = o.tau;
  cfg["delta"] = o.delta;
  cfg["tau_sweep"] = opts.taus;
  cfg["out"] = o.out;
  write_config(cfg, fs::path(o.out) / "run_config.json");

  const auto rep = evaluate_manifest(o.manifest, o.pred, opt_path(o.detector), opts);
  write_report(rep, opts, o.out);
  out << format_summary(rep, opts);
  return kExitOk;
}

int cmd_show_table(const Common& c, std::ostream& out) {
  const RiskWeightTable t = load_table(c.table);
  out << fmt::format("{:>2}  {:<22} {:<16} {:>6} {:>6} {:>7}\n", "id", "mode", "group", "w",
                     "alpha", "w*alpha");
  for (DegradationMode m : kAllModes) {
    out << fmt::format("{:>2}  {:<22} {:<16} {:>6.2f} {:>6.2f} {:>7.3f}\n", mode_id(m),
                       mode_label(m), group_name(group_of(m)), t.base_weight(m), t.scale_for(m),
                       t.effective_exponent(m));
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  install_logger();
  Common common;
  try {
    common.seed = default_seed();
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"Camera health monitoring: degradation synthesis, health scoring and evaluation",
               "sensorsentry"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Global seed (default from SENSORSENTRY_SEED or 0)")
        ->capture_default_str();
  };
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_mapping = [&](CLI::App* sub) {
    sub->add_option("--mapping", common.mapping, "Severity mapping override file (key = value)");
  };
  auto add_table = [&](CLI::App* sub) {
    sub->add_option("--table", common.table, "Risk-weight table override file");
  };

  DegradeOpts degrade;
  auto* s_degrade = app.add_subcommand("degrade", "Apply one degradation mode to an image");
  s_degrade->add_option("--image", degrade.image, "Input image (PNG or PPM)")->required();
  s_degrade->add_option("--depth", degrade.depth, "Depth map (needed for fog and defocus)");
  s_degrade->add_option("--mode", degrade.mode, "Degradation mode")->required();
  s_degrade->add_option("--severity", degrade.severity, "Severity in [0,1]")->required();
  s_degrade->add_option("--out", degrade.out, "Output image path")->required();
  s_degrade->add_option("--mask", degrade.mask, "Output mask path (spatial modes)");
  add_seed(s_degrade);
  add_mapping(s_degrade);

  GenOpts gen;
  auto* s_gen = app.add_subcommand("gen-dataset", "Generate a labelled degradation dataset");
  s_gen->add_option("--src", gen.src, "Directory of clean images")->required();
  s_gen->add_option("--depth", gen.depth, "Directory of depth maps (same stems)");
  s_gen->add_option("--out", gen.out, "Output directory")->required();
  s_gen->add_option("--clean-frac", gen.clean_frac, "Fraction of clean images")->capture_default_str();
  s_gen->add_option("--two-mode-frac", gen.two_mode_frac, "Fraction of degraded images with two modes")
      ->capture_default_str();
  s_gen->add_option("--count", gen.count, "Number of records (default: one per source)");
  add_seed(s_gen);
  add_jobs(s_gen);
  add_mapping(s_gen);

  SweepOpts sweep;
  auto* s_sweep = app.add_subcommand("sweep", "Render severity sweeps");
  s_sweep->add_option("--src", sweep.src, "Directory of clean images");
  s_sweep->add_option("--image", sweep.image, "Single clean image");
  s_sweep->add_option("--depth", sweep.depth, "Depth directory (with --src) or file (with --image)");
  s_sweep->add_option("--out", sweep.out, "Output directory")->required();
  s_sweep->add_option("--mode", sweep.modes, "Comma-separated modes or 'all'")->capture_default_str();
  s_sweep->add_option("--grid", sweep.grid, "Comma-separated ascending severities (default 0,0.1,...,1)");
  add_seed(s_sweep);
  add_jobs(s_sweep);
  add_mapping(s_sweep);

  ScoreOpts score;
  auto* s_score = app.add_subcommand("score", "Health index of a severity vector");
  s_score->add_option("--severities", score.severities, "mode=value pairs, comma-separated")
      ->required();
  add_table(s_score);

  MonitorOpts monitor;
  auto* s_monitor = app.add_subcommand("monitor", "Run the heuristic monitor on one image");
  s_monitor->add_option("--calib", monitor.calib, "Calibration table")->required();
  s_monitor->add_option("--image", monitor.image, "Image to assess")->required();
  s_monitor->add_option("--uncertainty", monitor.uncertainty, "Write the uncertainty map (PNG)");
  add_table(s_monitor);

  CalibrateOpts calib;
  auto* s_calib = app.add_subcommand("calibrate", "Fit the heuristic monitor on clean images");
  s_calib->add_option("--src", calib.src, "Directory of clean images (at least 10)")->required();
  s_calib->add_option("--depth", calib.depth, "Directory of depth maps (same stems)");
  s_calib->add_option("--out", calib.out, "Output calibration table")->required();
  s_calib->add_option("--grid", calib.grid, "Comma-separated ascending severities");
  s_calib->add_option("--clean-quantile", calib.clean_quantile,
                      "Quantile of clean statistics mapped to zero severity")
      ->capture_default_str();
  add_seed(s_calib);
  add_jobs(s_calib);
  add_mapping(s_calib);

  PredictOpts predict;
  auto* s_predict = app.add_subcommand("predict-manifest", "Run the monitor over a manifest");
  s_predict->add_option("--manifest", predict.manifest, "Manifest JSONL")->required();
  s_predict->add_option("--calib", predict.calib, "Calibration table")->required();
  s_predict->add_option("--out", predict.out, "Predictions JSONL")->required();
  s_predict->add_flag("--no-uncertainty", predict.no_uncertainty, "Skip uncertainty maps");
  add_jobs(s_predict);
  add_table(s_predict);

  EvaluateOpts eval;
  auto* s_eval = app.add_subcommand("evaluate", "Evaluate predictions against a manifest");
  s_eval->add_option("--manifest", eval.manifest, "Manifest JSONL")->required();
  s_eval->add_option("--pred", eval.pred, "Predictions JSONL")->required();
  s_eval->add_option("--detector", eval.detector, "Detector curves CSV (mode,severity,map)");
  s_eval->add_option("--tau", eval.tau, "Health warning threshold")->capture_default_str();
  s_eval->add_option("--delta", eval.delta, "Relative detector drop defining failure")
      ->capture_default_str();
  s_eval->add_option("--tau-sweep", eval.tau_sweep, "Thresholds for the sensitivity table")
      ->capture_default_str();
  s_eval->add_option("--out", eval.out, "Report directory")->required();

  auto* s_show = app.add_subcommand("show-table", "Print the risk-weight table");
  add_table(s_show);

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);

  try {
    if (s_degrade->parsed()) return cmd_degrade(common, degrade, out);
    if (s_gen->parsed()) return cmd_gen(common, gen, out);
    if (s_sweep->parsed()) return cmd_sweep(common, sweep, out);
    if (s_score->parsed()) return cmd_score(common, score, out);
    if (s_monitor->parsed()) return cmd_monitor(common, monitor, out);
    if (s_calib->parsed()) return cmd_calibrate(common, calib, out);
    if (s_predict->parsed()) return cmd_predict(common, predict, out);
    if (s_eval->parsed()) return cmd_evaluate(eval, out);
    if (s_show->parsed()) return cmd_show_table(common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sensorsentry::cli
