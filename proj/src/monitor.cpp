// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/monitor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "sensorsentry/error.hpp"
#include "sensorsentry/filters.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/labelgen.hpp"
#include "sensorsentry/rng.hpp"

namespace sensorsentry {
namespace {

constexpr std::uint64_t kCalibrationChannel = 0x43414c42;  // "CALB"
constexpr double kWeightFloor = 0.05;

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

// Mean absolute 4-neighbour Laplacian of L inside each tile.
Plane tile_detail(const Plane& lap_abs, int tile) {
  const int tw = (lap_abs.width + tile - 1) / tile;
  const int th = (lap_abs.height + tile - 1) / tile;
  Plane out(tw, th);
  for (int ty = 0; ty < th; ++ty) {
    for (int tx = 0; tx < tw; ++tx) {
      double sum = 0.0;
      int n = 0;
      for (int y = ty * tile; y < std::min((ty + 1) * tile, lap_abs.height); ++y) {
        for (int x = tx * tile; x < std::min((tx + 1) * tile, lap_abs.width); ++x) {
          sum += lap_abs(x, y);
          ++n;
        }
      }
      out(tx, ty) = sum / n;
    }
  }
  return out;
}

Plane tile_mean(const Plane& p, int tile) { return tile_detail(p, tile); }

// Bilinear upsampling of a tile grid to pixel resolution (tile centres as
// sample points).
Plane upsample(const Plane& tiles, int tile, int width, int height) {
  Plane out(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) / tile - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) / tile - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double ax = fx - x0;
      out(x, y) = (1 - ay) * ((1 - ax) * tiles.clamped(x0, y0) + ax * tiles.clamped(x0 + 1, y0)) +
                  ay * ((1 - ax) * tiles.clamped(x0, y0 + 1) + ax * tiles.clamped(x0 + 1, y0 + 1));
    }
  }
  return out;
}

double radial_rho2(int x, int y, int width, int height) {
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  const double r2max = cx * cx + cy * cy;
  if (r2max <= 0.0) return 0.0;
  const double dx = x - cx;
  const double dy = y - cy;
  return (dx * dx + dy * dy) / r2max;
}

struct Analysis {
  ModeStatistics stats;
  Plane dark;       // per-pixel dark channel in [0,1]
  Plane highlight;  // per-pixel highlight excess in [0,1]
  Plane lap_abs;    // per-pixel |Laplacian| of L
};

Analysis analyze(const ImageBuffer& img, double exposure_reference) {
  if (img.empty()) throw InvalidArgument("empty image");
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = img.pixel_count();
  const Plane L = luminance(img);
  Analysis a;
  auto& raw = a.stats.raw;

  double mean_l = 0.0;
  for (double v : L.v) mean_l += v;
  mean_l /= static_cast<double>(n);
  a.stats.mean_luminance = mean_l;

  // Fog: dark channel over 15x15 patches.
  Plane min_rgb(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      min_rgb(x, y) = std::min({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)}) / 255.0;
    }
  }
  a.dark = min_filter(min_rgb, 7);
  raw[mode_id(DegradationMode::Fog)] = a.dark.mean();

  // Low light: mean luminance deficit.
  raw[mode_id(DegradationMode::LowLight)] = 1.0 - mean_l;

  // Exposure: log deviation of mean luminance from the clean reference.
  raw[mode_id(DegradationMode::ExposureShift)] =
      std::abs(std::log((mean_l + 0.02) / (exposure_reference + 0.02)));

  // Motion blur: anisotropy of the gradient structure tensor. The absolute
  // Laplacian feeds the tile detail measures below.
  a.lap_abs = Plane(w, h);
  double j11 = 0.0, j22 = 0.0, j12 = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lap = L.clamped(x - 1, y) + L.clamped(x + 1, y) + L.clamped(x, y - 1) +
                         L.clamped(x, y + 1) - 4.0 * L(x, y);
      a.lap_abs(x, y) = std::abs(lap);
      const double gx = 0.5 * (L.clamped(x + 1, y) - L.clamped(x - 1, y));
      const double gy = 0.5 * (L.clamped(x, y + 1) - L.clamped(x, y - 1));
      j11 += gx * gx;
      j22 += gy * gy;
      j12 += gx * gy;
    }
  }
  const double tr = j11 + j22;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (j11 - j22) * (j11 - j22) + j12 * j12));
  const double l1 = 0.5 * tr + disc;
  const double l2 = 0.5 * tr - disc;
  const double anisotropy = l1 > 0.0 ? 1.0 - std::max(0.0, l2) / l1 : 0.0;
  raw[mode_id(DegradationMode::MotionBlur)] = anisotropy;

  // Rain: thin bright vertical ridges persisting along the column, net of
  // the same measure on horizontal ridges.
  {
    Plane ridge_v(w, h), ridge_h(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        ridge_v(x, y) = L(x, y) - 0.5 * (L.clamped(x - 2, y) + L.clamped(x + 2, y));
        ridge_h(x, y) = L(x, y) - 0.5 * (L.clamped(x, y - 2) + L.clamped(x, y + 2));
      }
    }
    constexpr int kRun = 4;
    double v_sum = 0.0, h_sum = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sv = 0.0, sh = 0.0;
        for (int k = -kRun; k <= kRun; ++k) {
          sv += ridge_v.clamped(x, y + k);
          sh += ridge_h.clamped(x + k, y);
        }
        v_sum += std::max(0.0, sv / (2 * kRun + 1));
        h_sum += std::max(0.0, sh / (2 * kRun + 1));
      }
    }
    raw[mode_id(DegradationMode::Rain)] = (v_sum - h_sum) / static_cast<double>(n);
  }

  // Snow: density of small bright speckles.
  {
    const Plane local = box_mean(L, 4);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (L.v[i] > 0.55 && L.v[i] - local.v[i] > 0.1) ++count;
    }
    raw[mode_id(DegradationMode::Snow)] = static_cast<double>(count) / static_cast<double>(n);
  }

  // Glare: highlight excess above 0.75.
  a.highlight = Plane(w, h);
  for (std::size_t i = 0; i < n; ++i) a.highlight.v[i] = std::max(0.0, L.v[i] - 0.75) / 0.25;
  raw[mode_id(DegradationMode::Glare)] = a.highlight.mean();

  // Vignetting: slope of log luminance against squared normalized radius.
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double r2 = radial_rho2(x, y, w, h);
        const double ll = std::log(L(x, y) + 0.02);
        sx += r2;
        sy += ll;
        sxx += r2 * r2;
        sxy += r2 * ll;
      }
    }
    const double nn = static_cast<double>(n);
    const double den = sxx - sx * sx / nn;
    raw[mode_id(DegradationMode::Vignetting)] = den > 0.0 ? -(sxy - sx * sy / nn) / den : 0.0;
  }

  // Sensor noise: median absolute residual against a 3x3 median.
  {
    const Plane med = median3x3(L);
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = std::abs(L.v[i] - med.v[i]);
    raw[mode_id(DegradationMode::SensorNoise)] = quantile(std::move(res), 0.5);
  }

  // JPEG: luminance steps across 8x8 block boundaries relative to steps
  // inside blocks.
  {
    double edge = 0.0, inner = 0.0;
    std::size_t ne = 0, ni = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        const double d = std::abs(L(x + 1, y) - L(x, y));
        if (x % 8 == 7) {
          edge += d;
          ++ne;
        } else {
          inner += d;
          ++ni;
        }
      }
    }
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = std::abs(L(x, y + 1) - L(x, y));
        if (y % 8 == 7) {
          edge += d;
          ++ne;
        } else {
          inner += d;
          ++ni;
        }
      }
    }
    const double e = ne ? edge / ne : 0.0;
    const double i = ni ? inner / ni : 0.0;
    raw[mode_id(DegradationMode::JpegCompression)] = std::log((e + 1e-4) / (i + 1e-4));
  }

  // Defocus: mean log ratio of the sharpest tiles' detail to each tile's.
  // Depth-dependent blur spreads the ratios; blur of the whole frame mostly
  // does not. Lens occlusion: share of tiles whose detail collapsed.
  {
    const Plane detail = tile_detail(a.lap_abs, 8);
    const double ref = quantile(detail.v, 0.9);
    double log_ratio = 0.0;
    std::size_t low = 0;
    for (double d : detail.v) {
      log_ratio += std::log((ref + 1e-4) / (d + 1e-4));
      if (d < 0.35 * ref) ++low;
    }
    const double tiles = static_cast<double>(detail.v.size());
    raw[mode_id(DegradationMode::DefocusBlur)] = log_ratio / tiles;
    raw[mode_id(DegradationMode::LensOcclusion)] = static_cast<double>(low) / tiles;
  }
  return a;
}

SpatialMask uncertainty_map(const Analysis& a, const SeverityVector& s, int w, int h) {
  auto weight = [&](DegradationMode m) { return kWeightFloor + (1.0 - kWeightFloor) * s[m]; };
  const Plane detail = tile_detail(a.lap_abs, kUncertaintyTile);
  const double ref = quantile(detail.v, 0.9);
  const Plane dark = tile_mean(a.dark, kUncertaintyTile);
  const Plane glare = tile_mean(a.highlight, kUncertaintyTile);
  Plane tiles(detail.width, detail.height);
  const double w_collapse =
      std::max(weight(DegradationMode::LensOcclusion), weight(DegradationMode::DefocusBlur));
  for (std::size_t t = 0; t < tiles.v.size(); ++t) {
    const double collapse = ref > 0.0 ? std::clamp(1.0 - detail.v[t] / ref, 0.0, 1.0) : 0.0;
    tiles.v[t] = std::max({w_collapse * collapse, weight(DegradationMode::Fog) * dark.v[t],
                           weight(DegradationMode::Glare) * glare.v[t]});
  }
  const Plane up = upsample(tiles, kUncertaintyTile, w, h);
  const double w_vig = weight(DegradationMode::Vignetting);
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      out[i] = std::clamp(std::max(up.v[i], w_vig * radial_rho2(x, y, w, h)), 0.0, 1.0);
    }
  }
  return SpatialMask(w, h, std::move(out));
}

}  // namespace

ModeStatistics compute_statistics(const ImageBuffer& img, double exposure_reference) {
  return analyze(img, exposure_reference).stats;
}

std::vector<std::pair<double, double>> isotonic_fit(std::vector<std::pair<double, double>> xy) {
  if (xy.empty()) throw InvalidArgument("isotonic_fit needs at least one point");
  std::stable_sort(xy.begin(), xy.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  struct Block {
    double x_sum;
    double y_sum;
    double n;
    double level() const { return y_sum / n; }
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < xy.size();) {
    Block b{0.0, 0.0, 0.0};
    std::size_t j = i;
    while (j < xy.size() && xy[j].first == xy[i].first) {
      b.x_sum += xy[j].first;
      b.y_sum += xy[j].second;
      b.n += 1.0;
      ++j;
    }
    i = j;
    blocks.push_back(b);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].level() > blocks.back().level()) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().x_sum += top.x_sum;
      blocks.back().y_sum += top.y_sum;
      blocks.back().n += top.n;
    }
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.emplace_back(b.x_sum / b.n, b.level());
  return out;
}

double TransferCurve::operator()(double raw) const {
  if (points.empty()) return 0.0;
  const double x = raw - baseline;
  if (x <= points.front().first) return std::clamp(points.front().second, 0.0, 1.0);
  if (x >= points.back().first) return std::clamp(points.back().second, 0.0, 1.0);
  const auto it = std::upper_bound(points.begin(), points.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 1.0;
  return std::clamp(y0 + t * (y1 - y0), 0.0, 1.0);
}

bool TransferCurve::monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first < points[i - 1].first || points[i].second < points[i - 1].second) {
      return false;
    }
  }
  return true;
}

TransferCurve fit_transfer(std::span<const std::pair<double, double>> pairs,
                           std::span<const double> clean_raw, double clean_quantile) {
  if (pairs.empty()) throw CalibrationError("no calibration pairs");
  TransferCurve c;
  c.baseline = clean_raw.empty()
                   ? 0.0
                   : quantile(std::vector<double>(clean_raw.begin(), clean_raw.end()), 0.5);
  std::vector<std::pair<double, double>> shifted;
  shifted.reserve(pairs.size());
  for (const auto& [x, y] : pairs) shifted.emplace_back(x - c.baseline, y);
  auto fit = isotonic_fit(std::move(shifted));

  // Dead zone: the fitted level at the clean ceiling becomes zero and the
  // rest of the curve is rescaled to keep its top level.
  if (!clean_raw.empty()) {
    c.points = fit;
    const double ceiling =
        quantile(std::vector<double>(clean_raw.begin(), clean_raw.end()), clean_quantile) -
        c.baseline;
    const double floor_level = c(ceiling + c.baseline);
    const double top = fit.back().second;
    if (top > floor_level) {
      std::vector<std::pair<double, double>> pts;
      pts.emplace_back(ceiling, 0.0);
      for (const auto& [x, y] : fit) {
        if (x > ceiling) pts.emplace_back(x, (y - floor_level) / (top - floor_level) * top);
      }
      fit = std::move(pts);
    }
  }
  c.points = std::move(fit);
  return c;
}

bool CalibrationTable::calibrated() const {
  return std::all_of(curves_.begin(), curves_.end(),
                     [](const auto& c) { return c.has_value() && !c->points.empty(); });
}

std::string CalibrationTable::serialize() const {
  std::ostringstream out;
  out << kHeader << "\n";
  out << "exposure_reference " << format_double(exposure_reference_) << "\n";
  for (DegradationMode m : kAllModes) {
    const auto& c = curves_[mode_id(m)];
    if (!c) continue;
    out << "mode " << mode_name(m) << " baseline " << format_double(c->baseline) << " points";
    for (const auto& [x, y] : c->points) out << " " << format_double(x) << ":" << format_double(y);
    out << "\n";
  }
  return out.str();
}

CalibrationTable CalibrationTable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw DataError("calibration file must start with '" + std::string(kHeader) + "'");
  }
  CalibrationTable t;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    const std::string where = "calibration line " + std::to_string(line_no) + ": ";
    if (key == "exposure_reference") {
      std::string v;
      ls >> v;
      t.exposure_reference_ = parse_double(v);
    } else if (key == "mode") {
      std::string name, tag, base, pts;
      ls >> name >> tag >> base >> pts;
      const auto m = parse_mode(name);
      if (!m || tag != "baseline" || pts != "points") throw DataError(where + "malformed mode entry");
      TransferCurve c;
      c.baseline = parse_double(base);
      std::string pair;
      while (ls >> pair) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) throw DataError(where + "bad point '" + pair + "'");
        c.points.emplace_back(parse_double(std::string_view(pair).substr(0, colon)),
                              parse_double(std::string_view(pair).substr(colon + 1)));
      }
      if (c.points.empty() || !c.monotone()) throw DataError(where + "transfer must be monotone");
      t.curves_[mode_id(*m)] = std::move(c);
    } else {
      throw DataError(where + "unknown key '" + key + "'");
    }
  }
  return t;
}

CalibrationTable CalibrationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void CalibrationTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

DepthMap vertical_ramp_depth(int width, int height) {
  std::vector<double> v(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const double d = height > 1 ? 1.0 - static_cast<double>(y) / (height - 1) : 0.5;
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(y) * width, width, d);
  }
  return DepthMap(width, height, std::move(v));
}

std::uint64_t calibration_stream(std::uint64_t seed, std::size_t image_index, DegradationMode m) {
  return derive_key(seed, {kCalibrationChannel, image_index, mode_id(m)});
}

CalibrationTable calibrate(std::span<const CalibrationImage> clean, std::uint64_t seed,
                           const CalibrationOptions& options) {
  if (clean.size() < kMinCalibrationImages) {
    throw CalibrationError("calibration needs at least " + std::to_string(kMinCalibrationImages) +
                           " clean images, got " + std::to_string(clean.size()));
  }
  const std::vector<double> grid = options.grid.empty() ? default_severity_grid() : options.grid;

  std::vector<double> clean_means;
  for (const auto& ci : clean) clean_means.push_back(compute_statistics(ci.image).mean_luminance);
  const double exposure_ref = quantile(clean_means, 0.5);

  // stats[(image * modes + mode) * grid + k]
  const std::size_t n_tasks = clean.size() * kNumModes;
  std::vector<std::array<double, kNumModes>> stats(n_tasks * grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      try {
        const std::size_t i = task / kNumModes;
        const DegradationMode m = mode_from_id(task % kNumModes);
        const auto& ci = clean[i];
        const DepthMap depth =
            ci.depth ? *ci.depth : vertical_ramp_depth(ci.image.width(), ci.image.height());
        const std::uint64_t stream = calibration_stream(seed, i, m);
        const auto results =
            severity_sweep(ci.image, depth, m, grid, stream, options.mapping);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          stats[task * grid.size() + k] = compute_statistics(results[k].image, exposure_ref).raw;
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_tasks);
        return;
      }
    }
  };
  const int n_threads = std::max(1, options.jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  CalibrationTable table;
  table.set_exposure_reference(exposure_ref);
  for (DegradationMode m : kAllModes) {
    const std::size_t id = mode_id(m);
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> clean_raw;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const std::size_t task = i * kNumModes + id;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = stats[task * grid.size() + k][id];
        pairs.emplace_back(x, grid[k]);
        if (grid[k] == 0.0) clean_raw.push_back(x);
      }
    }
    table.set_curve(m, fit_transfer(pairs, clean_raw, options.clean_quantile));
  }
  spdlog::info("calibrated {} modes on {} images", kNumModes, clean.size());
  return table;
}

MonitorOutput estimate(const ImageBuffer& img, const CalibrationTable& table,
                       const RiskWeightTable& weights) {
  if (!table.calibrated()) throw CalibrationError("calibration table is not fitted");
  const Analysis a = analyze(img, table.exposure_reference());
  MonitorOutput out;
  out.statistics = a.stats;
  std::array<double, kNumModes> s{};
  std::array<double, kNumModes> p{};
  for (DegradationMode m : kAllModes) {
    s[mode_id(m)] = (*table.curve(m))(a.stats[m]);
    p[mode_id(m)] = s[mode_id(m)] > kPresenceThreshold ? 1.0 : 0.0;
  }
  out.severities = SeverityVector::clamped(s);
  out.presence = PresenceVector(p);
  out.health = compute_gshi(out.severities, weights);
  out.uncertainty = uncertainty_map(a, out.severities, img.width(), img.height());
  return out;
}

}  // namespace sensorsentry
