// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "testing.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sensorsentry/image_io.hpp"
#include "sensorsentry/scenes.hpp"

namespace sensorsentry::testing {
namespace fs = std::filesystem;

BigFloat exponent_reference(DegradationMode m) {
  // Base weight and group scale as published.
  static const std::map<DegradationMode, std::pair<const char*, const char*>> kTable = {
      {DegradationMode::Fog, {"1.30", "1.00"}},
      {DegradationMode::Rain, {"1.10", "1.00"}},
      {DegradationMode::Snow, {"1.20", "1.00"}},
      {DegradationMode::LowLight, {"1.30", "1.00"}},
      {DegradationMode::MotionBlur, {"1.40", "1.10"}},
      {DegradationMode::DefocusBlur, {"1.40", "1.10"}},
      {DegradationMode::Glare, {"1.50", "1.10"}},
      {DegradationMode::Vignetting, {"0.70", "1.10"}},
      {DegradationMode::SensorNoise, {"1.10", "0.95"}},
      {DegradationMode::ExposureShift, {"1.00", "0.95"}},
      {DegradationMode::JpegCompression, {"0.80", "0.95"}},
      {DegradationMode::LensOcclusion, {"1.60", "1.15"}},
  };
  const auto& [w, a] = kTable.at(m);
  return BigFloat(w) * BigFloat(a);
}

BigFloat gshi_reference(const std::array<double, kNumModes>& s) {
  BigFloat h = 1;
  for (std::size_t i = 0; i < kNumModes; ++i) {
    const BigFloat base = BigFloat(1) - BigFloat(s[i]);
    if (base == 0) return BigFloat(0);
    h *= boost::multiprecision::pow(base, exponent_reference(mode_from_id(i)));
  }
  return h;
}

Rational average_precision_reference(const std::vector<double>& scores,
                                     const std::vector<bool>& labels) {
  Rational sum = 0;
  long positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++positives;
    long rank = 1;
    long hits = 1;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (j == i) continue;
      const bool ahead = scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
      if (!ahead) continue;
      ++rank;
      if (labels[j]) ++hits;
    }
    sum += Rational(hits, rank);
  }
  if (positives == 0) throw std::invalid_argument("no positives");
  return sum / positives;
}

double mean_abs_reference(const std::vector<double>& a, const std::vector<double>& b) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::fabs(static_cast<long double>(a[i]) - static_cast<long double>(b[i]));
  }
  return static_cast<double>(sum / static_cast<long double>(a.size()));
}

double pearson_reference(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  BigFloat mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  BigFloat sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const BigFloat dx = BigFloat(x[i]) - mx;
    const BigFloat dy = BigFloat(y[i]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return static_cast<double>(sxy / boost::multiprecision::sqrt(sxx * syy));
}

double spearman_reference(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0, equal = 0;
      for (double w : v) {
        below += w < v[i];
        equal += w == v[i];
      }
      r[i] = 1.0 + below + (equal - 1.0) / 2.0;
    }
    return r;
  };
  return pearson_reference(ranks(x), ranks(y));
}

double ause_reference(const std::vector<double>& uncertainty, const std::vector<double>& error) {
  const std::size_t n = error.size();
  constexpr int kSteps = 50;
  std::vector<std::size_t> removal_counts;
  for (int j = 0; j <= kSteps; ++j) {
    removal_counts.push_back(static_cast<std::size_t>(
        std::floor(static_cast<double>(j) * static_cast<double>(n) / kSteps + 0.5)));
  }
  const long double max_error = *std::max_element(error.begin(), error.end());

  auto curve_for = [&](const std::vector<std::size_t>& order) {
    std::vector<long double> c;
    for (std::size_t k : removal_counts) {
      long double kept_sum = 0.0L;
      for (std::size_t p = k; p < n; ++p) kept_sum += error[order[p]];
      const long double mean = k < n ? kept_sum / static_cast<long double>(n - k) : 0.0L;
      c.push_back(max_error > 0 ? mean / max_error : 0.0L);
    }
    return c;
  };

  // Oracle order: by error, largest first.
  std::vector<std::size_t> by_error(n);
  std::iota(by_error.begin(), by_error.end(), 0);
  std::sort(by_error.begin(), by_error.end(),
            [&](std::size_t a, std::size_t b) { return error[a] > error[b]; });
  const auto oracle = curve_for(by_error);

  // Tie groups of the uncertainty ranking, highest first.
  std::map<double, std::vector<std::size_t>, std::greater<>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[uncertainty[i]].push_back(i);
  std::vector<std::vector<std::size_t>> perms;
  for (auto& [u, members] : groups) {
    std::sort(members.begin(), members.end());
    perms.push_back(members);
  }

  std::vector<long double> mean_curve(removal_counts.size(), 0.0L);
  long double orderings = 0;
  while (true) {
    std::vector<std::size_t> order;
    for (const auto& g : perms) order.insert(order.end(), g.begin(), g.end());
    const auto c = curve_for(order);
    for (std::size_t j = 0; j < c.size(); ++j) mean_curve[j] += c[j];
    orderings += 1;
    // Odometer over the per-group permutations.
    std::size_t g = 0;
    while (g < perms.size() && !std::next_permutation(perms[g].begin(), perms[g].end())) ++g;
    if (g == perms.size()) break;
  }
  long double area = 0.0L;
  for (int j = 0; j < kSteps; ++j) {
    const long double d0 = mean_curve[j] / orderings - oracle[j];
    const long double d1 = mean_curve[j + 1] / orderings - oracle[j + 1];
    area += (d0 + d1) / 2 / kSteps;
  }
  return static_cast<double>(area);
}

LeadReference lead_reference(const std::vector<double>& severities,
                             const std::vector<double>& health,
                             const std::vector<double>& detector, double tau, double delta) {
  LeadReference r;
  for (std::size_t i = 0; i < severities.size(); ++i) {
    if (!r.s_warn && health[i] < tau) r.s_warn = severities[i];
    if (!r.s_fail && detector[i] < (1.0 - delta) * detector[0]) r.s_fail = severities[i];
  }
  return r;
}

std::array<double, kNumModes> random_severities(RandomStream& rng, int active, double max_s) {
  std::array<double, kNumModes> s{};
  std::vector<std::size_t> ids(kNumModes);
  std::iota(ids.begin(), ids.end(), 0);
  for (int k = 0; k < active; ++k) {
    const auto pick = k + rng.below(kNumModes - k);
    std::swap(ids[k], ids[pick]);
    s[ids[k]] = rng.uniform() * max_s;
  }
  return s;
}

ScratchDir::ScratchDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / ("sensorsentry_" + tag + "_" + std::to_string(::getpid()) +
                                       "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_scene_set(const fs::path& dir, int count, int width, int height, std::uint64_t seed) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "depth");
  for (int i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%03d", i);
    const auto scene = make_road_scene(width, height, derive_key(seed, static_cast<std::uint64_t>(i)));
    write_png(scene.image, dir / "images" / (std::string(stem) + ".png"));
    write_depth_png(scene.depth, dir / "depth" / (std::string(stem) + ".png"));
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sensorsentry::testing
