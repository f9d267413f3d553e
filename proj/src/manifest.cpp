// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "sensorsentry/error.hpp"

namespace sensorsentry {
namespace {

using nlohmann::json;

DegradationMode mode_from_json(const json& j) {
  const auto name = j.get<std::string>();
  const auto m = parse_mode(name);
  if (!m) throw DataError("unknown degradation mode '" + name + "'");
  return *m;
}

template <typename T>
std::array<T, kNumModes> array12(const json& j, const char* field) {
  if (!j.is_array() || j.size() != kNumModes) {
    throw DataError(std::string(field) + " must be an array of 12 entries");
  }
  std::array<T, kNumModes> out{};
  for (std::size_t i = 0; i < kNumModes; ++i) out[i] = j[i].get<T>();
  return out;
}

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON line: ") + e.what());
  }
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

SeverityVector to_severity_vector(const Assignment& modes) {
  SeverityVector s;
  for (const auto& ms : modes) s.set(ms.mode, ms.severity);
  return s;
}

std::string to_json_line(const LabelRecord& r) {
  json j;
  j["image_id"] = r.image_id;
  j["source"] = r.source;
  j["output"] = r.output;
  j["mask"] = r.mask ? json(*r.mask) : json(nullptr);
  j["mask_valid"] = r.mask_valid;
  json modes = json::array();
  for (const auto& ms : r.modes) {
    modes.push_back({{"mode", std::string(mode_name(ms.mode))}, {"severity", ms.severity}});
  }
  j["modes"] = modes;
  json presence = json::array();
  for (std::size_t i = 0; i < kNumModes; ++i) presence.push_back(r.presence.at(i) > 0.5);
  j["presence"] = presence;
  j["health_target"] = r.health_target.value();
  j["regime"] = std::string(regime_name(r.regime));
  j["seed"] = r.seed;
  if (r.sweep) {
    j["sweep"] = {{"mode", std::string(mode_name(r.sweep->mode))},
                  {"severity", r.sweep->severity}};
  }
  return j.dump();
}

LabelRecord parse_label_record(std::string_view line) {
  const json j = parse_line(line);
  try {
    LabelRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.output = j.at("output").get<std::string>();
    if (!j.at("mask").is_null()) r.mask = j.at("mask").get<std::string>();
    r.mask_valid = j.at("mask_valid").get<bool>();
    for (const auto& m : j.at("modes")) {
      r.modes.push_back({mode_from_json(m.at("mode")), m.at("severity").get<double>()});
    }
    r.presence = PresenceVector::from_flags(array12<bool>(j.at("presence"), "presence"));
    r.health_target = HealthScore(j.at("health_target").get<double>());
    const auto regime = j.at("regime").get<std::string>();
    if (regime == "healthy") {
      r.regime = Regime::Healthy;
    } else if (regime == "degraded") {
      r.regime = Regime::Degraded;
    } else if (regime == "critical") {
      r.regime = Regime::Critical;
    } else {
      throw DataError("unknown regime '" + regime + "'");
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("sweep")) {
      r.sweep = SweepTag{mode_from_json(j["sweep"].at("mode")),
                         j["sweep"].at("severity").get<double>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad manifest record: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("bad manifest record: ") + e.what());
  }
}

std::vector<LabelRecord> read_manifest(const std::filesystem::path& path) {
  return read_lines<LabelRecord>(path, parse_label_record);
}

void write_manifest(std::span<const LabelRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << "\n";
}

std::string to_json_line(const PredictionRecord& r) {
  json j;
  j["image_id"] = r.image_id;
  j["presence"] = r.presence.values();
  j["severities"] = r.severities.values();
  j["health"] = r.health;
  if (r.uncertainty_path) j["uncertainty_path"] = *r.uncertainty_path;
  return j.dump();
}

PredictionRecord parse_prediction_record(std::string_view line) {
  const json j = parse_line(line);
  try {
    PredictionRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.presence = PresenceVector(array12<double>(j.at("presence"), "presence"));
    r.severities = SeverityVector::clamped(array12<double>(j.at("severities"), "severities"));
    r.health = HealthScore(j.at("health").get<double>()).value();
    if (j.contains("uncertainty_path") && !j["uncertainty_path"].is_null()) {
      r.uncertainty_path = j["uncertainty_path"].get<std::string>();
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad prediction record: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("bad prediction record: ") + e.what());
  }
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  return read_lines<PredictionRecord>(path, parse_prediction_record);
}

void write_predictions(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << "\n";
}

}  // namespace sensorsentry
