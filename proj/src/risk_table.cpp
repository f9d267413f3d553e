// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>
#include <string>

#include "sensorsentry/core.hpp"
#include "sensorsentry/error.hpp"

namespace sensorsentry {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string serialize_risk_table(const RiskWeightTable& table) {
  std::ostringstream out;
  out << "# GSHI risk weights: effective exponent = base_weight * group_scale\n";
  out << "[base_weight]\n";
  for (auto m : kAllModes) {
    out << mode_name(m) << " = " << format_double(table.base_weight(m)) << "\n";
  }
  out << "\n[group_scale]\n";
  for (auto g : kAllGroups) {
    out << group_name(g) << " = " << format_double(table.group_scale(g)) << "\n";
  }
  for (auto m : kAllModes) {
    if (auto o = table.scale_override(m)) {
      out << mode_name(m) << " = " << format_double(*o) << "\n";
    }
  }
  return out.str();
}

RiskWeightTable parse_risk_table(std::string_view text) {
  RiskWeightTable table;
  std::array<bool, kNumModes> seen_base{};
  enum class Section { None, Base, Group } section = Section::None;

  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line == "[base_weight]") {
        section = Section::Base;
      } else if (line == "[group_scale]") {
        section = Section::Group;
      } else {
        throw DataError("unknown section " + std::string(line) + where);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("expected 'key = value'" + where);
    const auto key = trim(line.substr(0, eq));
    const double value = parse_double(trim(line.substr(eq + 1)));

    try {
      if (section == Section::Base) {
        const auto m = parse_mode(key);
        if (!m) throw DataError("unknown mode '" + std::string(key) + "'" + where);
        table.set_base_weight(*m, value);
        seen_base[mode_id(*m)] = true;
      } else if (section == Section::Group) {
        if (const auto g = parse_group(key)) {
          table.set_group_scale(*g, value);
        } else if (const auto m = parse_mode(key)) {
          table.set_scale_override(*m, value);
        } else {
          throw DataError("unknown group '" + std::string(key) + "'" + where);
        }
      } else {
        throw DataError("entry outside of a section" + where);
      }
    } catch (const InvalidArgument& e) {
      throw DataError(std::string(e.what()) + where);
    }
  }
  for (auto m : kAllModes) {
    if (!seen_base[mode_id(m)]) {
      throw DataError("risk table is missing base_weight for " + std::string(mode_name(m)));
    }
  }
  return table;
}

RiskWeightTable load_risk_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open risk table " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_risk_table(buf.str());
}

void save_risk_table(const RiskWeightTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write risk table " + path);
  out << serialize_risk_table(table);
}

}  // namespace sensorsentry
