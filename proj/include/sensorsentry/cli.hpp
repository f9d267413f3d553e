// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file cli.hpp
/// @brief The sensorsentry command surface.
///
/// Subcommands: degrade, gen-dataset, sweep, score, monitor, calibrate,
/// predict-manifest, evaluate, show-table. Exit status 0 on success, 1 on
/// usage errors, 2 on data errors.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sensorsentry::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// argv[0] is the program name. Human summaries and records go to out,
/// usage text and diagnostics to err; logs go to the process stderr.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sensorsentry::cli
