// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/cli.hpp"

int main(int argc, char** argv) { return sensorsentry::cli::run(argc, argv); }
