// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sensorsentry {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad severity, eps <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read, parsed, or is inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Fog and defocus are scene dependent and cannot run without depth.
class DepthRequired : public Error {
 public:
  explicit DepthRequired(const std::string& mode)
      : Error("degradation mode '" + mode + "' requires a depth map") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Detection box outside the mask or with zero area.
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace sensorsentry
