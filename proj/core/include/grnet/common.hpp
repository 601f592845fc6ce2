// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grnet {

inline constexpr const char* kVersion = "0.1.0";

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor/feature-map shape or stride violations.
struct ShapeError : Error {
  using Error::Error;
};

/// Dataset layout, file IO and content problems.
struct DataError : Error {
  using Error::Error;
};

/// Invalid configuration (flags, presets, schedules).
struct ConfigError : Error {
  using Error::Error;
};

/// Non-finite loss during optimization.
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, int64_t at_step)
      : Error(msg), step(at_step) {}
  int64_t step;
};

}  // namespace grnet
