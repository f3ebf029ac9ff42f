#pragma once

#include <stdexcept>
#include <string>

namespace fairdiff {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad hyperparameter, malformed config file, or out-of-range value. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed, or degenerate input data. CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Training produced NaN losses or sampling blew up. CLI exit code 4.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint/dataset mismatch or unreadable checkpoint. CLI exit code 5.
class IncompatError : public Error {
 public:
  using Error::Error;
};

/// Precondition violation on an operation's inputs (dimension mismatch, stale cache, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

}  // namespace fairdiff
