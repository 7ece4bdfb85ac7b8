#pragma once

#include <stdexcept>
#include <string>

namespace evomt {

// Invalid configuration supplied by the user (bad JSON field, unknown preset,
// out-of-range hyperparameter).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Programming-contract violation at an API boundary (dimension mismatch,
// out-of-range action or task index).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evomt
