#pragma once

#include <stdexcept>
#include <string>

namespace psmnet {

// Invalid configuration: bad config keys, violated invariants, misuse of an
// op contract (shape mismatch, bad axis, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken or missing input data: unreadable files, malformed codecs,
// mismatched image pairs.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure at runtime: diverged training loss, failed gradient check.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/contract violations raised by tensor ops.
struct ShapeError : ConfigError {
  explicit ShapeError(const std::string& msg) : ConfigError(msg) {}
};

}  // namespace psmnet
