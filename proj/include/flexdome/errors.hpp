#pragma once

#include <stdexcept>
#include <string>

namespace flexdome {

// Bad input: malformed config, dimension mismatch, violated call contract.
// The CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numeric breakdown at runtime (NaN payoffs, underflowed normalizer, ...).
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace flexdome
