#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fsmirl {

using NodeId = std::int32_t;

// Error raised when an input file cannot be parsed. Carries the 1-based
// line number of the offending row.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& path, std::int64_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::int64_t line() const { return line_; }

private:
  std::int64_t line_;
};

// Error raised when data violates a structural invariant (dangling edge
// endpoint, label out of range, non-finite feature, ...).
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension or size mismatch between two operands.
class ShapeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration values.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All pairwise distances are zero; no usable kernel bandwidth exists.
class DegenerateBandwidthError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fsmirl
