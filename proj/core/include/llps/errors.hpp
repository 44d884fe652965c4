#pragma once

#include <stdexcept>
#include <string>

namespace llps {

// Malformed instance/policy documents and other input that cannot be read.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// An instance that fails the ergodicity validation, or a chain whose
// stationary solve does not converge (which means the same thing).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Requests over the hard resource guards (chain length, horizon, exhaustive
// search size).
struct ResourceLimitError : std::runtime_error {
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace llps
