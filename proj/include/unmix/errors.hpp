#pragma once

#include <stdexcept>
#include <string>

namespace unmix {

// Error categories map onto CLI exit codes: argument/usage -> 1,
// I/O and parse -> 2, numeric failures (divergence, degeneracy) -> 3.
struct ArgumentError : std::runtime_error {
  explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : ArgumentError {
  explicit ShapeError(const std::string& msg) : ArgumentError(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : IoError {
  explicit ParseError(const std::string& msg) : IoError(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : NumericError {
  explicit DivergenceError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace unmix
