#pragma once

#include <stdexcept>
#include <string>

namespace decomposer {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raster shapes or sequence lengths that must agree do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A scalar argument or configuration value is out of its allowed range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// Optimization produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace decomposer
