#pragma once

#include <stdexcept>
#include <string>

namespace fnc {

// Content-dependent failures. The CLI maps every DataError to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NotContractive : public DataError {
 public:
  using DataError::DataError;
};

// A training run produced a non-finite cost, usually from an oversized step.
class DivergenceError : public DataError {
 public:
  using DataError::DataError;
};

// Malformed bytes: bad magic, truncated payload, unknown tag.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace fnc
