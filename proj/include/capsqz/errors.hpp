#pragma once

#include <stdexcept>
#include <string>

namespace capsqz {

// Data-dependent failure: malformed files, impossible requests for the given data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; offset is the byte position where parsing stopped.
struct ParseError : DataError {
  ParseError(const std::string& msg, size_t offset_)
      : DataError(msg + " (byte offset " + std::to_string(offset_) + ")"), offset(offset_) {}
  size_t offset = 0;
};

// Numerical failure during training or inference (divergent loss, NaN weights).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace capsqz
