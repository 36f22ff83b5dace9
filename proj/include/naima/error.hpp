#pragma once

#include <stdexcept>
#include <string>

namespace naima {

// Base for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: invalid flags, malformed config, dimensions that violate a
// documented precondition. The CLI maps these to exit code 2.
struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Shape/contract violations between internal stages.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Filesystem and OS-level failures.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed on-disk container; carries the byte offset of the failure.
struct FormatError : Error {
  FormatError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte offset " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

}  // namespace naima
