#pragma once

#include <stdexcept>
#include <string>

namespace jointkf {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite control input or a corrupted (non-finite) filter state.
class ModelInputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite measurement under the hard-error policy.
class MeasurementError : public Error {
 public:
  using Error::Error;
};

/// H P- H^T + r <= 0.
class SingularInnovationError : public Error {
 public:
  using Error::Error;
};

/// Riccati iteration did not settle within the iteration cap.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Argument outside a function's mathematical domain (e.g. log of u1 <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Channel-count or row-count mismatch between a trace and a filter.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed trace file. The message names the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Config file that violates the schema. The message names the field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filtered value that cannot be turned into a motor command.
class CommandError : public Error {
 public:
  using Error::Error;
};

}  // namespace jointkf
