#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairbalance {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

/// Malformed experiment configuration, bad CLI flags, out-of-range arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Anything wrong with the input data itself.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyDataError : public DataError {
 public:
  using DataError::DataError;
};

class LabelMappingError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : DataError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// A single experiment repeat failed; carries the repeat index and keeps the
/// exit code of the underlying cause.
class RepeatError : public Error {
 public:
  RepeatError(int repeat, const std::string& cause, int code)
      : Error("repeat " + std::to_string(repeat) + " failed: " + cause),
        repeat_(repeat),
        code_(code) {}
  [[nodiscard]] int repeat() const noexcept { return repeat_; }
  [[nodiscard]] int exit_code() const noexcept override { return code_; }

 private:
  int repeat_;
  int code_;
};

}  // namespace fairbalance
