#pragma once

#include <stdexcept>
#include <string>

namespace alstm {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or usage: wrong shapes, invalid hyperparameters,
/// mismatched checkpoint/dataset combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shape mismatch.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Split boundary dates out of order.
class InvalidSplitError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed input file or payload.
class FormatError : public Error {
 public:
  using Error::Error;
  FormatError(const std::string& message, int line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Input series too short for the requested computation.
class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Indicator window length of zero or longer than the series.
class InvalidWindowError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid in-memory input (unsorted dates, duplicates).
class MalformedInputError : public Error {
 public:
  using Error::Error;
};

/// Empty result where data was required.
class NoDataError : public Error {
 public:
  using Error::Error;
};

/// HTTP layer failure after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Min-max inversion requested for a constant training column.
class DegenerateFeatureError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or container version not understood by this build.
class IncompatibleFormatError : public Error {
 public:
  using Error::Error;
};

/// Truncated or internally inconsistent container file.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Prediction requested for a ticker with no stored normalization params.
class MissingParamsError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace alstm
