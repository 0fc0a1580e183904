#pragma once

#include <stdexcept>
#include <string>

namespace mppc {

// Bad user input: malformed spec, config or ingested file. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpec : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IngestionError : public ConfigError {
 public:
  IngestionError(const std::string& what, long long index)
      : ConfigError(what + " (record " + std::to_string(index) + ")"), index_(index) {}
  explicit IngestionError(const std::string& what) : ConfigError(what) {}

  long long index() const { return index_; }

 private:
  long long index_ = -1;
};

// Numerical failure: data cannot support the requested quantity. CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero mean count, zero singles, or an over-subtracted histogram.
class UndefinedCorrelation : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateFit : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mppc
