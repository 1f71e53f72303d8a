#pragma once

#include <stdexcept>
#include <string>

namespace nethaz {

// Exception hierarchy. The CLI maps each family onto an exit code:
// ConfigError -> 1, DataError -> 2, NumericalError -> 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Warning sink used for recoverable data issues (tie adjustments, dropped
/// rows). Writes to stderr unless silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace nethaz
