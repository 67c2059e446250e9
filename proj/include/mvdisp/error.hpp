#pragma once

#include <stdexcept>
#include <string>

namespace mvdisp {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid chart, policy, scenario, or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV rows, model files, time order).
class DataError : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not complete (non-SPD input, domain violation).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Stochastic root finding failed to bracket or stay monotone.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvdisp
