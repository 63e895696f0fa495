#pragma once

#include <stdexcept>
#include <string>

namespace dnf {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument sizes or table shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (configuration values, coefficient tables, geometry).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Factorization breakdown, non-convergence, detected singularity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File cannot be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dnf
