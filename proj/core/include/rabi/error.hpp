#pragma once

#include <stdexcept>
#include <string>

namespace rabi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands built against different truncated spaces.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A requested moment order or photon number exceeds the Fock cutoff.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Invalid physical parameters or configuration fields.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Integrator failure, non-finite state, or an undefined derived quantity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rabi
