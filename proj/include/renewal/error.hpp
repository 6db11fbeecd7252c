#pragma once

#include <stdexcept>
#include <string>

namespace renewal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input (scenario text, arguments, file contents).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A computation could not be carried out (failed bracketing, overflow, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A verification check did not hold.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace renewal
