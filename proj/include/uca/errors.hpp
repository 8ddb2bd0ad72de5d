#pragma once

#include <stdexcept>
#include <string>

namespace uca {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or dimensionally inconsistent input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or phantom specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A precondition or internal invariant does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A vertebra cluster that has no horizontal extent, or whose centroids coincide.
class DegenerateClusterError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

}  // namespace uca
