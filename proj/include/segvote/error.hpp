#pragma once

#include <stdexcept>
#include <string>

namespace segvote {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller passed data of the wrong shape (dimension or length mismatch).
class InputError : public Error {
public:
  using Error::Error;
};

/// Inconsistent configuration, e.g. a segment count that does not divide d.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Model or function parameter out of its admissible range.
class ParamError : public Error {
public:
  using Error::Error;
};

/// Request exceeds what the data can supply (sampling without replacement,
/// too many classes for the spike spacing).
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Object is not in a usable state (empty dictionary).
class StateError : public Error {
public:
  using Error::Error;
};

/// Rate at zero requested for a law whose support does not straddle zero.
class DegenerateSignError : public Error {
public:
  using Error::Error;
};

/// Base class for file-level failures. The CLI maps these to exit code 2.
class IoError : public Error {
public:
  using Error::Error;
};

class FormatError : public IoError {
public:
  using IoError::IoError;
};

class DimensionError : public IoError {
public:
  using IoError::IoError;
};

class EmptyInputError : public IoError {
public:
  using IoError::IoError;
};

class WriteError : public IoError {
public:
  using IoError::IoError;
};

}  // namespace segvote
