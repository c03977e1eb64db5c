#pragma once

#include <stdexcept>
#include <string>

namespace culprit {

/// Root of the library's exception hierarchy. Each subclass maps to one
/// CLI exit code (see `eval::exit_code_for`).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad hyperparameters, mismatched dims, unknown keys.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Tensor or vector dimensions disagree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Input data is empty, malformed, or out of range.
class DataError : public Error {
public:
  using Error::Error;
};

class SchemaError : public DataError {
public:
  using DataError::DataError;
};

class IoError : public DataError {
public:
  using DataError::DataError;
};

/// A checkpoint or parameter file could not be parsed.
class LoadError : public DataError {
public:
  using DataError::DataError;
};

class OutOfBoundsError : public Error {
public:
  using Error::Error;
};

/// Environment protocol violation, e.g. step() without a preceding reset().
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// Replay buffer holds fewer transitions than the requested batch.
class NotReadyError : public Error {
public:
  using Error::Error;
};

/// A NaN or infinity appeared where finite values are required.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace culprit
