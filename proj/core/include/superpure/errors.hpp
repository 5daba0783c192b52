#pragma once

#include <stdexcept>
#include <string>

namespace superpure {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid image dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter or configuration value outside its valid range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Failures raised by a super-resolution backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

class ArtifactLoadError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ScaleMismatchError : public BackendError {
 public:
  using BackendError::BackendError;
};

class InferenceError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace superpure
