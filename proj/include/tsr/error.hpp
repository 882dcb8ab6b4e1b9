#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content (bad magic, bad header token, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed raster file at a sample depth this library does not handle.
class UnsupportedDepthError : public FormatError {
 public:
  using FormatError::FormatError;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix size mismatch in network evaluation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Frames presented out of order to a stateful consumer.
class SequenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Text input (JSONL, config) that does not parse; message carries the line.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModelBadMagicError : public Error {
 public:
  using Error::Error;
};

class ModelBadVersionError : public Error {
 public:
  using Error::Error;
};

class ModelTruncatedError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsr
