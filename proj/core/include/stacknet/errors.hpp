#pragma once

#include <stdexcept>
#include <string>

namespace stacknet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions that do not agree with a model or corpus.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input rejected by a numeric routine (non-finite value, index out of range).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient encountered during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data. `kind()` separates the failure classes so callers
/// and tests can distinguish, e.g., a bad magic from a truncated file.
class ParseError : public Error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kUnsupportedVersion,
    kTruncated,
    kDimensionMismatch,
    kLabelOutOfRange,
    kNonFinite,
    kMissingEntry,
    kDuplicateEntry,
    kGap,
    kSyntax,
  };

  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace stacknet
