#pragma once

#include <stdexcept>
#include <string>

namespace actmon {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: width mismatch, index out of range, empty input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Node-creating operation attempted on a frozen BDD store.
class FrozenStoreError : public Error {
 public:
  using Error::Error;
};

/// A BddRef was used with a store other than the one that issued it.
class CrossStoreError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf in a forward pass, or a diverging training run.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Base for file-content problems (as opposed to I/O failures).
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Structurally invalid content: missing fields, dangling node ids,
/// variable-order violations, truncated files.
class MalformedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace actmon
