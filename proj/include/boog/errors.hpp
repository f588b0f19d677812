#pragma once

#include <stdexcept>
#include <string>

namespace boog {

/// Operand shapes disagree. The message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of an operation was violated by its caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A user-supplied parameter is out of range or inconsistent.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss or parameter went non-finite during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure that is not a content problem (open, write, rename).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LoadErrorKind {
  MissingFile,
  Malformed,
  DimensionMismatch,
  DanglingEndpoint,
  InvalidRecord,
  BadMagic,
  Truncated,
  CountMismatch,
  VersionMismatch,
};

inline const char* to_string(LoadErrorKind kind) {
  switch (kind) {
    case LoadErrorKind::MissingFile: return "missing file";
    case LoadErrorKind::Malformed: return "malformed record";
    case LoadErrorKind::DimensionMismatch: return "dimension mismatch";
    case LoadErrorKind::DanglingEndpoint: return "dangling endpoint";
    case LoadErrorKind::InvalidRecord: return "invalid record";
    case LoadErrorKind::BadMagic: return "bad magic";
    case LoadErrorKind::Truncated: return "truncated payload";
    case LoadErrorKind::CountMismatch: return "count/dim mismatch";
    case LoadErrorKind::VersionMismatch: return "version mismatch";
  }
  return "load error";
}

/// Failure while reading a dataset, embedding file or checkpoint.
/// `location()` names the offending file and record.
class LoadError : public std::runtime_error {
 public:
  LoadError(LoadErrorKind kind, std::string location, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + " at " + location + ": " + detail),
        kind_(kind),
        location_(std::move(location)) {}

  LoadErrorKind kind() const { return kind_; }
  const std::string& location() const { return location_; }

 private:
  LoadErrorKind kind_;
  std::string location_;
};

}  // namespace boog
