#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msamil {

enum class ErrorKind {
  MissingFile,
  MalformedManifest,
  ShapeMismatch,
  IoFailure,
  Serialization,
  OracleMaskMissing,
  EmptyForeground,
  NoTilesIncluded,
  BoxOutsideImage,
  ArchitectureMismatch,
  EmptyBag,
  EmptyTrainingSet,
  CorruptCheckpoint,
  VersionMismatch,
  AlignmentMismatch,
  DegenerateCorpus,
  LengthMismatch,
  DegenerateLabels,
  InvalidConfig,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedManifest: return "MalformedManifest";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::Serialization: return "Serialization";
    case ErrorKind::OracleMaskMissing: return "OracleMaskMissing";
    case ErrorKind::EmptyForeground: return "EmptyForeground";
    case ErrorKind::NoTilesIncluded: return "NoTilesIncluded";
    case ErrorKind::BoxOutsideImage: return "BoxOutsideImage";
    case ErrorKind::ArchitectureMismatch: return "ArchitectureMismatch";
    case ErrorKind::EmptyBag: return "EmptyBag";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorKind::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's one-line error output) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace msamil
