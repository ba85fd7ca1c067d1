#pragma once

#include <stdexcept>
#include <string>

namespace drag {

enum class ErrorKind {
  MalformedJson,
  SchemaViolation,
  EmptyGraph,
  PreconditionViolated,
  DimMismatch,
  DuplicateId,
  ZeroVector,
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  EmptyNegatives,
  InsufficientData,
  EmptyImage,
  InvalidThresholds,
  DegenerateLabels,
  MissingTemplate,
  NoReferences,
  EmptyRankings,
  MissingGroundTruth,
  EmptyInput,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::EmptyNegatives: return "EmptyNegatives";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::InvalidThresholds: return "InvalidThresholds";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::MissingTemplate: return "MissingTemplate";
    case ErrorKind::NoReferences: return "NoReferences";
    case ErrorKind::EmptyRankings: return "EmptyRankings";
    case ErrorKind::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorKind::EmptyInput: return "EmptyInput";
  }
  return "Error";
}

// Single exception type for all structured library errors; `kind` is the
// machine-checkable discriminator, what() carries the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace drag
