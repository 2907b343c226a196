#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsvd {

enum class ErrorKind {
  // matrix-core
  NonFinite,
  Empty,
  ConvergenceFailure,
  NegativeSigma,
  InvalidArgument,
  // block-store
  BadWidths,
  Io,
  BadMagic,
  BadVersion,
  TruncatedFile,
  NonFinitePayload,
  BadManifest,
  // merge-engine
  RowMismatch,
  PlanMismatch,
  SingularValueUnderflow,
  // cost-model
  ZeroDenominator,
  NonIntegerLevels,
  // synthgen
  SpectrumTooLong,
  ProfileViolation,
  // metrics
  ZeroReference,
  ShapeMismatch,
  // harness
  BadConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NegativeSigma: return "NegativeSigma";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BadWidths: return "BadWidths";
    case ErrorKind::Io: return "Io";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::BadVersion: return "BadVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::NonFinitePayload: return "NonFinitePayload";
    case ErrorKind::BadManifest: return "BadManifest";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::PlanMismatch: return "PlanMismatch";
    case ErrorKind::SingularValueUnderflow: return "SingularValueUnderflow";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::NonIntegerLevels: return "NonIntegerLevels";
    case ErrorKind::SpectrumTooLong: return "SpectrumTooLong";
    case ErrorKind::ProfileViolation: return "ProfileViolation";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hsvd
