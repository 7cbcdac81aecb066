#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace termgen {

// Typed failure codes shared by every module. Each operation documents which
// subset it can raise.
enum class Errc {
  MissingInstruction,
  MalformedMetadata,
  PathEscape,
  IoFailure,
  PlaceholderMissing,
  NoJsonObject,
  SchemaViolation,
  InvalidJson,
  BackendUnavailable,
  MaterializationFailure,
  SessionDead,
  NoTests,
  RunnerFailure,
  FilesOnNonSwe,
  InsufficientSkills,
  MissingRequiredTag,
  MalformedWeights,
  MalformedFiles,
  LeakageDetected,
  MissingReport,
  EmptyTrajectory,
  StageMissing,
  EmptyInput,
  ModelFailure,
  InvalidArgument,
};

[[nodiscard]] constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingInstruction: return "MissingInstruction";
    case Errc::MalformedMetadata: return "MalformedMetadata";
    case Errc::PathEscape: return "PathEscape";
    case Errc::IoFailure: return "IoFailure";
    case Errc::PlaceholderMissing: return "PlaceholderMissing";
    case Errc::NoJsonObject: return "NoJsonObject";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InvalidJson: return "InvalidJson";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::MaterializationFailure: return "MaterializationFailure";
    case Errc::SessionDead: return "SessionDead";
    case Errc::NoTests: return "NoTests";
    case Errc::RunnerFailure: return "RunnerFailure";
    case Errc::FilesOnNonSwe: return "FilesOnNonSwe";
    case Errc::InsufficientSkills: return "InsufficientSkills";
    case Errc::MissingRequiredTag: return "MissingRequiredTag";
    case Errc::MalformedWeights: return "MalformedWeights";
    case Errc::MalformedFiles: return "MalformedFiles";
    case Errc::LeakageDetected: return "LeakageDetected";
    case Errc::MissingReport: return "MissingReport";
    case Errc::EmptyTrajectory: return "EmptyTrajectory";
    case Errc::StageMissing: return "StageMissing";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ModelFailure: return "ModelFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace termgen
