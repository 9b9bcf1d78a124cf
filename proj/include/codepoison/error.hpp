#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace codepoison {

enum class ErrorCode {
  UnsupportedLanguage,
  IoError,
  SchemaError,
  EmptyManifest,
  PositionOutOfRange,
  IneligiblePosition,
  LanguageNotSupportedByTrigger,
  WrongTriggerKind,
  TooManyInsertions,
  UnknownIntrinsic,
  UnknownTrigger,
  DuplicateTrigger,
  NonDeletableStatement,
  NoOperatorInStatement,
  DegenerateSample,
  PoisonOnPL2NL,
  MissingModality,
  UnassignedTrigger,
  DimensionMismatch,
  InvalidPlan,
  EmptyCorpus,
  MalformedRecord,
  ConflictingManipulations,
  NoAttempts,
  NoPairs,
  UntrainedModel,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedLanguage: return "UnsupportedLanguage";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::IneligiblePosition: return "IneligiblePosition";
    case ErrorCode::LanguageNotSupportedByTrigger: return "LanguageNotSupportedByTrigger";
    case ErrorCode::WrongTriggerKind: return "WrongTriggerKind";
    case ErrorCode::TooManyInsertions: return "TooManyInsertions";
    case ErrorCode::UnknownIntrinsic: return "UnknownIntrinsic";
    case ErrorCode::UnknownTrigger: return "UnknownTrigger";
    case ErrorCode::DuplicateTrigger: return "DuplicateTrigger";
    case ErrorCode::NonDeletableStatement: return "NonDeletableStatement";
    case ErrorCode::NoOperatorInStatement: return "NoOperatorInStatement";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::PoisonOnPL2NL: return "PoisonOnPL2NL";
    case ErrorCode::MissingModality: return "MissingModality";
    case ErrorCode::UnassignedTrigger: return "UnassignedTrigger";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::ConflictingManipulations: return "ConflictingManipulations";
    case ErrorCode::NoAttempts: return "NoAttempts";
    case ErrorCode::NoPairs: return "NoPairs";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the JSONL readers; `line` is 1-based.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& message)
      : Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace codepoison
