// Copyright 2026 The cricwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <stdexcept>

namespace cricwin {

enum class ErrorCode {
  InvalidArgument,
  // ingest
  MalformedRow,
  MissingMetadata,
  EmptyInnings,
  TooFewMatches,
  // encode
  EmptyCorpus,
  UnknownInnings,
  LayoutMismatch,
  MissingAugmentation,
  // nn / model
  ShapeMismatch,
  NonFiniteActivation,
  CacheMissing,
  EmptyMask,
  Diverged,
  VersionMismatch,
  CorruptCheckpoint,
  // prematch
  SingleClass,
  // eval
  EmptyDataset,
  // serve
  UnknownCheckpoint,
  UnsupportedVariant,
  UnknownSession,
  SessionFull,
  SessionClosed,
  EncodingError,
  NothingToUndo,
  // io
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::EmptyInnings: return "EmptyInnings";
    case ErrorCode::TooFewMatches: return "TooFewMatches";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownInnings: return "UnknownInnings";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::MissingAugmentation: return "MissingAugmentation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::CacheMissing: return "CacheMissing";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownCheckpoint: return "UnknownCheckpoint";
    case ErrorCode::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionFull: return "SessionFull";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::NothingToUndo: return "NothingToUndo";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// that the CLI and the HTTP layer can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cricwin
