// Copyright (c) 2026 The snoreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "snoreid/error.h"

namespace snoreid {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateUtterance: return "DuplicateUtterance";
    case ErrorCode::kBadSampleRate: return "BadSampleRate";
    case ErrorCode::kUnsupportedAudio: return "UnsupportedAudio";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoEligibleSubjects: return "NoEligibleSubjects";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kEmptyFeatureMatrix: return "EmptyFeatureMatrix";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kTooFewSubjects: return "TooFewSubjects";
    case ErrorCode::kEmptyDevelopmentSet: return "EmptyDevelopmentSet";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNormalizationDegenerate: return "NormalizationDegenerate";
    case ErrorCode::kNonUnitInput: return "NonUnitInput";
    case ErrorCode::kEmptyRegistry: return "EmptyRegistry";
    case ErrorCode::kUnknownSubject: return "UnknownSubject";
    case ErrorCode::kEmptyScores: return "EmptyScores";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace snoreid
