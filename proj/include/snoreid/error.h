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

#ifndef SNOREID_ERROR_H_
#define SNOREID_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace snoreid {

enum class ErrorCode {
  kMissingFile,
  kParseError,
  kDuplicateUtterance,
  kBadSampleRate,
  kUnsupportedAudio,
  kIoError,
  kInvalidArgument,
  kNoEligibleSubjects,
  kClipTooShort,
  kEmptyFeatureMatrix,
  kTooFewFrames,
  kTooFewSubjects,
  kEmptyDevelopmentSet,
  kEmptyInput,
  kNormalizationDegenerate,
  kNonUnitInput,
  kEmptyRegistry,
  kUnknownSubject,
  kEmptyScores,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type; the code
// lets callers (and tests) branch on the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace snoreid

#endif  // SNOREID_ERROR_H_
