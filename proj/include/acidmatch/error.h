// Copyright 2026 The acidmatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ACIDMATCH_ERROR_H_
#define ACIDMATCH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace acidmatch {

enum class ErrorCode {
  kIo,
  kParse,
  kDuplicateId,
  kCoordinateRange,
  kUnresolvedId,
  kUnresolvedLocation,
  kDuplicatePair,
  kEmptyGroundTruth,
  kNoAvailablePairs,
  kEmptyCorpus,
  kNoImpersonatorLabels,
  kDomain,
  kInsufficientData,
  kSingleClass,
  kNonFinite,
  kIncompatibleStrategy,
  kCorruptModel,
  kVersionMismatch,
  kUndecodableImage,
  kInvalidConfig,
  kEmptyCurve,
  kOrdering,
};

// Stable machine-readable name, used in CLI error lines.
std::string_view ErrorCodeName(ErrorCode code);

// All failures raised by the library. The code is the contract; the message
// is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace acidmatch

#endif  // ACIDMATCH_ERROR_H_
