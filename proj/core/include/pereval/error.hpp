// Copyright 2026 The pereval Authors.
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

#ifndef PEREVAL_ERROR_HPP_
#define PEREVAL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pereval {

/// Domain error categories. Every failure the library reports carries one.
enum class ErrorCode {
  kInvalidArgument,
  kMalformedRecord,
  kIo,
  kUnwritablePath,
  kEmptyAfterFiltering,
  kNotEnoughCases,
  kCannotDerange,
  kInvalidTemplate,
  kBackendUnavailable,
  kBackendRejected,
  kReplayMiss,
  kUnknownPair,
  kMissingOutput,
  kMissingReference,
  kSamePlayer,
  kNoDecisiveOutcomes,
  kPoolTooSmall,
  kPairNotInTruth,
  kUnpairedCase,
  kUnknownRater,
  kUnknownTask,
  kLeaseExpired,
  kDuplicateSubmission,
  kIncompleteAnswers,
  kUnauthorized,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pereval

#endif  // PEREVAL_ERROR_HPP_
