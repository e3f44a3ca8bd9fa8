// Copyright 2026 The archprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ARCHPRINT_ERROR_HPP_
#define ARCHPRINT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace archprint {

enum class ErrorCode {
  kIndexOutOfRange,
  kDuplicateClass,
  kLengthMismatch,
  kEmptyInput,
  kInvalidResponse,
  kInvalidConfig,
  kUnknownProbe,
  kUnknownArchitecture,
  kInconsistentDims,
  kKTooSmall,
  kSchemaMismatch,
  kMissingCell,
  kProbabilityOutOfRange,
  kEmptyTraces,
  kLoggingDisabled,
  kBindFailure,
  kZooLoadFailure,
  kTransport,
  kProtocol,
  kRemote,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Validation errors are caused by bad input (exit code 1 in the CLI); the rest
// are runtime failures (exit code 2).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace archprint

#endif  // ARCHPRINT_ERROR_HPP_
