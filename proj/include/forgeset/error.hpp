//
// Copyright 2026 The forgeset Authors
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
//

#ifndef FORGESET_ERROR_HPP_
#define FORGESET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace forgeset {

// Every failure raised by the core carries one of these codes. The C API maps
// them one-to-one onto fs_status values.
enum class ErrorCode {
  kBadSpec = 1,
  kShape,
  kLabelOutOfRange,
  kBracket,
  kNoConvergence,
  kBudget,
  kDivergence,
  kEmptyRetainSet,
  kSingleClass,
  kEmptyBatch,
  kParse,
  kEmptyFile,
  kFile,
  kTooLarge,
  kConfig,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace forgeset

#endif  // FORGESET_ERROR_HPP_
