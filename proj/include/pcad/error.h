/*
 * Copyright 2026 The pcad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PCAD_ERROR_H_
#define PCAD_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcad {

// Every failure raised by the library carries one of these codes. The CLI
// reports the code name verbatim in its error JSON.
enum class ErrorCode {
  kEmptyInput,
  kDimensionMismatch,
  kNotSymmetric,
  kNoConvergence,
  kDegenerateData,
  kAllZeroSpectrum,
  kInvalidArgument,
  kIoFailure,
  kNonFiniteValue,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kDimensionOverflow,
  kInvalidHeader,
  kEmptyMap,
  kInvalidTarget,
  kOneClassOnly,
  kNoPositives,
  kShapeMismatch,
  kNoRegions,
  kInvalidSpec,
  kInvalidManifest,
  kInvalidConfig,
  kModelNotFound,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcad

#endif  // PCAD_ERROR_H_
