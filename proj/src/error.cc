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

#include "pcad/error.h"

namespace pcad {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::kNotSymmetric:
      return "NotSymmetric";
    case ErrorCode::kNoConvergence:
      return "NoConvergence";
    case ErrorCode::kDegenerateData:
      return "DegenerateData";
    case ErrorCode::kAllZeroSpectrum:
      return "AllZeroSpectrum";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kIoFailure:
      return "IoFailure";
    case ErrorCode::kNonFiniteValue:
      return "NonFiniteValue";
    case ErrorCode::kBadMagic:
      return "BadMagic";
    case ErrorCode::kUnsupportedVersion:
      return "UnsupportedVersion";
    case ErrorCode::kTruncated:
      return "Truncated";
    case ErrorCode::kDimensionOverflow:
      return "DimensionOverflow";
    case ErrorCode::kInvalidHeader:
      return "InvalidHeader";
    case ErrorCode::kEmptyMap:
      return "EmptyMap";
    case ErrorCode::kInvalidTarget:
      return "InvalidTarget";
    case ErrorCode::kOneClassOnly:
      return "OneClassOnly";
    case ErrorCode::kNoPositives:
      return "NoPositives";
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kNoRegions:
      return "NoRegions";
    case ErrorCode::kInvalidSpec:
      return "InvalidSpec";
    case ErrorCode::kInvalidManifest:
      return "InvalidManifest";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kModelNotFound:
      return "ModelNotFound";
  }
  return "Unknown";
}

}  // namespace pcad
