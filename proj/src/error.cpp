// Copyright 2026 The afx Authors.
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

#include "afx/error.hpp"

namespace afx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInputTooShort: return "InputTooShort";
    case ErrorCode::kOddDimension: return "OddDimension";
    case ErrorCode::kHeadMismatch: return "HeadMismatch";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kLabelError: return "LabelError";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kStaleGraph: return "StaleGraph";
    case ErrorCode::kMissingGrad: return "MissingGrad";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnsupportedCodec: return "UnsupportedCodec";
    case ErrorCode::kMaskTooLarge: return "MaskTooLarge";
    case ErrorCode::kInvalidMajority: return "InvalidMajority";
    case ErrorCode::kMissingAnnotation: return "MissingAnnotation";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kUndefinedRecall: return "UndefinedRecall";
    case ErrorCode::kUndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::kNotAStack: return "NotAStack";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace afx
