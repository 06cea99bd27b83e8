// certainty/src/error.cc

// Copyright 2026  The Certainty Authors
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

#include "certainty/error.h"

namespace certainty {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedContainer: return "MalformedContainer";
    case ErrorKind::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::kUnsupportedRate: return "UnsupportedRate";
    case ErrorKind::kInvalidParameters: return "InvalidParameters";
    case ErrorKind::kClipTooShort: return "ClipTooShort";
    case ErrorKind::kDegenerateInterval: return "DegenerateInterval";
    case ErrorKind::kNoVoicedFrames: return "NoVoicedFrames";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
    case ErrorKind::kMissingAudio: return "MissingAudio";
    case ErrorKind::kRatingOutOfRange: return "RatingOutOfRange";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kMultipleTargets: return "MultipleTargets";
    case ErrorKind::kMissingAlignment: return "MissingAlignment";
    case ErrorKind::kTargetSpanOutsideClip: return "TargetSpanOutsideClip";
    case ErrorKind::kContextEmpty: return "ContextEmpty";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kMissingFeature: return "MissingFeature";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyData: return "EmptyData";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDegenerateMarginals: return "DegenerateMarginals";
    case ErrorKind::kTooFewSpeakers: return "TooFewSpeakers";
    case ErrorKind::kSubsetTooSmall: return "SubsetTooSmall";
    case ErrorKind::kMissingControlWord: return "MissingControlWord";
    case ErrorKind::kNotUncertainEnough: return "NotUncertainEnough";
    case ErrorKind::kUnknownItemSet: return "UnknownItemSet";
    case ErrorKind::kUnknownSession: return "UnknownSession";
    case ErrorKind::kIllegalTransition: return "IllegalTransition";
    case ErrorKind::kAudioRejected: return "AudioRejected";
    case ErrorKind::kDuplicateRating: return "DuplicateRating";
    case ErrorKind::kUnknownUtterance: return "UnknownUtterance";
    case ErrorKind::kIncompleteStudy: return "IncompleteStudy";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kUsage: return "Usage";
  }
  return "Unknown";
}

}  // namespace certainty
