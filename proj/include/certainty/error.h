// certainty/error.h

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

#ifndef CERTAINTY_ERROR_H_
#define CERTAINTY_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace certainty {

/// Every failure the toolkit reports. The names are stable: they appear in
/// CLI diagnostics and HTTP error bodies.
enum class ErrorKind {
  // audio
  kMalformedContainer,
  kUnsupportedEncoding,
  kUnsupportedRate,
  kInvalidParameters,
  // prosody
  kClipTooShort,
  kDegenerateInterval,
  kNoVoicedFrames,
  // corpus
  kSchemaViolation,
  kMissingAudio,
  kRatingOutOfRange,
  kOutOfRange,
  kMultipleTargets,
  kMissingAlignment,
  // featuresets
  kTargetSpanOutsideClip,
  kContextEmpty,
  kZeroVariance,
  kMissingFeature,
  // models
  kDimensionMismatch,
  kEmptyData,
  kLengthMismatch,
  kDegenerateMarginals,
  // experiments
  kTooFewSpeakers,
  kSubsetTooSmall,
  kMissingControlWord,
  kNotUncertainEnough,
  // session service
  kUnknownItemSet,
  kUnknownSession,
  kIllegalTransition,
  kAudioRejected,
  kDuplicateRating,
  kUnknownUtterance,
  kIncompleteStudy,
  // generic
  kIo,
  kUsage,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  std::string_view name() const { return ErrorKindName(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace certainty

#endif  // CERTAINTY_ERROR_H_
