// certainty/synthetic.h

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

#ifndef CERTAINTY_SYNTHETIC_H_
#define CERTAINTY_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "certainty/corpus.h"
#include "certainty/prosody.h"

namespace certainty {

// Study generator with a known answer. Every utterance has one slot word and
// one control word. A latent uncertainty u in [0, 1] stretches the slot word
// by 1 + u and, above u = 0.3, inserts a pause of 0.15 + 0.5u seconds before
// it. A low noise floor covers the whole clip. The perceived mean is an affine function of five measured target-scope
// features, quantized to the five-judge grid without changing its class.

struct SyntheticOptions {
  int speakers = 8;
  int items = 12;
  int sample_rate = 8000;
  std::uint64_t seed = 1;
  int threads = 0;
  TrackerConfig tracker;
};

inline constexpr std::array<FeatureId, 5> kPlantedFeatures = {
    FeatureId::kSilenceTotal, FeatureId::kSpeakingRate, FeatureId::kDurationTotal,
    FeatureId::kF0Mean, FeatureId::kRmsMean};
inline constexpr std::array<double, 5> kPlantedWeights = {-1.0, 0.8, -0.5, 0.3, 0.2};

struct SyntheticStudy {
  std::filesystem::path manifest;
  Corpus corpus;
  std::vector<double> latent;   // per utterance, corpus order
  std::vector<double> planted;  // unquantized perceived score
};

/// Writes wav/, lexicon.json and manifest.json under `dir` (created if
/// needed) and returns the loaded corpus.
SyntheticStudy GenerateSyntheticStudy(const std::filesystem::path &dir,
                                      const SyntheticOptions &options = {});

/// Nearest multiple of 0.2 in [1, 5] with the same three-way class.
double QuantizeToJudgeGrid(double score);

/// Five integer ratings in 1..5 whose mean is `mean` (a multiple of 0.2).
std::vector<int> RatingsWithMean(double mean, int rotation);

}  // namespace certainty

#endif  // CERTAINTY_SYNTHETIC_H_
