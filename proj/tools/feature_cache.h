// certainty/tools/feature_cache.h

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

#ifndef CERTAINTY_TOOLS_FEATURE_CACHE_H_
#define CERTAINTY_TOOLS_FEATURE_CACHE_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certainty/corpus.h"
#include "certainty/experiments.h"
#include "certainty/prosody.h"

namespace certainty {

std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(const std::string &text);

// Tracker output for one clip, stored as <audio sha>-<tracker sha>.json.
// Safe to delete; entries are written to a temporary name and renamed.
class FeatureCache {
 public:
  explicit FeatureCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

  /// Contour and silences for the utterance's audio, from the cache when
  /// possible. Errors name the utterance.
  std::pair<Contour, std::vector<Interval>> Track(const Utterance &utterance,
                                                  const TrackerConfig &tracker) const;

 private:
  std::optional<std::filesystem::path> dir_;
};

/// BuildDataset with the tracker step going through `cache`.
Dataset BuildDatasetCached(const Corpus &corpus, const Lexicon &lexicon,
                           const ExtractionOptions &options, const FeatureCache &cache);

}  // namespace certainty

#endif  // CERTAINTY_TOOLS_FEATURE_CACHE_H_
