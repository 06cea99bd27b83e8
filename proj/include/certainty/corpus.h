// certainty/corpus.h

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

#ifndef CERTAINTY_CORPUS_H_
#define CERTAINTY_CORPUS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "certainty/lexicon.h"
#include "certainty/prosody.h"
#include "json.hpp"

namespace certainty {

constexpr int kManifestSchemaVersion = 1;
constexpr int kDefaultJudgeCount = 5;

enum class Domain { kTransit, kVocabulary };

struct Slot {
  std::vector<std::string> options;  // each option may span several words
  std::vector<int> correct;          // acceptable option indices
};

/// A prompt: the fixed context sentence with one or more slots ("___" in
/// context_text), plus an optional control word used for localization.
struct Item {
  std::string item_id;
  Domain domain = Domain::kTransit;
  std::string context_text;
  std::vector<Slot> slots;
  std::optional<std::string> control_word;
};

enum class Correctness { kCorrect, kIncorrect };

struct WordSpan {
  int start_word = 0;  // inclusive
  int end_word = 0;    // inclusive
};

struct TargetSpan {
  WordSpan words;
  std::optional<Interval> time;  // manual alignment; absent until segmented
};

struct ControlSpan {
  int word_index = 0;
  std::optional<Interval> time;
};

struct Utterance {
  std::string utterance_id;
  std::string speaker_id;
  std::string item_id;
  std::string audio;           // as written in the manifest
  std::filesystem::path audio_path;  // resolved against the manifest directory
  int sample_rate = 0;
  double duration = 0.0;       // filled in when audio is checked
  std::vector<std::string> transcript;
  std::vector<TargetSpan> target_spans;  // one per slot
  std::optional<ControlSpan> control_span;
  std::vector<int> chosen_options;
  Correctness correctness = Correctness::kIncorrect;
  int self_rating = 0;
  std::vector<int> listener_ratings;
  int presentation_ordinal = 0;

  double perceived_mean() const;
  bool single_target() const { return target_spans.size() == 1; }
  bool aligned() const;
};

struct Corpus {
  int schema_version = kManifestSchemaVersion;
  std::vector<std::string> judges;
  std::vector<Item> items;
  std::vector<Utterance> utterances;
  std::filesystem::path base_dir;
  std::optional<std::string> lexicon_path;  // as written in the manifest

  const Item *FindItem(std::string_view item_id) const;
  const Utterance *FindUtterance(std::string_view utterance_id) const;
  /// Sorted, unique.
  std::vector<std::string> Speakers() const;
};

struct LoadOptions {
  // Decode every referenced WAV and check rate and span bounds.
  bool check_audio = true;
};

/// Parses and validates a manifest. SchemaViolation messages carry a JSON
/// path to the offending field; ratings outside 1..5 raise RatingOutOfRange;
/// absent audio raises MissingAudio; undecodable audio re-raises the decode
/// error naming the utterance.
Corpus LoadManifest(const std::filesystem::path &path,
                    const LoadOptions &options = {});
Corpus ParseManifest(const nlohmann::json &doc,
                     const std::filesystem::path &base_dir,
                     const LoadOptions &options = {});
nlohmann::ordered_json ManifestToJson(const Corpus &corpus);

/// Lexicon named by the manifest, or an empty one.
Lexicon LoadCorpusLexicon(const Corpus &corpus);

// ---------------------------------------------------------------------------
// Certainty codings

enum class Certainty { kCertain, kUncertain };
enum class SelfAwareness { kSelfAware, kMisconception, kLacksConfidenceOrLuckyGuess };
enum class Transparency { kTransparent, kOpaqueBroadcaster, kOpaqueMeek };

std::string_view CertaintyName(Certainty c);
std::string_view SelfAwarenessName(SelfAwareness s);
std::string_view TransparencyName(Transparency t);
std::string_view CorrectnessName(Correctness c);

/// rating < 3 is uncertain. Throws OutOfRange outside [1, 5].
Certainty BinaryCertainty(double rating);
SelfAwareness ClassifySelfAwareness(int self_rating, Correctness correctness);
Transparency ClassifyTransparency(int self_rating, double perceived_mean);

struct CodingSummary {
  std::size_t utterances = 0;
  std::size_t self_aware = 0, misconception = 0, lacks_confidence = 0;
  std::size_t transparent = 0, broadcaster = 0, meek = 0;

  double self_awareness_rate() const;
  double transparency_rate() const;
};

CodingSummary SummarizeCodings(const Corpus &corpus);

// ---------------------------------------------------------------------------
// Nonprosodic features

constexpr int kNumNonprosodicFeatures = 20;

std::string_view NonprosodicFeatureName(int index);
std::optional<int> ParseNonprosodicFeature(std::string_view name);

struct NonprosodicFeatureVector {
  std::array<double, kNumNonprosodicFeatures> values{};
};

/// The speaker's utterances presented before `utterance`, in session order.
std::vector<const Utterance *> SessionHistory(const Corpus &corpus,
                                              const Utterance &utterance);

/// Features of the single target span. Throws MultipleTargets when the
/// utterance has more than one slot and no slot index is given.
NonprosodicFeatureVector NonprosodicFeatures(
    const Utterance &utterance, const Lexicon &lexicon,
    std::span<const Utterance *const> history,
    std::optional<int> slot = std::nullopt);

/// Same features with an arbitrary word span proposed as the target (used
/// when the control word stands in for the slot word).
NonprosodicFeatureVector NonprosodicFeaturesForSpan(
    const Utterance &utterance, WordSpan span, const Lexicon &lexicon,
    std::span<const Utterance *const> history);

/// Syllables of a word range of the transcript (inclusive bounds).
int CountSyllables(const Lexicon &lexicon, std::span<const std::string> words);

}  // namespace certainty

#endif  // CERTAINTY_CORPUS_H_
