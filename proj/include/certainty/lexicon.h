// certainty/lexicon.h

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

#ifndef CERTAINTY_LEXICON_H_
#define CERTAINTY_LEXICON_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace certainty {

enum class PartOfSpeech { kNoun, kVerb, kAdjective, kAdverb, kOther };
constexpr int kNumPosTags = 5;

std::string_view PosName(PartOfSpeech pos);
std::optional<PartOfSpeech> ParsePos(std::string_view name);

struct LexiconEntry {
  int phonemes = 0;
  int syllables = 0;
  std::vector<PartOfSpeech> pos;
  double log_prob = 0.0;  // natural log, <= 0
};

// Floor used for out-of-vocabulary words when the lexicon has no entries.
constexpr double kEmptyLexiconLogProb = -20.0;

/// Word-level pronunciation and frequency data. Lookups are case-insensitive
/// and ignore surrounding punctuation. Words that are absent fall back to
/// spelling heuristics for counts, {other} for part of speech, and the
/// lexicon's minimum log probability minus one.
class Lexicon {
 public:
  Lexicon() = default;

  /// Throws SchemaViolation for nonpositive counts or log_prob > 0.
  void Add(std::string_view word, LexiconEntry entry);

  const LexiconEntry *Find(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

  int Syllables(std::string_view word) const;
  int Phonemes(std::string_view word) const;
  std::vector<PartOfSpeech> Pos(std::string_view word) const;
  double LogProb(std::string_view word) const;
  double floor_log_prob() const;

  static Lexicon FromJson(const nlohmann::json &doc);
  static Lexicon Load(const std::string &path);
  nlohmann::json ToJson() const;

 private:
  std::map<std::string, LexiconEntry, std::less<>> entries_;
  std::optional<double> min_log_prob_;
};

/// Lowercase with leading/trailing non-letters removed.
std::string NormalizeWord(std::string_view word);

/// Vowel-group count with a silent-final-e correction; at least 1 for any
/// word containing a letter.
int CountSyllablesHeuristic(std::string_view word);

/// Letter count with common digraphs, doubled consonants and a silent final e
/// collapsed.
int CountPhonemesHeuristic(std::string_view word);

}  // namespace certainty

#endif  // CERTAINTY_LEXICON_H_
