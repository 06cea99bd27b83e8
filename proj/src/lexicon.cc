// certainty/src/lexicon.cc

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

#include "certainty/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "certainty/error.h"

namespace certainty {

namespace {

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool IsLetter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Letters only, lowercase.
std::string Letters(std::string_view word) {
  std::string out;
  for (char c : word)
    if (IsLetter(c)) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

Error Schema(const std::string &msg) {
  return Error(ErrorKind::kSchemaViolation, "lexicon: " + msg);
}

}  // namespace

std::string_view PosName(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun: return "noun";
    case PartOfSpeech::kVerb: return "verb";
    case PartOfSpeech::kAdjective: return "adjective";
    case PartOfSpeech::kAdverb: return "adverb";
    case PartOfSpeech::kOther: return "other";
  }
  return "other";
}

std::optional<PartOfSpeech> ParsePos(std::string_view name) {
  for (auto p : {PartOfSpeech::kNoun, PartOfSpeech::kVerb, PartOfSpeech::kAdjective,
                 PartOfSpeech::kAdverb, PartOfSpeech::kOther})
    if (PosName(p) == name) return p;
  return std::nullopt;
}

std::string NormalizeWord(std::string_view word) {
  std::size_t b = 0, e = word.size();
  while (b < e && !IsLetter(word[b]) && !std::isdigit(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && !IsLetter(word[e - 1]) && !std::isdigit(static_cast<unsigned char>(word[e - 1]))) --e;
  std::string out(word.substr(b, e - b));
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int CountSyllablesHeuristic(std::string_view word) {
  std::string w = Letters(word);
  if (w.empty()) return 0;
  int groups = 0;
  bool in_vowel = false;
  for (char c : w) {
    bool v = IsVowel(c);
    if (v && !in_vowel) ++groups;
    in_vowel = v;
  }
  // Silent final e ("take", "line"), but not consonant+le ("able").
  if (groups > 1 && w.back() == 'e' && !IsVowel(w[w.size() - 2])) {
    bool consonant_le = w.size() >= 3 && w[w.size() - 2] == 'l' && !IsVowel(w[w.size() - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

int CountPhonemesHeuristic(std::string_view word) {
  std::string w = Letters(word);
  if (w.empty()) return 0;
  static const char *kDigraphs[] = {"th", "sh", "ch", "ph", "ng", "ck", "wh", "gh"};
  int count = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 1 < w.size()) {
      std::string_view pair(&w[i], 2);
      bool digraph = std::any_of(std::begin(kDigraphs), std::end(kDigraphs),
                                 [&](const char *d) { return pair == d; });
      if (digraph || (w[i] == w[i + 1] && !IsVowel(w[i]))) {
        ++count;
        ++i;
        continue;
      }
    }
    ++count;
  }
  if (w.size() > 2 && w.back() == 'e' && !IsVowel(w[w.size() - 2])) --count;
  return std::max(count, 1);
}

void Lexicon::Add(std::string_view word, LexiconEntry entry) {
  std::string key = NormalizeWord(word);
  if (key.empty()) throw Schema("empty word");
  if (entry.phonemes < 1 || entry.syllables < 1)
    throw Schema("'" + key + "': counts must be positive");
  if (!(entry.log_prob <= 0.0))
    throw Schema("'" + key + "': log_prob must be <= 0");
  if (entry.pos.empty()) entry.pos.push_back(PartOfSpeech::kOther);
  min_log_prob_ = min_log_prob_ ? std::min(*min_log_prob_, entry.log_prob) : entry.log_prob;
  entries_[key] = std::move(entry);
}

const LexiconEntry *Lexicon::Find(std::string_view word) const {
  auto it = entries_.find(NormalizeWord(word));
  return it == entries_.end() ? nullptr : &it->second;
}

int Lexicon::Syllables(std::string_view word) const {
  const auto *e = Find(word);
  return e ? e->syllables : CountSyllablesHeuristic(word);
}

int Lexicon::Phonemes(std::string_view word) const {
  const auto *e = Find(word);
  return e ? e->phonemes : CountPhonemesHeuristic(word);
}

std::vector<PartOfSpeech> Lexicon::Pos(std::string_view word) const {
  const auto *e = Find(word);
  return e ? e->pos : std::vector<PartOfSpeech>{PartOfSpeech::kOther};
}

double Lexicon::floor_log_prob() const {
  return min_log_prob_ ? *min_log_prob_ - 1.0 : kEmptyLexiconLogProb;
}

double Lexicon::LogProb(std::string_view word) const {
  const auto *e = Find(word);
  return e ? e->log_prob : floor_log_prob();
}

Lexicon Lexicon::FromJson(const nlohmann::json &doc) {
  Lexicon lex;
  if (!doc.is_object() || !doc.contains("words") || !doc["words"].is_object())
    throw Schema("expected an object with a 'words' map");
  for (const auto &[word, v] : doc["words"].items()) {
    try {
      LexiconEntry e;
      e.phonemes = v.at("phonemes").get<int>();
      e.syllables = v.at("syllables").get<int>();
      e.log_prob = v.at("log_prob").get<double>();
      if (v.contains("pos")) {
        for (const auto &p : v["pos"]) {
          auto pos = ParsePos(p.get<std::string>());
          if (!pos) throw Schema("words." + word + ".pos: unknown tag");
          e.pos.push_back(*pos);
        }
      }
      lex.Add(word, std::move(e));
    } catch (const nlohmann::json::exception &ex) {
      throw Schema("words." + word + ": " + ex.what());
    }
  }
  return lex;
}

Lexicon Lexicon::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception &ex) {
    throw Schema(path + ": " + ex.what());
  }
  return FromJson(doc);
}

nlohmann::json Lexicon::ToJson() const {
  nlohmann::json words = nlohmann::json::object();
  for (const auto &[word, e] : entries_) {
    nlohmann::json pos = nlohmann::json::array();
    for (auto p : e.pos) pos.push_back(PosName(p));
    words[word] = {{"phonemes", e.phonemes},
                   {"syllables", e.syllables},
                   {"pos", pos},
                   {"log_prob", e.log_prob}};
  }
  return {{"schema_version", 1}, {"words", words}};
}

}  // namespace certainty
