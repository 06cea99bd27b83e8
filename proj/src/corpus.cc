// certainty/src/corpus.cc

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

#include "certainty/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "certainty/audio.h"
#include "certainty/error.h"

namespace certainty {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kSpanSlack = 1e-6;

Error Schema(const std::string &path, const std::string &msg) {
  return Error(ErrorKind::kSchemaViolation, path + ": " + msg);
}

const json &Field(const json &obj, const char *key, const std::string &path) {
  if (!obj.is_object()) throw Schema(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Schema(path + "." + key, "missing");
  return *it;
}

const json *OptionalField(const json &obj, const char *key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string AsString(const json &j, const std::string &path) {
  if (!j.is_string()) throw Schema(path, "expected a string");
  return j.get<std::string>();
}

int AsInt(const json &j, const std::string &path) {
  if (!j.is_number_integer()) throw Schema(path, "expected an integer");
  return j.get<int>();
}

double AsNumber(const json &j, const std::string &path) {
  if (!j.is_number()) throw Schema(path, "expected a number");
  return j.get<double>();
}

const json &AsArray(const json &j, const std::string &path) {
  if (!j.is_array()) throw Schema(path, "expected an array");
  return j;
}

int Rating(const json &j, const std::string &path) {
  int r = AsInt(j, path);
  if (r < 1 || r > 5)
    throw Error(ErrorKind::kRatingOutOfRange,
                path + ": rating " + std::to_string(r) + " outside 1..5");
  return r;
}

std::optional<Interval> ReadTime(const json &obj, const std::string &path) {
  const json *s = OptionalField(obj, "start_s");
  const json *e = OptionalField(obj, "end_s");
  if (!s && !e) return std::nullopt;
  if (!s || !e) throw Schema(path, "start_s and end_s must appear together");
  Interval iv{AsNumber(*s, path + ".start_s"), AsNumber(*e, path + ".end_s")};
  if (!(iv.end > iv.start)) throw Schema(path, "end_s must exceed start_s");
  return iv;
}

std::vector<std::string> SplitWords(const std::string &text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

Item ParseItem(const json &j, const std::string &path) {
  Item item;
  item.item_id = AsString(Field(j, "item_id", path), path + ".item_id");
  std::string domain = AsString(Field(j, "domain", path), path + ".domain");
  if (domain == "transit") {
    item.domain = Domain::kTransit;
  } else if (domain == "vocabulary") {
    item.domain = Domain::kVocabulary;
  } else {
    throw Schema(path + ".domain", "expected 'transit' or 'vocabulary'");
  }
  item.context_text = AsString(Field(j, "context_text", path), path + ".context_text");
  const json &slots = AsArray(Field(j, "slots", path), path + ".slots");
  if (slots.empty()) throw Schema(path + ".slots", "an item needs at least one slot");
  for (std::size_t s = 0; s < slots.size(); ++s) {
    std::string sp = path + ".slots[" + std::to_string(s) + "]";
    Slot slot;
    const json &opts = AsArray(Field(slots[s], "options", sp), sp + ".options");
    for (std::size_t o = 0; o < opts.size(); ++o)
      slot.options.push_back(AsString(opts[o], sp + ".options[" + std::to_string(o) + "]"));
    if (slot.options.size() < 2) throw Schema(sp + ".options", "need at least two options");
    if (const json *c = OptionalField(slots[s], "correct")) {
      for (std::size_t k = 0; k < AsArray(*c, sp + ".correct").size(); ++k) {
        int idx = AsInt((*c)[k], sp + ".correct[" + std::to_string(k) + "]");
        if (idx < 0 || idx >= static_cast<int>(slot.options.size()))
          throw Schema(sp + ".correct", "option index out of range");
        slot.correct.push_back(idx);
      }
    }
    item.slots.push_back(std::move(slot));
  }
  if (const json *cw = OptionalField(j, "control_word")) {
    std::string word = NormalizeWord(AsString(*cw, path + ".control_word"));
    for (const auto &slot : item.slots)
      for (const auto &opt : slot.options)
        for (const auto &w : SplitWords(opt))
          if (NormalizeWord(w) == word)
            throw Schema(path + ".control_word", "control word is also a slot word");
    item.control_word = AsString(*cw, path + ".control_word");
  }
  return item;
}

Utterance ParseUtterance(const json &j, const std::string &path, const Corpus &corpus,
                         const LoadOptions &options) {
  Utterance u;
  u.utterance_id = AsString(Field(j, "utterance_id", path), path + ".utterance_id");
  u.speaker_id = AsString(Field(j, "speaker_id", path), path + ".speaker_id");
  u.item_id = AsString(Field(j, "item_id", path), path + ".item_id");
  const Item *item = corpus.FindItem(u.item_id);
  if (!item) throw Schema(path + ".item_id", "unknown item '" + u.item_id + "'");

  u.audio = AsString(Field(j, "audio", path), path + ".audio");
  u.audio_path = corpus.base_dir / u.audio;
  u.sample_rate = AsInt(Field(j, "sample_rate", path), path + ".sample_rate");
  if (u.sample_rate < kMinSampleRate)
    throw Schema(path + ".sample_rate", "below " + std::to_string(kMinSampleRate) + " Hz");

  const json &words = AsArray(Field(j, "transcript", path), path + ".transcript");
  for (std::size_t k = 0; k < words.size(); ++k)
    u.transcript.push_back(AsString(words[k], path + ".transcript[" + std::to_string(k) + "]"));
  if (u.transcript.empty()) throw Schema(path + ".transcript", "empty transcript");
  const int n_words = static_cast<int>(u.transcript.size());

  const json &spans = AsArray(Field(j, "target_spans", path), path + ".target_spans");
  for (std::size_t k = 0; k < spans.size(); ++k) {
    std::string sp = path + ".target_spans[" + std::to_string(k) + "]";
    TargetSpan span;
    span.words.start_word = AsInt(Field(spans[k], "start_word", sp), sp + ".start_word");
    span.words.end_word = AsInt(Field(spans[k], "end_word", sp), sp + ".end_word");
    if (span.words.start_word < 0 || span.words.end_word < span.words.start_word ||
        span.words.end_word >= n_words)
      throw Schema(sp, "word indices outside transcript");
    span.time = ReadTime(spans[k], sp);
    u.target_spans.push_back(span);
  }
  if (u.target_spans.size() != item->slots.size())
    throw Schema(path + ".target_spans", "expected one span per item slot (" +
                                             std::to_string(item->slots.size()) + ")");
  for (std::size_t k = 1; k < u.target_spans.size(); ++k)
    if (u.target_spans[k].words.start_word <= u.target_spans[k - 1].words.end_word)
      throw Schema(path + ".target_spans", "word spans must be ordered and disjoint");

  if (const json *cs = OptionalField(j, "control_span")) {
    std::string sp = path + ".control_span";
    ControlSpan c;
    c.word_index = AsInt(Field(*cs, "word_index", sp), sp + ".word_index");
    if (c.word_index < 0 || c.word_index >= n_words)
      throw Schema(sp + ".word_index", "outside transcript");
    for (const auto &t : u.target_spans)
      if (c.word_index >= t.words.start_word && c.word_index <= t.words.end_word)
        throw Schema(sp + ".word_index", "control word lies inside a target span");
    if (!item->control_word)
      throw Schema(sp, "item '" + item->item_id + "' marks no control word");
    if (NormalizeWord(u.transcript[c.word_index]) != NormalizeWord(*item->control_word))
      throw Schema(sp + ".word_index", "transcript word does not match the item's control word");
    c.time = ReadTime(*cs, sp);
    u.control_span = c;
  }

  if (const json *ch = OptionalField(j, "chosen_options")) {
    for (std::size_t k = 0; k < AsArray(*ch, path + ".chosen_options").size(); ++k) {
      std::string cp = path + ".chosen_options[" + std::to_string(k) + "]";
      int idx = AsInt((*ch)[k], cp);
      if (k >= item->slots.size() || idx < 0 ||
          idx >= static_cast<int>(item->slots[k].options.size()))
        throw Schema(cp, "option index out of range");
      u.chosen_options.push_back(idx);
    }
    if (u.chosen_options.size() != item->slots.size())
      throw Schema(path + ".chosen_options", "expected one choice per slot");
  }
  if (const json *c = OptionalField(j, "correctness")) {
    std::string v = AsString(*c, path + ".correctness");
    if (v == "correct") {
      u.correctness = Correctness::kCorrect;
    } else if (v == "incorrect") {
      u.correctness = Correctness::kIncorrect;
    } else {
      throw Schema(path + ".correctness", "expected 'correct' or 'incorrect'");
    }
  } else if (!u.chosen_options.empty()) {
    // A tuple is correct only if every slot is.
    bool all = true;
    for (std::size_t k = 0; k < item->slots.size(); ++k) {
      const auto &ok = item->slots[k].correct;
      all = all && std::find(ok.begin(), ok.end(), u.chosen_options[k]) != ok.end();
    }
    u.correctness = all ? Correctness::kCorrect : Correctness::kIncorrect;
  } else {
    throw Schema(path, "needs 'correctness' or 'chosen_options'");
  }

  u.self_rating = Rating(Field(j, "self_rating", path), path + ".self_rating");
  const json &lr = AsArray(Field(j, "listener_ratings", path), path + ".listener_ratings");
  for (std::size_t k = 0; k < lr.size(); ++k)
    u.listener_ratings.push_back(Rating(lr[k], path + ".listener_ratings[" + std::to_string(k) + "]"));
  if (u.listener_ratings.size() != corpus.judges.size())
    throw Schema(path + ".listener_ratings",
                 "expected " + std::to_string(corpus.judges.size()) + " ratings");
  u.presentation_ordinal =
      AsInt(Field(j, "presentation_ordinal", path), path + ".presentation_ordinal");
  if (u.presentation_ordinal < 1) throw Schema(path + ".presentation_ordinal", "must be >= 1");

  if (options.check_audio) {
    if (!fs::exists(u.audio_path))
      throw Error(ErrorKind::kMissingAudio, path + " (" + u.utterance_id +
                                                "): audio file not found: " +
                                                u.audio_path.string());
    try {
      AudioClip clip = ReadWavFile(u.audio_path.string());
      if (clip.sample_rate() != u.sample_rate)
        throw Schema(path + ".sample_rate", "manifest says " + std::to_string(u.sample_rate) +
                                                " Hz but the file is " +
                                                std::to_string(clip.sample_rate()) + " Hz");
      u.duration = clip.duration();
    } catch (const Error &e) {
      if (e.kind() == ErrorKind::kSchemaViolation) throw;
      throw Error(e.kind(), "utterance " + u.utterance_id + " (" + u.audio_path.string() +
                                "): " + e.what());
    }
    std::vector<Interval> times;
    for (const auto &t : u.target_spans)
      if (t.time) times.push_back(*t.time);
    if (u.control_span && u.control_span->time) times.push_back(*u.control_span->time);
    std::sort(times.begin(), times.end(),
              [](const Interval &a, const Interval &b) { return a.start < b.start; });
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k].start < -kSpanSlack || times[k].end > u.duration + kSpanSlack)
        throw Schema(path, "time span outside clip duration " + FormatDouble(u.duration));
      if (k > 0 && times[k].start < times[k - 1].end - kSpanSlack)
        throw Schema(path, "time spans overlap");
    }
  }
  return u;
}

void WriteTime(json *obj, const std::optional<Interval> &t) {
  if (!t) return;
  (*obj)["start_s"] = t->start;
  (*obj)["end_s"] = t->end;
}

}  // namespace

double Utterance::perceived_mean() const {
  if (listener_ratings.empty()) return 0.0;
  double sum = 0;
  for (int r : listener_ratings) sum += r;
  return sum / listener_ratings.size();
}

bool Utterance::aligned() const {
  return !target_spans.empty() &&
         std::all_of(target_spans.begin(), target_spans.end(),
                     [](const TargetSpan &t) { return t.time.has_value(); });
}

const Item *Corpus::FindItem(std::string_view item_id) const {
  for (const auto &item : items)
    if (item.item_id == item_id) return &item;
  return nullptr;
}

const Utterance *Corpus::FindUtterance(std::string_view utterance_id) const {
  for (const auto &u : utterances)
    if (u.utterance_id == utterance_id) return &u;
  return nullptr;
}

std::vector<std::string> Corpus::Speakers() const {
  std::set<std::string> s;
  for (const auto &u : utterances) s.insert(u.speaker_id);
  return {s.begin(), s.end()};
}

Corpus ParseManifest(const json &doc, const fs::path &base_dir,
                     const LoadOptions &options) {
  Corpus corpus;
  corpus.base_dir = base_dir;
  if (!doc.is_object()) throw Schema("$", "manifest must be a JSON object");
  corpus.schema_version = AsInt(Field(doc, "schema_version", "$"), "$.schema_version");
  if (corpus.schema_version != kManifestSchemaVersion)
    throw Schema("$.schema_version", "unsupported version " +
                                         std::to_string(corpus.schema_version));
  if (const json *judges = OptionalField(doc, "judges")) {
    for (std::size_t k = 0; k < AsArray(*judges, "$.judges").size(); ++k)
      corpus.judges.push_back(AsString((*judges)[k], "$.judges[" + std::to_string(k) + "]"));
    if (corpus.judges.empty()) throw Schema("$.judges", "need at least one judge");
  } else {
    for (int k = 1; k <= kDefaultJudgeCount; ++k) corpus.judges.push_back("j" + std::to_string(k));
  }
  if (const json *lex = OptionalField(doc, "lexicon"))
    corpus.lexicon_path = AsString(*lex, "$.lexicon");

  const json &items = AsArray(Field(doc, "items", "$"), "$.items");
  std::set<std::string> item_ids;
  for (std::size_t k = 0; k < items.size(); ++k) {
    std::string p = "$.items[" + std::to_string(k) + "]";
    Item item = ParseItem(items[k], p);
    if (!item_ids.insert(item.item_id).second) throw Schema(p + ".item_id", "duplicate id");
    corpus.items.push_back(std::move(item));
  }

  const json &utts = AsArray(Field(doc, "utterances", "$"), "$.utterances");
  std::set<std::string> utt_ids;
  std::set<std::pair<std::string, int>> ordinals;
  for (std::size_t k = 0; k < utts.size(); ++k) {
    std::string p = "$.utterances[" + std::to_string(k) + "]";
    Utterance u = ParseUtterance(utts[k], p, corpus, options);
    if (!utt_ids.insert(u.utterance_id).second)
      throw Schema(p + ".utterance_id", "duplicate id '" + u.utterance_id + "'");
    if (!ordinals.insert({u.speaker_id, u.presentation_ordinal}).second)
      throw Schema(p + ".presentation_ordinal", "repeated within speaker " + u.speaker_id);
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

Corpus LoadManifest(const fs::path &path, const LoadOptions &options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &ex) {
    throw Schema(path.string(), std::string("not valid JSON: ") + ex.what());
  }
  return ParseManifest(doc, path.parent_path(), options);
}

nlohmann::ordered_json ManifestToJson(const Corpus &corpus) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  doc["schema_version"] = corpus.schema_version;
  doc["judges"] = corpus.judges;
  if (corpus.lexicon_path) doc["lexicon"] = *corpus.lexicon_path;
  doc["items"] = ojson::array();
  for (const auto &item : corpus.items) {
    ojson j;
    j["item_id"] = item.item_id;
    j["domain"] = item.domain == Domain::kTransit ? "transit" : "vocabulary";
    j["context_text"] = item.context_text;
    j["slots"] = ojson::array();
    for (const auto &s : item.slots) j["slots"].push_back({{"options", s.options}, {"correct", s.correct}});
    if (item.control_word) j["control_word"] = *item.control_word;
    doc["items"].push_back(std::move(j));
  }
  doc["utterances"] = ojson::array();
  for (const auto &u : corpus.utterances) {
    ojson j;
    j["utterance_id"] = u.utterance_id;
    j["speaker_id"] = u.speaker_id;
    j["item_id"] = u.item_id;
    j["audio"] = u.audio;
    j["sample_rate"] = u.sample_rate;
    j["transcript"] = u.transcript;
    j["target_spans"] = ojson::array();
    for (const auto &t : u.target_spans) {
      json s = {{"start_word", t.words.start_word}, {"end_word", t.words.end_word}};
      WriteTime(&s, t.time);
      j["target_spans"].push_back(ojson::parse(s.dump()));
    }
    if (u.control_span) {
      json c = {{"word_index", u.control_span->word_index}};
      WriteTime(&c, u.control_span->time);
      j["control_span"] = ojson::parse(c.dump());
    }
    if (!u.chosen_options.empty()) j["chosen_options"] = u.chosen_options;
    j["correctness"] = CorrectnessName(u.correctness);
    j["self_rating"] = u.self_rating;
    j["listener_ratings"] = u.listener_ratings;
    j["presentation_ordinal"] = u.presentation_ordinal;
    doc["utterances"].push_back(std::move(j));
  }
  return doc;
}

Lexicon LoadCorpusLexicon(const Corpus &corpus) {
  if (!corpus.lexicon_path) return Lexicon();
  return Lexicon::Load((corpus.base_dir / *corpus.lexicon_path).string());
}

std::string_view CertaintyName(Certainty c) {
  return c == Certainty::kCertain ? "certain" : "uncertain";
}

std::string_view SelfAwarenessName(SelfAwareness s) {
  switch (s) {
    case SelfAwareness::kSelfAware: return "self_aware";
    case SelfAwareness::kMisconception: return "misconception";
    case SelfAwareness::kLacksConfidenceOrLuckyGuess: return "lacks_confidence_or_lucky_guess";
  }
  return "";
}

std::string_view TransparencyName(Transparency t) {
  switch (t) {
    case Transparency::kTransparent: return "transparent";
    case Transparency::kOpaqueBroadcaster: return "opaque_broadcaster";
    case Transparency::kOpaqueMeek: return "opaque_meek";
  }
  return "";
}

std::string_view CorrectnessName(Correctness c) {
  return c == Correctness::kCorrect ? "correct" : "incorrect";
}

Certainty BinaryCertainty(double rating) {
  if (!(rating >= 1.0 && rating <= 5.0))
    throw Error(ErrorKind::kOutOfRange, "rating " + FormatDouble(rating) + " outside [1, 5]");
  return rating < 3.0 ? Certainty::kUncertain : Certainty::kCertain;
}

SelfAwareness ClassifySelfAwareness(int self_rating, Correctness correctness) {
  const bool certain = BinaryCertainty(self_rating) == Certainty::kCertain;
  const bool correct = correctness == Correctness::kCorrect;
  if (certain == correct) return SelfAwareness::kSelfAware;
  return certain ? SelfAwareness::kMisconception : SelfAwareness::kLacksConfidenceOrLuckyGuess;
}

Transparency ClassifyTransparency(int self_rating, double perceived_mean) {
  Certainty self = BinaryCertainty(self_rating);
  Certainty perceived = BinaryCertainty(perceived_mean);
  if (self == perceived) return Transparency::kTransparent;
  return self == Certainty::kUncertain ? Transparency::kOpaqueBroadcaster
                                       : Transparency::kOpaqueMeek;
}

double CodingSummary::self_awareness_rate() const {
  return utterances ? static_cast<double>(self_aware) / utterances : 0.0;
}

double CodingSummary::transparency_rate() const {
  return utterances ? static_cast<double>(transparent) / utterances : 0.0;
}

CodingSummary SummarizeCodings(const Corpus &corpus) {
  CodingSummary s;
  for (const auto &u : corpus.utterances) {
    ++s.utterances;
    switch (ClassifySelfAwareness(u.self_rating, u.correctness)) {
      case SelfAwareness::kSelfAware: ++s.self_aware; break;
      case SelfAwareness::kMisconception: ++s.misconception; break;
      case SelfAwareness::kLacksConfidenceOrLuckyGuess: ++s.lacks_confidence; break;
    }
    switch (ClassifyTransparency(u.self_rating, u.perceived_mean())) {
      case Transparency::kTransparent: ++s.transparent; break;
      case Transparency::kOpaqueBroadcaster: ++s.broadcaster; break;
      case Transparency::kOpaqueMeek: ++s.meek; break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, kNumNonprosodicFeatures> kNonprosodicNames = {
    "pos_target_noun",   "pos_target_verb",   "pos_target_adjective",
    "pos_target_adverb", "pos_target_other",  "pos_prev_noun",
    "pos_prev_verb",     "pos_prev_adjective", "pos_prev_adverb",
    "pos_prev_other",    "presentation_ordinal", "index_from_start",
    "index_from_end",    "relative_position", "char_count",
    "phoneme_count",     "syllable_count",    "familiarity",
    "log_probability",   "has_preceding_word",
};

int CountOccurrences(const std::vector<std::string> &haystack,
                     const std::vector<std::string> &needle) {
  if (needle.empty() || haystack.size() < needle.size()) return 0;
  int count = 0;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k)
      match = NormalizeWord(haystack[i + k]) == needle[k];
    if (match) ++count;
  }
  return count;
}

}  // namespace

std::string_view NonprosodicFeatureName(int index) { return kNonprosodicNames.at(index); }

std::optional<int> ParseNonprosodicFeature(std::string_view name) {
  for (int i = 0; i < kNumNonprosodicFeatures; ++i)
    if (kNonprosodicNames[i] == name) return i;
  return std::nullopt;
}

std::vector<const Utterance *> SessionHistory(const Corpus &corpus,
                                              const Utterance &utterance) {
  std::vector<const Utterance *> out;
  for (const auto &u : corpus.utterances)
    if (u.speaker_id == utterance.speaker_id &&
        u.presentation_ordinal < utterance.presentation_ordinal)
      out.push_back(&u);
  std::sort(out.begin(), out.end(), [](const Utterance *a, const Utterance *b) {
    return a->presentation_ordinal < b->presentation_ordinal;
  });
  return out;
}

int CountSyllables(const Lexicon &lexicon, std::span<const std::string> words) {
  int n = 0;
  for (const auto &w : words) n += lexicon.Syllables(w);
  return n;
}

NonprosodicFeatureVector NonprosodicFeaturesForSpan(
    const Utterance &utterance, WordSpan span, const Lexicon &lexicon,
    std::span<const Utterance *const> history) {
  const int n = static_cast<int>(utterance.transcript.size());
  if (span.start_word < 0 || span.end_word < span.start_word || span.end_word >= n)
    throw Error(ErrorKind::kInvalidParameters, "word span outside transcript of " +
                                                   utterance.utterance_id);
  NonprosodicFeatureVector v;
  auto &x = v.values;
  std::vector<std::string> target;
  for (int i = span.start_word; i <= span.end_word; ++i)
    target.push_back(NormalizeWord(utterance.transcript[i]));

  for (const auto &w : target)
    for (auto pos : lexicon.Pos(w)) x[static_cast<int>(pos)] = 1.0;
  if (span.start_word > 0) {
    for (auto pos : lexicon.Pos(utterance.transcript[span.start_word - 1]))
      x[kNumPosTags + static_cast<int>(pos)] = 1.0;
    x[19] = 1.0;
  }
  x[10] = utterance.presentation_ordinal;
  x[11] = span.start_word;
  x[12] = n - 1 - span.end_word;
  x[13] = static_cast<double>(span.start_word) / n;
  double chars = 0, phonemes = 0, syllables = 0, log_prob = 0;
  for (const auto &w : target) {
    chars += static_cast<double>(w.size());
    phonemes += lexicon.Phonemes(w);
    syllables += lexicon.Syllables(w);
    log_prob += lexicon.LogProb(w);
  }
  x[14] = chars;
  x[15] = phonemes;
  x[16] = syllables;
  int familiarity = 0;
  for (const Utterance *prev : history) familiarity += CountOccurrences(prev->transcript, target);
  x[17] = familiarity;
  x[18] = log_prob;
  return v;
}

NonprosodicFeatureVector NonprosodicFeatures(const Utterance &utterance,
                                             const Lexicon &lexicon,
                                             std::span<const Utterance *const> history,
                                             std::optional<int> slot) {
  if (!slot && utterance.target_spans.size() != 1)
    throw Error(ErrorKind::kMultipleTargets,
                utterance.utterance_id + " has " +
                    std::to_string(utterance.target_spans.size()) +
                    " target spans; choose a slot");
  const int s = slot.value_or(0);
  if (s < 0 || s >= static_cast<int>(utterance.target_spans.size()))
    throw Error(ErrorKind::kInvalidParameters, "slot index out of range");
  return NonprosodicFeaturesForSpan(utterance, utterance.target_spans[s].words, lexicon, history);
}

}  // namespace certainty
