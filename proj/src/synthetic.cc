// certainty/src/synthetic.cc

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

#include "certainty/synthetic.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "certainty/audio.h"
#include "certainty/error.h"
#include "certainty/experiments.h"
#include "certainty/models.h"
#include "certainty/random.h"

namespace certainty {
namespace {

namespace fs = std::filesystem;

constexpr double kNoiseFloor = 0.003;
constexpr double kPauseOnset = 0.3;
constexpr double kHesitationRate = 0.15;
constexpr double kPlantedSpread = 1.0;

constexpr const char *kColors[] = {"red",    "blue",   "green",  "orange", "purple", "yellow",
                                   "silver", "golden", "crimson", "violet", "amber", "indigo"};
constexpr const char *kPlaces[] = {"north",   "harbor",  "market", "central", "union",  "river",
                                   "airport", "college", "downtown", "garden", "summit", "valley"};

struct WordSpec {
  std::string text;
  int syllables;
  int phonemes;
  PartOfSpeech pos;
  double log_prob;
};

const std::vector<WordSpec> &Vocabulary() {
  static const std::vector<WordSpec> vocab = [] {
    std::vector<WordSpec> v = {
        {"take", 1, 3, PartOfSpeech::kVerb, -6.0},   {"the", 1, 2, PartOfSpeech::kOther, -3.0},
        {"line", 1, 3, PartOfSpeech::kNoun, -7.0},   {"to", 1, 2, PartOfSpeech::kOther, -3.5},
        {"today", 2, 5, PartOfSpeech::kAdverb, -7.5}, {"at", 1, 2, PartOfSpeech::kOther, -4.0},
        {"ride", 1, 3, PartOfSpeech::kVerb, -8.0},   {"home", 1, 3, PartOfSpeech::kNoun, -6.5}};
    const int color_syl[] = {1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 3};
    const int place_syl[] = {1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2};
    for (int i = 0; i < 12; ++i) {
      const std::string c = kColors[i], p = kPlaces[i];
      v.push_back({c, color_syl[i], static_cast<int>(c.size()) - 1, PartOfSpeech::kAdjective,
                   -9.0 - 0.1 * i});
      v.push_back({p, place_syl[i], static_cast<int>(p.size()) - 1, PartOfSpeech::kNoun,
                   -8.5 - 0.1 * i});
    }
    return v;
  }();
  return vocab;
}

const WordSpec &Word(const std::string &text) {
  for (const auto &w : Vocabulary())
    if (w.text == text) return w;
  throw Error(ErrorKind::kInvalidParameters, "synthetic vocabulary lacks " + text);
}

// Appends a phase-continuous sine gliding linearly from f_start to f_end.
void AppendGlide(std::vector<double> *out, double f_start, double f_end, double amplitude,
                 double duration, int rate, double *phase) {
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  const std::size_t ramp = std::min<std::size_t>(n / 4, static_cast<std::size_t>(rate / 200));
  for (std::size_t i = 0; i < n; ++i) {
    const double f = f_start + (f_end - f_start) * static_cast<double>(i) / n;
    *phase += 2.0 * std::numbers::pi * f / rate;
    double env = 1.0;
    if (i < ramp) env = static_cast<double>(i) / ramp;
    if (n - 1 - i < ramp) env = static_cast<double>(n - 1 - i) / ramp;
    out->push_back(amplitude * env * std::sin(*phase));
  }
}

void AppendSilence(std::vector<double> *out, double duration, int rate) {
  out->insert(out->end(), static_cast<std::size_t>(std::llround(duration * rate)), 0.0);
}

double Now(const std::vector<double> &samples, int rate) {
  return static_cast<double>(samples.size()) / rate;
}

void WriteJson(const fs::path &path, const nlohmann::ordered_json &doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace

double QuantizeToJudgeGrid(double score) {
  const double s = std::clamp(score, 1.0, 5.0);
  const auto cls = ScoreToClass3(s);
  double best = 0.0, best_d = 1e300;
  for (int k = 5; k <= 25; ++k) {
    const double g = k / 5.0;
    if (ScoreToClass3(g) != cls) continue;
    const double d = std::abs(g - s);
    if (d < best_d - 1e-12) {
      best = g;
      best_d = d;
    }
  }
  return best;
}

std::vector<int> RatingsWithMean(double mean, int rotation) {
  const int sum = static_cast<int>(std::lround(mean * 5));
  if (sum < 5 || sum > 25) throw Error(ErrorKind::kRatingOutOfRange, "mean outside [1, 5]");
  std::vector<int> r(5, sum / 5);
  for (int k = 0; k < sum % 5; ++k) ++r[(rotation + k) % 5];
  return r;
}

SyntheticStudy GenerateSyntheticStudy(const fs::path &dir, const SyntheticOptions &options) {
  if (options.speakers < 2 || options.items < 1 || options.items > 12)
    throw Error(ErrorKind::kInvalidParameters, "synthetic study needs >= 2 speakers and 1..12 items");
  const int rate = options.sample_rate;
  fs::create_directories(dir / "wav");
  Rng rng(options.seed);

  Lexicon lexicon;
  for (const auto &w : Vocabulary()) lexicon.Add(w.text, {w.phonemes, w.syllables, {w.pos}, w.log_prob});
  WriteJson(dir / "lexicon.json", nlohmann::ordered_json::parse(lexicon.ToJson().dump()));

  Corpus corpus;
  corpus.base_dir = dir;
  corpus.lexicon_path = "lexicon.json";
  for (int j = 1; j <= kDefaultJudgeCount; ++j) corpus.judges.push_back("j" + std::to_string(j));
  for (int i = 0; i < options.items; ++i) {
    Item item;
    item.item_id = "item" + std::to_string(i + 1);
    const bool control_first = i % 2 == 1;
    item.context_text = control_first ? "At the stop, take the ___ line home."
                                      : "Take the ___ line to the stop today.";
    item.slots.push_back({{kColors[i], kColors[(i + 5) % 12]}, {0}});
    item.control_word = kPlaces[i];
    corpus.items.push_back(std::move(item));
  }

  SyntheticStudy study;
  for (int s = 0; s < options.speakers; ++s) {
    const std::string speaker = "spk" + std::to_string(s + 1);
    const double base_f0 = rng.uniform(100.0, 200.0);
    const double syllable_s = rng.uniform(0.16, 0.22);
    std::vector<int> order(options.items);
    for (int i = 0; i < options.items; ++i) order[i] = i;
    rng.shuffle(&order);
    std::vector<int> ordinal(options.items);
    for (int k = 0; k < options.items; ++k) ordinal[order[k]] = k + 1;

    for (int i = 0; i < options.items; ++i) {
      const Item &item = corpus.items[i];
      const double u = rng.uniform();
      const int chosen = rng.uniform() < 0.5 + 0.4 * (1.0 - u) ? 0 : 1;
      const std::string slot = item.slots[0].options[chosen];
      const bool control_first = i % 2 == 1;
      std::vector<std::string> words =
          control_first ? std::vector<std::string>{"at", *item.control_word, "take", "the", slot, "line", "home"}
                        : std::vector<std::string>{"take", "the", slot, "line", "to", *item.control_word, "today"};
      const int slot_index = control_first ? 4 : 2;
      const int control_index = control_first ? 1 : 5;

      std::vector<double> samples;
      double phase = 0.0;
      Interval slot_time, control_time;
      AppendSilence(&samples, 0.05, rate);
      for (int w = 0; w < static_cast<int>(words.size()); ++w) {
        const WordSpec &spec = Word(words[w]);
        double dur = spec.syllables * syllable_s;
        double f0 = base_f0 * rng.uniform(0.92, 1.08);
        double amp = rng.uniform(0.3, 0.6);
        if (w > 0) AppendSilence(&samples, 0.04, rate);
        // Occasional hesitation elsewhere so context timing varies.
        const double hesitation = rng.uniform();
        if (w > 0 && w != slot_index && w != control_index && hesitation < kHesitationRate)
          AppendSilence(&samples, 0.12 + hesitation, rate);
        if (w == slot_index) {
          if (u > kPauseOnset) AppendSilence(&samples, 0.15 + 0.5 * u, rate);
          dur *= 1.0 + u;
        }
        const double start = Now(samples, rate);
        const double glide = rng.uniform(-0.1, 0.1);
        AppendGlide(&samples, f0 * (1 - glide), f0 * (1 + glide), amp, dur, rate, &phase);
        const Interval span{start, Now(samples, rate)};
        if (w == slot_index) slot_time = span;
        if (w == control_index) control_time = span;
      }
      AppendSilence(&samples, 0.05, rate);
      // Recording noise floor, well under the silence threshold.
      for (double &x : samples) x += kNoiseFloor * (2.0 * rng.uniform() - 1.0);

      Utterance utt;
      utt.utterance_id = speaker + "_" + item.item_id;
      utt.speaker_id = speaker;
      utt.item_id = item.item_id;
      utt.audio = "wav/" + utt.utterance_id + ".wav";
      utt.audio_path = dir / utt.audio;
      utt.sample_rate = rate;
      utt.transcript = words;
      utt.target_spans.push_back({{slot_index, slot_index}, slot_time});
      utt.control_span = ControlSpan{control_index, control_time};
      utt.chosen_options = {chosen};
      utt.correctness = chosen == 0 ? Correctness::kCorrect : Correctness::kIncorrect;
      utt.self_rating = static_cast<int>(std::lround(1.0 + 4.0 * (1.0 - u)));
      utt.listener_ratings.assign(kDefaultJudgeCount, 3);
      utt.presentation_ordinal = ordinal[i];
      WriteWavFile(utt.audio_path.string(), AudioClip(std::move(samples), rate));
      corpus.utterances.push_back(std::move(utt));
      study.latent.push_back(u);
    }
  }

  // Plant the perceived score on the measured, normalized target features.
  Dataset ds = BuildDataset(corpus, lexicon, {options.tracker, options.threads});
  const std::size_t n = ds.rows.size();
  std::vector<double> combo(n, 0.0);
  for (std::size_t f = 0; f < kPlantedFeatures.size(); ++f) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = ds.rows[i].normalized[Scope::kTarget][kPlantedFeatures[f]];
      if (!v) throw Error(ErrorKind::kMissingFeature, ds.rows[i].utterance_id + ": planted feature missing");
      col[i] = *v;
    }
    double mean = 0, var = 0;
    for (double x : col) mean += x;
    mean /= static_cast<double>(n);
    for (double x : col) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n; ++i)
      combo[i] += kPlantedWeights[f] * (sd > 0 ? (col[i] - mean) / sd : 0.0);
  }
  double mean = 0, var = 0;
  for (double x : combo) mean += x;
  mean /= static_cast<double>(n);
  for (double x : combo) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double score = 3.0 + kPlantedSpread * (combo[i] - mean) / sd;
    study.planted.push_back(score);
    corpus.utterances[i].listener_ratings =
        RatingsWithMean(QuantizeToJudgeGrid(score), static_cast<int>(i));
  }

  study.manifest = dir / "manifest.json";
  WriteJson(study.manifest, ManifestToJson(corpus));
  study.corpus = LoadManifest(study.manifest);
  return study;
}

}  // namespace certainty
