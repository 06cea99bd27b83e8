// certainty/experiments.h

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

#ifndef CERTAINTY_EXPERIMENTS_H_
#define CERTAINTY_EXPERIMENTS_H_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "certainty/corpus.h"
#include "certainty/featuresets.h"
#include "certainty/models.h"
#include "certainty/prosody.h"
#include "json.hpp"

namespace certainty {

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Callers write results by index, so output order never depends on
/// scheduling. The first exception is rethrown after all workers stop.
void ParallelFor(std::size_t n, int threads, const std::function<void(std::size_t)> &fn);

// ---------------------------------------------------------------------------
// Dataset

/// Everything the experiments need about one utterance.
struct DatasetRow {
  std::string utterance_id;
  std::string speaker_id;
  double perceived_mean = 0.0;
  int self_rating = 3;
  Correctness correctness = Correctness::kIncorrect;
  bool single_target = true;

  // Raw and per-speaker normalized vectors. Context and target scopes are
  // only meaningful when `segmented`.
  bool segmented = false;
  SegmentedFeatures raw;
  SegmentedFeatures normalized;
  NonprosodicFeatureVector nonprosodic;  // first slot

  // Control word proposed as the target, normalized with the speaker's
  // ordinary scope statistics.
  std::optional<SegmentedFeatures> control_raw;
  std::optional<SegmentedFeatures> control_normalized;
  std::optional<NonprosodicFeatureVector> control_nonprosodic;
};

struct Dataset {
  std::vector<DatasetRow> rows;  // corpus order
  std::map<std::string, ScopeStats> speaker_stats;

  std::vector<std::string> Speakers() const;  // sorted, unique
};

struct ExtractionOptions {
  TrackerConfig tracker;
  int threads = 0;
};

/// Raw per-utterance analysis, independent of the rest of the corpus.
struct UtteranceAnalysis {
  std::string utterance_id;
  SegmentedFeatures raw;  // utterance scope always; others when segmented
  bool segmented = false;
  std::optional<SegmentedFeatures> control_raw;
};

UtteranceAnalysis AnalyzeUtterance(const Utterance &utterance, const Lexicon &lexicon,
                                   const TrackerConfig &tracker);

/// Same from an already extracted contour and its silences.
UtteranceAnalysis AnalyzeContour(const Utterance &utterance, const Lexicon &lexicon,
                                 const Contour &contour, const std::vector<Interval> &silences);

/// Normalizes analyses per speaker and attaches labels and nonprosodic
/// features. `analyses` must follow corpus order.
Dataset AssembleDataset(const Corpus &corpus, const Lexicon &lexicon,
                        std::vector<UtteranceAnalysis> analyses);

Dataset BuildDataset(const Corpus &corpus, const Lexicon &lexicon,
                     const ExtractionOptions &options = {});

/// Recomputes per-speaker statistics and normalized vectors from `raw`.
void NormalizeDataset(Dataset *dataset);

// ---------------------------------------------------------------------------
// Folds

struct Fold {
  std::string test_speaker;
  std::vector<std::string> train_speakers;
};

/// One fold per distinct speaker, ordered by speaker id. Throws
/// TooFewSpeakers with fewer than two.
std::vector<Fold> MakeLosoFolds(const std::vector<std::string> &speakers);

// ---------------------------------------------------------------------------
// Perceived certainty

struct FoldResult {
  std::string test_speaker;
  int n = 0;
  int correct = 0;
  double accuracy = 0.0;
  double rms = 0.0;
  std::optional<double> pearson;  // absent with < 2 rows or constant input
};

struct ScatterPoint {
  std::string utterance_id;
  std::string speaker_id;
  double predicted = 0.0;
  double perceived = 0.0;
};

enum class PerceivedModel { kLinear, kMajority };

struct PerceivedOptions {
  FeatureSetSpec spec = ScopeSet(Scope::kUtterance);
  // Defaults to true exactly when the feature set reads context or target scope.
  std::optional<bool> single_target_only;
  PerceivedModel model = PerceivedModel::kLinear;
  bool scatter = false;
};

struct PerceivedReport {
  FeatureSetSpec spec;
  PerceivedModel model = PerceivedModel::kLinear;
  int utterances = 0;
  std::vector<FoldResult> folds;
  double fold_mean_accuracy = 0.0;
  double pooled_accuracy = 0.0;
  double pooled_rms = 0.0;
  std::array<std::array<int, 3>, 3> confusion{};  // [truth][predicted]
  std::vector<ScatterPoint> scatter;
};

/// Truth is the three-way class of the mean listener rating. kMajority
/// always predicts the corpus-wide most frequent class.
PerceivedReport RunPerceivedExperiment(const Dataset &dataset, const PerceivedOptions &options);

// ---------------------------------------------------------------------------
// Triage

enum class TriageSubset { kA, kB, kAPrime, kBPrime };
constexpr int kNumTriageSubsets = 4;

std::string_view TriageSubsetName(TriageSubset s);
TriageSubset AssignTriageSubset(Correctness correctness, double perceived_mean);

struct TriageOptions {
  FeatureSetSpec spec = ScopeSet(Scope::kUtterance);
  TreeParams tree;
};

struct SubsetResult {
  TriageSubset subset = TriageSubset::kA;
  int n = 0;
  int folds = 0;
  int tree_correct = 0;
  int majority_correct = 0;
  bool too_small = false;  // scored by its majority class
  double tree_accuracy() const { return n ? static_cast<double>(tree_correct) / n : 0.0; }
  double majority_accuracy() const {
    return n ? static_cast<double>(majority_correct) / n : 0.0;
  }
};

struct TriageReport {
  FeatureSetSpec spec;
  TreeParams tree;
  int utterances = 0;
  int baseline_majority_correct = 0;
  int baseline_perceived_correct = 0;
  int single_tree_correct = 0;
  std::vector<FoldResult> single_tree_folds;
  std::array<SubsetResult, kNumTriageSubsets> subsets{};
  int triage_correct = 0;

  double rate(int correct) const {
    return utterances ? static_cast<double>(correct) / utterances : 0.0;
  }
};

/// Labels are binary self-reported certainty.
TriageReport RunTriageExperiment(const Dataset &dataset, const TriageOptions &options = {});

// ---------------------------------------------------------------------------
// Correlations

struct CorrelationReport {
  int utterances = 0;
  CorrelationTable table;
  FeatureSetSpec combination;
};

/// Single-target, segmented utterances only.
CorrelationReport RunCorrelations(const Dataset &dataset);

// ---------------------------------------------------------------------------
// Localization

enum class LocalizationChoice { kSlotWord, kControlWord, kUnresolved };
std::string_view LocalizationChoiceName(LocalizationChoice c);

struct LocalizationResult {
  double slot_score = 0.0;
  double control_score = 0.0;
  LocalizationChoice choice = LocalizationChoice::kUnresolved;
};

constexpr double kLocalizationTieEps = 1e-9;
constexpr double kUncertainCutoff = 2.5;

/// The candidate with the lower predicted certainty is the source.
LocalizationResult CompareSegmentations(const LinearModel &model, const FeatureSetSpec &spec,
                                        const SegmentedFeatures &slot,
                                        const NonprosodicFeatureVector &slot_np,
                                        const SegmentedFeatures &control,
                                        const NonprosodicFeatureVector &control_np);

/// Checks eligibility (NotUncertainEnough, MissingControlWord) and compares.
LocalizationResult LocalizeUncertainty(const DatasetRow &row, const LinearModel &model,
                                       const FeatureSetSpec &spec);

struct LocalizationOptions {
  FeatureSetSpec spec = CombineSets(ScopeSet(Scope::kTarget), NonprosodicSet());
};

struct LocalizedUtterance {
  std::string utterance_id;
  std::string speaker_id;
  LocalizationResult result;
};

struct LocalizationReport {
  FeatureSetSpec spec;
  int eligible = 0;
  int slot_chosen = 0;
  int control_chosen = 0;
  int unresolved = 0;
  std::vector<LocalizedUtterance> items;
  double accuracy() const { return eligible ? static_cast<double>(slot_chosen) / eligible : 0.0; }
};

/// Every utterance below the cutoff with a single slot and an aligned
/// control word, scored by a model trained on the other speakers. Throws
/// MissingControlWord when no utterance has a control word at all.
LocalizationReport RunLocalization(const Dataset &dataset, const LocalizationOptions &options = {});

// ---------------------------------------------------------------------------
// Agreement

struct AgreementReport {
  int utterances = 0;
  int judges = 0;
  KappaVariant variant = KappaVariant::kPairwiseCohen;
  std::optional<double> raw_kappa;  // on the 5-point scale
  PartitionSearch partitions;
  CodingSummary codings;
};

AgreementReport RunAgreement(const Corpus &corpus, KappaVariant variant);

// ---------------------------------------------------------------------------
// Reports

nlohmann::ordered_json ToJson(const PerceivedReport &r);
nlohmann::ordered_json ToJson(const TriageReport &r);
nlohmann::ordered_json ToJson(const CorrelationReport &r);
nlohmann::ordered_json ToJson(const LocalizationReport &r);
nlohmann::ordered_json ToJson(const AgreementReport &r);
nlohmann::ordered_json ToJson(const TrackerConfig &c);

std::string RenderText(const PerceivedReport &r);
std::string RenderText(const TriageReport &r);
std::string RenderText(const CorrelationReport &r);
std::string RenderText(const LocalizationReport &r);
std::string RenderText(const AgreementReport &r);

/// Fixed-precision percentage text, e.g. "68.96".
std::string Percent(double fraction);

}  // namespace certainty

#endif  // CERTAINTY_EXPERIMENTS_H_
