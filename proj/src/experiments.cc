// certainty/src/experiments.cc

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

#include "certainty/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "certainty/audio.h"
#include "certainty/error.h"
#include "certainty/stats.h"

namespace certainty {

void ParallelFor(std::size_t n, int threads, const std::function<void(std::size_t)> &fn) {
  if (n == 0) return;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

constexpr Scope kScopes[] = {Scope::kUtterance, Scope::kContext, Scope::kTarget};

bool NeedsSegmentation(const FeatureSetSpec &spec) {
  return std::any_of(spec.members.begin(), spec.members.end(), [](const FeatureRef &m) {
    return m.scope && *m.scope != Scope::kUtterance;
  });
}

template <typename F>
auto Annotate(const std::string &utterance_id, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error &e) {
    throw Error(e.kind(), utterance_id + ": " + e.what());
  }
}

std::vector<double> Inputs(const DatasetRow &row, const FeatureSetSpec &spec) {
  if (!row.segmented && NeedsSegmentation(spec))
    throw Error(ErrorKind::kMissingAlignment,
                row.utterance_id + ": feature set needs aligned target spans");
  return AssembleInputs(spec, row.normalized, &row.nonprosodic);
}

int Class3Index(double score) { return static_cast<int>(ScoreToClass3(score)); }

double Class3Score(int cls) { return cls == 0 ? 2.0 : cls == 1 ? 3.0 : 4.0; }

int SelfLabel(const DatasetRow &row) {
  return BinaryCertainty(row.self_rating) == Certainty::kCertain ? 1 : 0;
}

// Lowest label wins ties.
int MajorityLabel(const std::vector<int> &labels, int k) {
  std::vector<int> counts(k, 0);
  for (int l : labels) ++counts[l];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::optional<double> SafePearson(const std::vector<double> &x, const std::vector<double> &y) {
  try {
    return PearsonR(x, y);
  } catch (const Error &) {
    return std::nullopt;
  }
}

// Training rows for a fold. The held-out speaker never appears.
std::vector<std::size_t> TrainRows(const std::vector<std::size_t> &pool,
                                   const std::vector<DatasetRow> &rows,
                                   const std::string &test_speaker) {
  std::vector<std::size_t> out;
  for (std::size_t i : pool)
    if (rows[i].speaker_id != test_speaker) out.push_back(i);
  for (std::size_t i : out)
    if (rows[i].speaker_id == test_speaker)
      throw Error(ErrorKind::kInvalidParameters, "fold leak: " + test_speaker);
  return out;
}

std::vector<std::string> SpeakersOf(const std::vector<std::size_t> &pool,
                                    const std::vector<DatasetRow> &rows) {
  std::set<std::string> s;
  for (std::size_t i : pool) s.insert(rows[i].speaker_id);
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<std::string> Dataset::Speakers() const {
  std::set<std::string> s;
  for (const auto &r : rows) s.insert(r.speaker_id);
  return {s.begin(), s.end()};
}

UtteranceAnalysis AnalyzeContour(const Utterance &utterance, const Lexicon &lexicon,
                                 const Contour &contour, const std::vector<Interval> &silences) {
  return Annotate(utterance.utterance_id, [&] {
    UtteranceAnalysis a;
    a.utterance_id = utterance.utterance_id;
    if (utterance.aligned()) {
      a.raw = SegmentFeatures(utterance, contour, silences, lexicon);
      a.segmented = true;
    } else {
      a.raw.utterance_id = utterance.utterance_id;
      a.raw[Scope::kUtterance] =
          AggregateFeatures(contour, Interval{0.0, contour.duration}, silences,
                            CountSyllables(lexicon, utterance.transcript), Scope::kUtterance);
      a.raw[Scope::kContext].scope = Scope::kContext;
      a.raw[Scope::kTarget].scope = Scope::kTarget;
    }
    if (utterance.control_span && utterance.control_span->time)
      a.control_raw = SegmentWithControlWord(utterance, contour, silences, lexicon);
    return a;
  });
}

UtteranceAnalysis AnalyzeUtterance(const Utterance &utterance, const Lexicon &lexicon,
                                   const TrackerConfig &tracker) {
  auto [contour, silences] = Annotate(utterance.utterance_id, [&] {
    AudioClip clip = ReadWavFile(utterance.audio_path.string());
    Contour c = ExtractContour(clip, tracker);
    std::vector<Interval> s = DetectSilence(c, tracker);
    return std::make_pair(std::move(c), std::move(s));
  });
  return AnalyzeContour(utterance, lexicon, contour, silences);
}

void NormalizeDataset(Dataset *dataset) {
  std::vector<SegmentedFeatures> raw;
  std::vector<std::string> speakers;
  for (const auto &r : dataset->rows) {
    raw.push_back(r.raw);
    speakers.push_back(r.speaker_id);
  }
  dataset->speaker_stats = SpeakerScopeStats(raw, speakers);
  for (auto &r : dataset->rows) {
    const ScopeStats &stats = dataset->speaker_stats.at(r.speaker_id);
    r.normalized = NormalizeSegmented(r.raw, stats);
    if (r.control_raw) r.control_normalized = NormalizeSegmented(*r.control_raw, stats);
  }
}

Dataset AssembleDataset(const Corpus &corpus, const Lexicon &lexicon,
                        std::vector<UtteranceAnalysis> analyses) {
  if (analyses.size() != corpus.utterances.size())
    throw Error(ErrorKind::kLengthMismatch, "one analysis per utterance required");
  Dataset ds;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const Utterance &u = corpus.utterances[i];
    if (analyses[i].utterance_id != u.utterance_id)
      throw Error(ErrorKind::kInvalidParameters, "analyses out of corpus order at " + u.utterance_id);
    DatasetRow row;
    row.utterance_id = u.utterance_id;
    row.speaker_id = u.speaker_id;
    row.perceived_mean = u.perceived_mean();
    row.self_rating = u.self_rating;
    row.correctness = u.correctness;
    row.single_target = u.single_target();
    row.segmented = analyses[i].segmented;
    row.raw = std::move(analyses[i].raw);
    row.control_raw = std::move(analyses[i].control_raw);
    const auto history = SessionHistory(corpus, u);
    row.nonprosodic = NonprosodicFeatures(u, lexicon, history, 0);
    if (u.control_span) {
      const int w = u.control_span->word_index;
      row.control_nonprosodic = NonprosodicFeaturesForSpan(u, {w, w}, lexicon, history);
    }
    ds.rows.push_back(std::move(row));
  }
  NormalizeDataset(&ds);
  return ds;
}

Dataset BuildDataset(const Corpus &corpus, const Lexicon &lexicon,
                     const ExtractionOptions &options) {
  options.tracker.Validate();
  std::vector<UtteranceAnalysis> analyses(corpus.utterances.size());
  ParallelFor(analyses.size(), options.threads, [&](std::size_t i) {
    analyses[i] = AnalyzeUtterance(corpus.utterances[i], lexicon, options.tracker);
  });
  return AssembleDataset(corpus, lexicon, std::move(analyses));
}

// ---------------------------------------------------------------------------

std::vector<Fold> MakeLosoFolds(const std::vector<std::string> &speakers) {
  std::set<std::string> unique(speakers.begin(), speakers.end());
  if (unique.size() < 2)
    throw Error(ErrorKind::kTooFewSpeakers,
                "leave-one-speaker-out needs two or more speakers, have " +
                    std::to_string(unique.size()));
  std::vector<Fold> folds;
  for (const auto &s : unique) {
    Fold f;
    f.test_speaker = s;
    for (const auto &t : unique)
      if (t != s) f.train_speakers.push_back(t);
    folds.push_back(std::move(f));
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Perceived

PerceivedReport RunPerceivedExperiment(const Dataset &dataset, const PerceivedOptions &options) {
  PerceivedReport rep;
  rep.spec = options.spec;
  rep.model = options.model;
  const bool single = options.single_target_only.value_or(NeedsSegmentation(options.spec));
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i)
    if (!single || (dataset.rows[i].single_target && dataset.rows[i].segmented)) pool.push_back(i);
  rep.utterances = static_cast<int>(pool.size());
  if (pool.empty()) throw Error(ErrorKind::kEmptyData, "no utterances to evaluate");

  std::vector<std::vector<double>> x(dataset.rows.size());
  if (options.model == PerceivedModel::kLinear)
    for (std::size_t i : pool) x[i] = Inputs(dataset.rows[i], options.spec);

  int majority = 0;
  {
    std::vector<int> labels;
    for (std::size_t i : pool) labels.push_back(Class3Index(dataset.rows[i].perceived_mean));
    majority = MajorityLabel(labels, 3);
  }

  std::vector<double> all_pred, all_truth;
  int pooled_correct = 0;
  for (const Fold &fold : MakeLosoFolds(SpeakersOf(pool, dataset.rows))) {
    LinearModel model = ConstantModel(Class3Score(majority), static_cast<int>(options.spec.members.size()));
    if (options.model == PerceivedModel::kLinear) {
      FeatureMatrix tx;
      std::vector<double> ty;
      for (std::size_t i : TrainRows(pool, dataset.rows, fold.test_speaker)) {
        tx.push_back(x[i]);
        ty.push_back(dataset.rows[i].perceived_mean);
      }
      model = FitOls(tx, ty);
    }
    FoldResult fr;
    fr.test_speaker = fold.test_speaker;
    std::vector<double> pred, truth;
    for (std::size_t i : pool) {
      const DatasetRow &row = dataset.rows[i];
      if (row.speaker_id != fold.test_speaker) continue;
      const double p = options.model == PerceivedModel::kLinear ? PredictScore(model, x[i])
                                                                : model.intercept;
      const int pc = Class3Index(p), tc = Class3Index(row.perceived_mean);
      ++rep.confusion[tc][pc];
      if (pc == tc) ++fr.correct;
      pred.push_back(p);
      truth.push_back(row.perceived_mean);
      if (options.scatter) rep.scatter.push_back({row.utterance_id, row.speaker_id, p, row.perceived_mean});
    }
    fr.n = static_cast<int>(pred.size());
    fr.accuracy = static_cast<double>(fr.correct) / fr.n;
    fr.rms = RmsError(pred, truth);
    fr.pearson = SafePearson(pred, truth);
    pooled_correct += fr.correct;
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_truth.insert(all_truth.end(), truth.begin(), truth.end());
    rep.folds.push_back(fr);
  }
  double sum = 0;
  for (const auto &f : rep.folds) sum += f.accuracy;
  rep.fold_mean_accuracy = sum / static_cast<double>(rep.folds.size());
  rep.pooled_accuracy = static_cast<double>(pooled_correct) / rep.utterances;
  rep.pooled_rms = RmsError(all_pred, all_truth);
  return rep;
}

// ---------------------------------------------------------------------------
// Triage

std::string_view TriageSubsetName(TriageSubset s) {
  switch (s) {
    case TriageSubset::kA: return "A";
    case TriageSubset::kB: return "B";
    case TriageSubset::kAPrime: return "A'";
    case TriageSubset::kBPrime: return "B'";
  }
  return "";
}

TriageSubset AssignTriageSubset(Correctness correctness, double perceived_mean) {
  const bool certain = BinaryCertainty(perceived_mean) == Certainty::kCertain;
  if (correctness == Correctness::kIncorrect)
    return certain ? TriageSubset::kA : TriageSubset::kAPrime;
  return certain ? TriageSubset::kBPrime : TriageSubset::kB;
}

namespace {

// LOSO tree over `pool`; returns correct predictions and fills per-fold results.
int LosoTree(const std::vector<std::size_t> &pool, const Dataset &dataset,
             const std::vector<std::vector<double>> &x, const std::vector<int> &labels,
             const TreeParams &params, std::vector<FoldResult> *folds) {
  int correct = 0;
  for (const Fold &fold : MakeLosoFolds(SpeakersOf(pool, dataset.rows))) {
    FeatureMatrix tx;
    std::vector<int> ty;
    for (std::size_t i : TrainRows(pool, dataset.rows, fold.test_speaker)) {
      tx.push_back(x[i]);
      ty.push_back(labels[i]);
    }
    DecisionTree tree = FitTree(tx, ty, 2, params);
    FoldResult fr;
    fr.test_speaker = fold.test_speaker;
    for (std::size_t i : pool) {
      if (dataset.rows[i].speaker_id != fold.test_speaker) continue;
      ++fr.n;
      if (tree.Predict(x[i]) == labels[i]) ++fr.correct;
    }
    fr.accuracy = static_cast<double>(fr.correct) / fr.n;
    correct += fr.correct;
    if (folds) folds->push_back(fr);
  }
  return correct;
}

}  // namespace

TriageReport RunTriageExperiment(const Dataset &dataset, const TriageOptions &options) {
  TriageReport rep;
  rep.spec = options.spec;
  rep.tree = options.tree;
  const std::size_t n = dataset.rows.size();
  rep.utterances = static_cast<int>(n);
  if (n == 0) throw Error(ErrorKind::kEmptyData, "no utterances to evaluate");

  std::vector<std::vector<double>> x(n);
  std::vector<int> labels(n);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = Inputs(dataset.rows[i], options.spec);
    labels[i] = SelfLabel(dataset.rows[i]);
    all[i] = i;
  }

  const int majority = MajorityLabel(labels, 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == majority) ++rep.baseline_majority_correct;
    const int perceived =
        BinaryCertainty(dataset.rows[i].perceived_mean) == Certainty::kCertain ? 1 : 0;
    if (perceived == labels[i]) ++rep.baseline_perceived_correct;
  }
  rep.single_tree_correct =
      LosoTree(all, dataset, x, labels, options.tree, &rep.single_tree_folds);

  std::array<std::vector<std::size_t>, kNumTriageSubsets> members;
  for (std::size_t i = 0; i < n; ++i)
    members[static_cast<int>(
                AssignTriageSubset(dataset.rows[i].correctness, dataset.rows[i].perceived_mean))]
        .push_back(i);
  for (int s = 0; s < kNumTriageSubsets; ++s) {
    SubsetResult &sr = rep.subsets[s];
    sr.subset = static_cast<TriageSubset>(s);
    sr.n = static_cast<int>(members[s].size());
    if (sr.n == 0) continue;
    std::vector<int> sub_labels;
    for (std::size_t i : members[s]) sub_labels.push_back(labels[i]);
    const int sub_major = MajorityLabel(sub_labels, 2);
    sr.majority_correct =
        static_cast<int>(std::count(sub_labels.begin(), sub_labels.end(), sub_major));
    const auto speakers = SpeakersOf(members[s], dataset.rows);
    if (sr.n < 2 || speakers.size() < 2) {
      sr.too_small = true;
      sr.tree_correct = sr.majority_correct;
    } else {
      sr.folds = static_cast<int>(speakers.size());
      sr.tree_correct = LosoTree(members[s], dataset, x, labels, options.tree, nullptr);
    }
    rep.triage_correct += sr.tree_correct;
  }
  return rep;
}

// ---------------------------------------------------------------------------

CorrelationReport RunCorrelations(const Dataset &dataset) {
  std::vector<SegmentedFeatures> feats;
  std::vector<double> y;
  for (const auto &r : dataset.rows) {
    if (!r.single_target || !r.segmented) continue;
    feats.push_back(r.normalized);
    y.push_back(r.perceived_mean);
  }
  CorrelationReport rep;
  rep.utterances = static_cast<int>(feats.size());
  rep.table = BuildCorrelationTable(feats, y);
  rep.combination = SelectCombinationSet(rep.table);
  return rep;
}

// ---------------------------------------------------------------------------
// Localization

std::string_view LocalizationChoiceName(LocalizationChoice c) {
  switch (c) {
    case LocalizationChoice::kSlotWord: return "slot_word";
    case LocalizationChoice::kControlWord: return "control_word";
    case LocalizationChoice::kUnresolved: return "unresolved";
  }
  return "";
}

LocalizationResult CompareSegmentations(const LinearModel &model, const FeatureSetSpec &spec,
                                        const SegmentedFeatures &slot,
                                        const NonprosodicFeatureVector &slot_np,
                                        const SegmentedFeatures &control,
                                        const NonprosodicFeatureVector &control_np) {
  LocalizationResult r;
  r.slot_score = PredictScore(model, AssembleInputs(spec, slot, &slot_np));
  r.control_score = PredictScore(model, AssembleInputs(spec, control, &control_np));
  if (std::abs(r.slot_score - r.control_score) <= kLocalizationTieEps) {
    r.choice = LocalizationChoice::kUnresolved;
  } else {
    r.choice = r.slot_score < r.control_score ? LocalizationChoice::kSlotWord
                                              : LocalizationChoice::kControlWord;
  }
  return r;
}

LocalizationResult LocalizeUncertainty(const DatasetRow &row, const LinearModel &model,
                                       const FeatureSetSpec &spec) {
  if (!(row.perceived_mean < kUncertainCutoff))
    throw Error(ErrorKind::kNotUncertainEnough,
                row.utterance_id + ": perceived " + FormatDouble(row.perceived_mean) +
                    " is not below " + FormatDouble(kUncertainCutoff));
  if (!row.control_normalized || !row.control_nonprosodic)
    throw Error(ErrorKind::kMissingControlWord, row.utterance_id + ": no aligned control word");
  if (!row.segmented)
    throw Error(ErrorKind::kMissingAlignment, row.utterance_id + ": slot is not aligned");
  return CompareSegmentations(model, spec, row.normalized, row.nonprosodic,
                              *row.control_normalized, *row.control_nonprosodic);
}

LocalizationReport RunLocalization(const Dataset &dataset, const LocalizationOptions &options) {
  LocalizationReport rep;
  rep.spec = options.spec;
  if (std::none_of(dataset.rows.begin(), dataset.rows.end(),
                   [](const DatasetRow &r) { return r.control_normalized.has_value(); })) {
    std::string ids;
    for (std::size_t i = 0; i < dataset.rows.size() && i < 5; ++i)
      ids += (i ? ", " : "") + dataset.rows[i].utterance_id;
    throw Error(ErrorKind::kMissingControlWord,
                "no utterance has an aligned control word (checked " +
                    std::to_string(dataset.rows.size()) + " utterances" +
                    (ids.empty() ? "" : ": " + ids + (dataset.rows.size() > 5 ? ", ..." : "")) +
                    ")");
  }
  std::vector<std::size_t> train_pool, eligible;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    const DatasetRow &r = dataset.rows[i];
    if (!r.single_target || !r.segmented) continue;
    train_pool.push_back(i);
    if (r.perceived_mean < kUncertainCutoff && r.control_normalized) eligible.push_back(i);
  }
  std::map<std::string, LinearModel> models;
  for (std::size_t i : eligible) {
    const DatasetRow &row = dataset.rows[i];
    auto it = models.find(row.speaker_id);
    if (it == models.end()) {
      FeatureMatrix tx;
      std::vector<double> ty;
      for (std::size_t j : TrainRows(train_pool, dataset.rows, row.speaker_id)) {
        tx.push_back(Inputs(dataset.rows[j], options.spec));
        ty.push_back(dataset.rows[j].perceived_mean);
      }
      it = models.emplace(row.speaker_id, FitOls(tx, ty)).first;
    }
    LocalizedUtterance lu{row.utterance_id, row.speaker_id,
                          LocalizeUncertainty(row, it->second, options.spec)};
    switch (lu.result.choice) {
      case LocalizationChoice::kSlotWord: ++rep.slot_chosen; break;
      case LocalizationChoice::kControlWord: ++rep.control_chosen; break;
      case LocalizationChoice::kUnresolved: ++rep.unresolved; break;
    }
    rep.items.push_back(std::move(lu));
  }
  rep.eligible = static_cast<int>(eligible.size());
  return rep;
}

// ---------------------------------------------------------------------------

AgreementReport RunAgreement(const Corpus &corpus, KappaVariant variant) {
  AgreementReport rep;
  rep.variant = variant;
  rep.utterances = static_cast<int>(corpus.utterances.size());
  rep.judges = static_cast<int>(corpus.judges.size());
  if (corpus.utterances.empty()) throw Error(ErrorKind::kEmptyData, "corpus has no utterances");
  std::vector<std::vector<int>> judges(corpus.judges.size());
  for (const auto &u : corpus.utterances)
    for (std::size_t j = 0; j < judges.size(); ++j) judges[j].push_back(u.listener_ratings[j]);
  try {
    rep.raw_kappa = AgreementKappa(judges, variant);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kDegenerateMarginals) throw;
  }
  rep.partitions = BestPartitionForAgreement(judges, variant);
  rep.codings = SummarizeCodings(corpus);
  return rep;
}

// ---------------------------------------------------------------------------
// Reports

using ojson = nlohmann::ordered_json;

std::string Percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

namespace {

ojson FoldsJson(const std::vector<FoldResult> &folds) {
  ojson out = ojson::array();
  for (const auto &f : folds) {
    ojson j;
    j["test_speaker"] = f.test_speaker;
    j["n"] = f.n;
    j["correct"] = f.correct;
    j["accuracy"] = f.accuracy;
    j["rms"] = f.rms;
    j["pearson"] = f.pearson ? ojson(*f.pearson) : ojson(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

ojson TreeParamsJson(const TreeParams &p) {
  return {{"min_leaf", p.min_leaf}, {"confidence", p.confidence}, {"prune", p.prune}};
}

std::string Pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string SetLabel(const FeatureSetSpec &spec) {
  return spec.label.empty() ? spec.set_id : spec.label;
}

}  // namespace

ojson ToJson(const TrackerConfig &c) {
  return {{"frame_length", c.frame_length},
          {"hop", c.hop},
          {"f0_floor", c.f0_floor},
          {"f0_ceil", c.f0_ceil},
          {"voicing_threshold", c.voicing_threshold},
          {"silence_db_threshold", c.silence_db_threshold},
          {"min_silence_run", c.min_silence_run}};
}

ojson ToJson(const PerceivedReport &r) {
  ojson j;
  j["experiment"] = "perceived";
  j["feature_set"] = r.spec.ToJson();
  j["model"] = r.model == PerceivedModel::kLinear ? "linear" : "majority";
  j["utterances"] = r.utterances;
  j["fold_mean_accuracy"] = r.fold_mean_accuracy;
  j["pooled_accuracy"] = r.pooled_accuracy;
  j["pooled_rms"] = r.pooled_rms;
  ojson conf = ojson::object();
  for (int t = 0; t < 3; ++t) {
    ojson row = ojson::object();
    for (int p = 0; p < 3; ++p)
      row[std::string(Class3Name(static_cast<CertaintyClass3>(p)))] = r.confusion[t][p];
    conf[std::string(Class3Name(static_cast<CertaintyClass3>(t)))] = row;
  }
  j["confusion"] = conf;
  j["folds"] = FoldsJson(r.folds);
  if (!r.scatter.empty()) {
    ojson pts = ojson::array();
    for (const auto &p : r.scatter)
      pts.push_back({{"utterance_id", p.utterance_id},
                     {"speaker_id", p.speaker_id},
                     {"predicted", p.predicted},
                     {"perceived", p.perceived}});
    j["scatter"] = pts;
  }
  return j;
}

ojson ToJson(const TriageReport &r) {
  ojson j;
  j["experiment"] = "triage";
  j["feature_set"] = r.spec.ToJson();
  j["tree"] = TreeParamsJson(r.tree);
  j["utterances"] = r.utterances;
  j["baseline_majority_accuracy"] = r.rate(r.baseline_majority_correct);
  j["baseline_perceived_accuracy"] = r.rate(r.baseline_perceived_correct);
  j["single_tree_accuracy"] = r.rate(r.single_tree_correct);
  j["triage_accuracy"] = r.rate(r.triage_correct);
  ojson subs = ojson::array();
  for (const auto &s : r.subsets)
    subs.push_back({{"subset", TriageSubsetName(s.subset)},
                    {"n", s.n},
                    {"folds", s.folds},
                    {"tree_accuracy", s.tree_accuracy()},
                    {"majority_accuracy", s.majority_accuracy()},
                    {"too_small", s.too_small}});
  j["subsets"] = subs;
  j["single_tree_folds"] = FoldsJson(r.single_tree_folds);
  return j;
}

ojson ToJson(const CorrelationReport &r) {
  ojson j;
  j["experiment"] = "correlations";
  j["utterances"] = r.utterances;
  j["table"] = r.table.ToJson();
  j["combination_set"] = r.combination.ToJson();
  return j;
}

ojson ToJson(const LocalizationReport &r) {
  ojson j;
  j["experiment"] = "localize";
  j["feature_set"] = r.spec.ToJson();
  j["eligible"] = r.eligible;
  j["slot_chosen"] = r.slot_chosen;
  j["control_chosen"] = r.control_chosen;
  j["unresolved"] = r.unresolved;
  j["accuracy"] = r.accuracy();
  ojson items = ojson::array();
  for (const auto &it : r.items)
    items.push_back({{"utterance_id", it.utterance_id},
                     {"speaker_id", it.speaker_id},
                     {"slot_score", it.result.slot_score},
                     {"control_score", it.result.control_score},
                     {"choice", LocalizationChoiceName(it.result.choice)}});
  j["utterances"] = items;
  return j;
}

ojson ToJson(const AgreementReport &r) {
  ojson j;
  j["experiment"] = "agreement";
  j["variant"] = r.variant == KappaVariant::kFleiss ? "fleiss" : "pairwise";
  j["utterances"] = r.utterances;
  j["judges"] = r.judges;
  j["raw_kappa"] = r.raw_kappa ? ojson(*r.raw_kappa) : ojson(nullptr);
  j["best_partition"] = r.partitions.best.ToString();
  ojson parts = ojson::array();
  for (const auto &p : r.partitions.scores)
    parts.push_back({{"partition", p.partition.ToString()},
                     {"kappa", p.defined ? ojson(p.kappa) : ojson(nullptr)}});
  j["partitions"] = parts;
  const auto &c = r.codings;
  j["codings"] = {{"self_aware", c.self_aware},
                  {"misconception", c.misconception},
                  {"lacks_confidence_or_lucky_guess", c.lacks_confidence},
                  {"transparent", c.transparent},
                  {"opaque_broadcaster", c.broadcaster},
                  {"opaque_meek", c.meek},
                  {"self_awareness_rate", c.self_awareness_rate()},
                  {"transparency_rate", c.transparency_rate()}};
  return j;
}

std::string RenderText(const PerceivedReport &r) {
  std::ostringstream out;
  out << "perceived certainty, feature set " << SetLabel(r.spec) << " ("
      << r.spec.members.size() << " inputs, "
      << (r.model == PerceivedModel::kLinear ? "linear" : "majority") << "), "
      << r.utterances << " utterances\n\n";
  out << Pad("speaker", 16) << Pad("n", 6) << Pad("acc%", 9) << Pad("rms", 9) << "r\n";
  for (const auto &f : r.folds) {
    char rms[32], pr[32];
    std::snprintf(rms, sizeof(rms), "%.3f", f.rms);
    if (f.pearson) {
      std::snprintf(pr, sizeof(pr), "%.3f", *f.pearson);
    } else {
      std::snprintf(pr, sizeof(pr), "-");
    }
    out << Pad(f.test_speaker, 16) << Pad(std::to_string(f.n), 6) << Pad(Percent(f.accuracy), 9)
        << Pad(rms, 9) << pr << "\n";
  }
  char rms[32];
  std::snprintf(rms, sizeof(rms), "%.3f", r.pooled_rms);
  out << "\nfold-mean accuracy " << Percent(r.fold_mean_accuracy) << "\npooled accuracy    "
      << Percent(r.pooled_accuracy) << "\npooled rms error   " << rms << "\n";
  return out.str();
}

std::string RenderText(const TriageReport &r) {
  std::ostringstream out;
  out << "self-reported certainty triage, " << r.utterances << " utterances\n\n";
  out << Pad("model", 28) << "acc%\n";
  out << Pad("majority class", 28) << Percent(r.rate(r.baseline_majority_correct)) << "\n";
  out << Pad("perceived class", 28) << Percent(r.rate(r.baseline_perceived_correct)) << "\n";
  out << Pad("single tree", 28) << Percent(r.rate(r.single_tree_correct)) << "\n";
  out << Pad("triage (pooled)", 28) << Percent(r.rate(r.triage_correct)) << "\n\n";
  out << Pad("subset", 8) << Pad("n", 6) << Pad("folds", 7) << Pad("majority%", 11) << "tree%\n";
  for (const auto &s : r.subsets)
    out << Pad(std::string(TriageSubsetName(s.subset)), 8) << Pad(std::to_string(s.n), 6)
        << Pad(std::to_string(s.folds), 7) << Pad(Percent(s.majority_accuracy()), 11)
        << Percent(s.tree_accuracy()) << (s.too_small ? "  (too small, majority)" : "") << "\n";
  return out.str();
}

std::string RenderText(const CorrelationReport &r) {
  std::ostringstream out;
  out << "correlation with mean perceived rating, N = " << r.utterances << "\n\n";
  out << Pad("feature", 20) << Pad("utterance", 12) << Pad("context", 12) << "target\n";
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    out << Pad(std::string(FeatureName(FeatureAt(f))), 20);
    for (Scope s : kScopes) {
      const auto &c = r.table.at(FeatureAt(f), s);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f%s", c.r, c.sig01() ? "**" : c.sig05() ? "*" : "");
      out << Pad(buf, 12);
    }
    out << "\n";
  }
  out << "\ncombination set:";
  for (const auto &m : r.combination.members)
    out << " " << FeatureName(FeatureAt(m.index)) << "@" << ScopeName(*m.scope);
  out << "\n";
  return out.str();
}

std::string RenderText(const LocalizationReport &r) {
  std::ostringstream out;
  out << "uncertainty localization, feature set " << SetLabel(r.spec) << "\n\n";
  out << "eligible utterances " << r.eligible << "\nslot word chosen    " << r.slot_chosen
      << "\ncontrol word chosen " << r.control_chosen << "\nunresolved          "
      << r.unresolved << "\naccuracy            " << Percent(r.accuracy()) << "\n";
  return out.str();
}

std::string RenderText(const AgreementReport &r) {
  std::ostringstream out;
  char buf[32];
  out << "listener agreement (" << (r.variant == KappaVariant::kFleiss ? "fleiss" : "pairwise")
      << "), " << r.judges << " judges, " << r.utterances << " utterances\n\n";
  if (r.raw_kappa) {
    std::snprintf(buf, sizeof(buf), "%.3f", *r.raw_kappa);
    out << "5-point kappa " << buf << "\n";
  } else {
    out << "5-point kappa undefined\n";
  }
  for (const auto &p : r.partitions.scores) {
    if (p.defined) {
      std::snprintf(buf, sizeof(buf), "%.3f", p.kappa);
    } else {
      std::snprintf(buf, sizeof(buf), "undefined");
    }
    out << Pad(p.partition.ToString(), 12) << buf
        << (p.partition == r.partitions.best ? "  best" : "") << "\n";
  }
  out << "\nself-aware  " << Percent(r.codings.self_awareness_rate()) << "%\ntransparent "
      << Percent(r.codings.transparency_rate()) << "%\n";
  return out.str();
}

}  // namespace certainty
