// certainty/tests/experiments_test.cc

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

#include <atomic>
#include <set>
#include <stdexcept>

#include "certainty/error.h"
#include "certainty/experiments.h"
#include "certainty/random.h"
#include "doctest.h"

using namespace certainty;

namespace {

template <typename F>
ErrorKind KindOf(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::kUsage;
}

ProsodicFeatureVector RandomVector(Rng &rng, Scope scope) {
  ProsodicFeatureVector v;
  v.scope = scope;
  v.normalized = true;
  for (auto &x : v.values) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Rows whose perceived score is an exact linear function of the utterance
// scope features.
Dataset LinearDataset(int speakers, int per_speaker, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  for (int s = 0; s < speakers; ++s) {
    for (int k = 0; k < per_speaker; ++k) {
      DatasetRow r;
      r.utterance_id = "s" + std::to_string(s) + "_" + std::to_string(k);
      r.speaker_id = "s" + std::to_string(s);
      r.segmented = true;
      for (Scope sc : {Scope::kUtterance, Scope::kContext, Scope::kTarget})
        r.normalized[sc] = RandomVector(rng, sc);
      const auto &u = r.normalized[Scope::kUtterance];
      r.perceived_mean = 3.0 + 0.9 * *u[FeatureId::kF0Mean] - 0.5 * *u[FeatureId::kRmsMax] +
                         0.4 * *u[FeatureId::kSilenceTotal];
      r.self_rating = k % 2 ? 4 : 2;
      r.correctness = k % 3 ? Correctness::kCorrect : Correctness::kIncorrect;
      ds.rows.push_back(std::move(r));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("parallel for writes by index and rethrows") {
  std::vector<int> out(100, -1);
  ParallelFor(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));

  std::atomic<int> calls{0};
  CHECK_THROWS_AS(ParallelFor(50, 3,
                              [&](std::size_t i) {
                                ++calls;
                                if (i == 7) throw std::runtime_error("boom");
                              }),
                  std::runtime_error);
  ParallelFor(0, 4, [&](std::size_t) { FAIL("called"); });
}

TEST_CASE("leave-one-speaker-out folds") {
  auto folds = MakeLosoFolds({"b", "a", "c", "a", "b"});
  REQUIRE(folds.size() == 3);
  CHECK(folds[0].test_speaker == "a");
  for (const auto &f : folds) {
    CHECK(f.train_speakers.size() == 2);
    for (const auto &t : f.train_speakers) CHECK(t != f.test_speaker);
  }
  CHECK(KindOf([] { MakeLosoFolds({"a", "a"}); }) == ErrorKind::kTooFewSpeakers);
  CHECK(KindOf([] { MakeLosoFolds({}); }) == ErrorKind::kTooFewSpeakers);
}

TEST_CASE("exact linear perceived score is recovered under cross-validation") {
  Dataset ds = LinearDataset(4, 10, 11);
  PerceivedOptions opt;
  opt.spec = ScopeSet(Scope::kUtterance);
  opt.scatter = true;
  auto rep = RunPerceivedExperiment(ds, opt);
  CHECK(rep.utterances == 40);
  CHECK(rep.folds.size() == 4);
  CHECK(rep.pooled_accuracy == 1.0);
  CHECK(rep.fold_mean_accuracy == 1.0);
  CHECK(rep.pooled_rms < 1e-9);
  CHECK(rep.scatter.size() == 40);
  int total = 0;
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p) {
      total += rep.confusion[t][p];
      if (t != p) CHECK(rep.confusion[t][p] == 0);
    }
  CHECK(total == 40);
  for (const auto &f : rep.folds) {
    REQUIRE(f.pearson);
    CHECK(*f.pearson == doctest::Approx(1.0).epsilon(1e-9));
  }
  auto j = ToJson(rep);
  CHECK(j["experiment"] == "perceived");
  CHECK(j["folds"].size() == 4);
  CHECK(RenderText(rep).find("pooled accuracy    100.00") != std::string::npos);
}

TEST_CASE("majority model scores the majority frequency") {
  Dataset ds = LinearDataset(3, 9, 5);
  int counts[3] = {0, 0, 0};
  for (const auto &r : ds.rows) ++counts[static_cast<int>(ScoreToClass3(r.perceived_mean))];
  const int best = *std::max_element(counts, counts + 3);
  PerceivedOptions opt;
  opt.model = PerceivedModel::kMajority;
  auto rep = RunPerceivedExperiment(ds, opt);
  CHECK(rep.pooled_accuracy == doctest::Approx(static_cast<double>(best) / ds.rows.size()));
}

TEST_CASE("perceived experiment row filtering") {
  Dataset ds = LinearDataset(3, 12, 5);
  ds.rows[0].single_target = false;
  ds.rows[1].segmented = false;
  PerceivedOptions opt;
  opt.spec = ScopeSet(Scope::kTarget);
  CHECK(RunPerceivedExperiment(ds, opt).utterances == 34);
  opt.spec = ScopeSet(Scope::kUtterance);
  CHECK(RunPerceivedExperiment(ds, opt).utterances == 36);
  opt.spec = ScopeSet(Scope::kTarget);
  opt.single_target_only = false;
  CHECK(KindOf([&] { RunPerceivedExperiment(ds, opt); }) == ErrorKind::kMissingAlignment);
}

TEST_CASE("triage subset assignment") {
  CHECK(AssignTriageSubset(Correctness::kIncorrect, 4.2) == TriageSubset::kA);
  CHECK(AssignTriageSubset(Correctness::kIncorrect, 3.0) == TriageSubset::kA);
  CHECK(AssignTriageSubset(Correctness::kIncorrect, 2.8) == TriageSubset::kAPrime);
  CHECK(AssignTriageSubset(Correctness::kCorrect, 1.4) == TriageSubset::kB);
  CHECK(AssignTriageSubset(Correctness::kCorrect, 4.8) == TriageSubset::kBPrime);
  CHECK(TriageSubsetName(TriageSubset::kAPrime) == "A'");
}

TEST_CASE("triage subsets partition the corpus") {
  Dataset ds = LinearDataset(4, 12, 21);
  auto rep = RunTriageExperiment(ds);
  int n = 0;
  for (const auto &s : rep.subsets) {
    n += s.n;
    CHECK(s.tree_correct <= s.n);
    CHECK(s.majority_correct * 2 >= s.n);
  }
  CHECK(n == rep.utterances);
  CHECK(rep.triage_correct <= rep.utterances);
  CHECK(rep.single_tree_folds.size() == 4);
  CHECK(rep.baseline_majority_correct * 2 >= rep.utterances);
}

TEST_CASE("triage with a self label fixed per subset is perfect") {
  Dataset ds = LinearDataset(4, 12, 21);
  for (auto &r : ds.rows) {
    const auto s = AssignTriageSubset(r.correctness, r.perceived_mean);
    r.self_rating = (s == TriageSubset::kA || s == TriageSubset::kBPrime) ? 5 : 1;
  }
  auto rep = RunTriageExperiment(ds);
  CHECK(rep.triage_correct == rep.utterances);
  CHECK(rep.rate(rep.triage_correct) == 1.0);
}

TEST_CASE("small triage subsets fall back to their majority") {
  Dataset ds = LinearDataset(3, 6, 2);
  for (auto &r : ds.rows) r.correctness = Correctness::kCorrect;
  ds.rows[0].correctness = Correctness::kIncorrect;
  ds.rows[0].perceived_mean = 4.5;
  auto rep = RunTriageExperiment(ds);
  const auto &a = rep.subsets[static_cast<int>(TriageSubset::kA)];
  CHECK(a.n == 1);
  CHECK(a.too_small);
  CHECK(a.tree_correct == 1);
}

TEST_CASE("localization picks the lower predicted certainty") {
  LinearModel m;
  m.intercept = 3.0;
  FeatureSetSpec spec = ScopeSet(Scope::kTarget);
  m.coefficients.assign(spec.members.size(), 0.0);
  m.coefficients[static_cast<int>(FeatureId::kSilenceTotal)] = -2.0;

  Rng rng(3);
  SegmentedFeatures slot, control;
  for (Scope sc : {Scope::kUtterance, Scope::kContext, Scope::kTarget}) {
    slot[sc] = RandomVector(rng, sc);
    control[sc] = RandomVector(rng, sc);
  }
  slot[Scope::kTarget][FeatureId::kSilenceTotal] = 0.6;
  control[Scope::kTarget][FeatureId::kSilenceTotal] = 0.1;
  NonprosodicFeatureVector np;

  auto r = CompareSegmentations(m, spec, slot, np, control, np);
  CHECK(r.choice == LocalizationChoice::kSlotWord);
  CHECK(r.slot_score == doctest::Approx(1.8));
  auto swapped = CompareSegmentations(m, spec, control, np, slot, np);
  CHECK(swapped.choice == LocalizationChoice::kControlWord);
  CHECK(swapped.slot_score == r.control_score);

  auto tie = CompareSegmentations(m, spec, slot, np, slot, np);
  CHECK(tie.choice == LocalizationChoice::kUnresolved);
  CHECK(LocalizationChoiceName(tie.choice) == "unresolved");
}

TEST_CASE("localization eligibility") {
  Dataset ds = LinearDataset(2, 3, 8);
  LinearModel m = ConstantModel(2.0, 40);
  DatasetRow row = ds.rows[0];
  row.perceived_mean = 3.0;
  const auto spec = CombineSets(ScopeSet(Scope::kTarget), NonprosodicSet());
  CHECK(KindOf([&] { LocalizeUncertainty(row, m, spec); }) == ErrorKind::kNotUncertainEnough);
  row.perceived_mean = 2.0;
  CHECK(KindOf([&] { LocalizeUncertainty(row, m, spec); }) == ErrorKind::kMissingControlWord);
  row.control_normalized = row.normalized;
  row.control_nonprosodic = row.nonprosodic;
  CHECK(LocalizeUncertainty(row, m, spec).choice == LocalizationChoice::kUnresolved);

  CHECK(KindOf([&] { RunLocalization(ds); }) == ErrorKind::kMissingControlWord);
}

TEST_CASE("localization run trains without the held-out speaker") {
  Dataset ds = LinearDataset(4, 12, 30);
  Rng rng(4);
  for (auto &r : ds.rows) {
    SegmentedFeatures c = r.normalized;
    c[Scope::kTarget] = RandomVector(rng, Scope::kTarget);
    r.control_normalized = c;
    r.control_nonprosodic = r.nonprosodic;
  }
  LocalizationOptions opt;
  opt.spec = ScopeSet(Scope::kUtterance);
  auto rep = RunLocalization(ds, opt);
  int eligible = 0;
  for (const auto &r : ds.rows) eligible += r.perceived_mean < kUncertainCutoff;
  CHECK(rep.eligible == eligible);
  // Utterance scope is shared by both segmentations.
  CHECK(rep.unresolved == eligible);
  CHECK(rep.slot_chosen + rep.control_chosen + rep.unresolved == rep.eligible);
  CHECK(ToJson(rep)["utterances"].size() == static_cast<std::size_t>(eligible));
}

TEST_CASE("agreement report") {
  Corpus c;
  c.judges = {"j1", "j2"};
  const int a[] = {1, 2, 3, 4, 5, 5, 1, 3};
  const int b[] = {1, 2, 3, 5, 5, 4, 2, 3};
  for (int i = 0; i < 8; ++i) {
    Utterance u;
    u.utterance_id = "u" + std::to_string(i);
    u.listener_ratings = {a[i], b[i]};
    u.self_rating = a[i];
    u.correctness = Correctness::kCorrect;
    c.utterances.push_back(u);
  }
  auto rep = RunAgreement(c, KappaVariant::kPairwiseCohen);
  CHECK(rep.judges == 2);
  REQUIRE(rep.raw_kappa);
  CHECK(*rep.raw_kappa == doctest::Approx(CohensKappa(a, b)));
  CHECK(rep.partitions.scores.size() == 6);
  CHECK(rep.codings.utterances == 8);
  CHECK(ToJson(rep)["partitions"].size() == 6);
}

TEST_CASE("percent formatting") {
  CHECK(Percent(0.6896) == "68.96");
  CHECK(Percent(1.0) == "100.00");
  CHECK(Percent(0.0) == "0.00");
}

TEST_CASE("triage accuracy lies between subset accuracies") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Dataset ds = LinearDataset(4, 12, seed);
    auto rep = RunTriageExperiment(ds);
    double lo = 1.0, hi = 0.0;
    for (const auto &s : rep.subsets) {
      if (s.n == 0) continue;
      lo = std::min(lo, s.tree_accuracy());
      hi = std::max(hi, s.tree_accuracy());
    }
    const double acc = rep.rate(rep.triage_correct);
    CHECK(acc >= lo - 1e-12);
    CHECK(acc <= hi + 1e-12);
  }
}

TEST_CASE("self class equal to perceived class makes the second baseline perfect") {
  Dataset ds = LinearDataset(3, 8, 9);
  for (auto &r : ds.rows) r.self_rating = r.perceived_mean < 3.0 ? 2 : 4;
  auto rep = RunTriageExperiment(ds);
  CHECK(rep.baseline_perceived_correct == rep.utterances);
}
