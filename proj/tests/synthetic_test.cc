// certainty/tests/synthetic_test.cc

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

#include <filesystem>
#include <numeric>
#include <string>

#include "certainty/experiments.h"
#include "certainty/models.h"
#include "certainty/synthetic.h"
#include "doctest.h"

using namespace certainty;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("certainty_synth_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("judge grid quantization keeps the class") {
  CHECK(QuantizeToJudgeGrid(2.49) == doctest::Approx(2.4));
  CHECK(QuantizeToJudgeGrid(2.51) == doctest::Approx(2.6));
  CHECK(QuantizeToJudgeGrid(3.49) == doctest::Approx(3.4));
  CHECK(QuantizeToJudgeGrid(-3.0) == doctest::Approx(1.0));
  CHECK(QuantizeToJudgeGrid(9.0) == doctest::Approx(5.0));
  for (double s = 1.0; s <= 5.0; s += 0.013) {
    const double q = QuantizeToJudgeGrid(s);
    CHECK(ScoreToClass3(q) == ScoreToClass3(s));
    CHECK(std::abs(q - s) <= 0.1 + 1e-9);
  }
}

TEST_CASE("ratings reproduce the requested mean") {
  for (int k = 5; k <= 25; ++k) {
    auto r = RatingsWithMean(k / 5.0, k);
    REQUIRE(r.size() == 5);
    CHECK(std::accumulate(r.begin(), r.end(), 0) == k);
    for (int x : r) CHECK((x >= 1 && x <= 5));
  }
}

TEST_CASE("synthetic study recovers the planted structure") {
  TempDir dir;
  SyntheticOptions opt;
  auto study = GenerateSyntheticStudy(dir.path, opt);
  REQUIRE(study.corpus.utterances.size() == 96);
  CHECK(study.corpus.Speakers().size() == 8);

  Dataset ds = BuildDataset(study.corpus, LoadCorpusLexicon(study.corpus));
  PerceivedOptions p;
  p.spec = ScopeSet(Scope::kTarget);
  auto perceived = RunPerceivedExperiment(ds, p);
  MESSAGE("perceived fold-mean ", perceived.fold_mean_accuracy, " pooled ",
          perceived.pooled_accuracy);
  CHECK(perceived.fold_mean_accuracy >= 0.95);

  auto loc = RunLocalization(ds);
  MESSAGE("localization ", loc.slot_chosen, "/", loc.eligible);
  CHECK(loc.eligible > 10);
  CHECK(loc.accuracy() >= 0.90);
}
