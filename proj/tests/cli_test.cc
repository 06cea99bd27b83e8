// certainty/tests/cli_test.cc

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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "certainty/synthetic.h"
#include "doctest.h"
#include "json.hpp"

using namespace certainty;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string Quote(const std::string &s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

struct Fixture {
  fs::path root;
  fs::path manifest;
  json doc;

  Fixture() {
    root = fs::temp_directory_path() / ("certainty_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    SyntheticOptions opts;
    opts.speakers = 6;
    manifest = GenerateSyntheticStudy(root / "syn", opts).manifest;
    doc = json::parse(Slurp(manifest));
  }
  ~Fixture() { fs::remove_all(root); }

  Run Cli(const std::string &args) const {
    const fs::path out = root / "stdout", err = root / "stderr";
    const std::string cmd = Quote(CERTAINTY_CLI) + " " + args + " >" + Quote(out.string()) + " 2>" +
                            Quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, Slurp(out), Slurp(err)};
  }

  // A sibling manifest that shares the synthetic audio.
  fs::path Variant(const std::string &name, const json &variant) const {
    const fs::path p = root / "syn" / (name + ".json");
    Spit(p, variant.dump(2));
    return p;
  }
};

const Fixture &Shared() {
  static Fixture f;
  return f;
}

// One JSON object on one line; its kind and exit code.
json Diagnostic(const Run &r) {
  REQUIRE(!r.err.empty());
  CHECK(r.err.find('\n') == r.err.size() - 1);
  const json d = json::parse(r.err);
  CHECK(d.at("exit_code") == r.code);
  return d;
}

int CountLines(const std::string &text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("extract writes 60 prosodic columns per utterance") {
  const Fixture &f = Shared();
  const Run r = f.Cli("extract --corpus " + Quote(f.manifest.string()));
  REQUIRE(r.code == 0);
  CHECK(CountLines(r.out) == 1 + static_cast<int>(f.doc["utterances"].size()));
  const std::string header = r.out.substr(0, r.out.find('\n'));
  int columns = 1;
  for (char c : header) columns += c == ',';
  CHECK(columns == 5 + 60);
  CHECK(header.rfind("utterance_id,speaker_id,", 0) == 0);

  const Run np = f.Cli("extract --nonprosodic --normalized --corpus " + Quote(f.manifest.string()));
  REQUIRE(np.code == 0);
  const std::string np_header = np.out.substr(0, np.out.find('\n'));
  int np_columns = 1;
  for (char c : np_header) np_columns += c == ',';
  CHECK(np_columns == 5 + 60 + 20);
}

TEST_CASE("empty corpus extracts to a header-only CSV") {
  const Fixture &f = Shared();
  json empty = f.doc;
  empty["utterances"] = json::array();
  const Run r = f.Cli("extract --corpus " + Quote(f.Variant("empty", empty).string()));
  REQUIRE(r.code == 0);
  CHECK(CountLines(r.out) == 1);
  CHECK(r.out.rfind("utterance_id,", 0) == 0);
}

TEST_CASE("corrupt audio exits 2 and names the utterance") {
  const Fixture &f = Shared();
  json corrupt = f.doc;
  const std::string id = corrupt["utterances"][3]["utterance_id"];
  const fs::path bad = f.root / "syn" / "wav" / "corrupt.wav";
  Spit(bad, "RIFF....WAVEnot really a wave file");
  corrupt["utterances"][3]["audio"] = "wav/corrupt.wav";
  const Run r = f.Cli("extract --corpus " + Quote(f.Variant("corrupt", corrupt).string()));
  CHECK(r.code == 2);
  const json d = Diagnostic(r);
  CHECK(d["message"].get<std::string>().find(id) != std::string::npos);
}

TEST_CASE("localize without control words fails with MissingControlWord") {
  const Fixture &f = Shared();
  json bare = f.doc;
  for (auto &item : bare["items"]) item.erase("control_word");
  for (auto &u : bare["utterances"]) u.erase("control_span");
  const Run r = f.Cli("experiment localize --out " + Quote((f.root / "loc").string()) + " --corpus " +
                      Quote(f.Variant("bare", bare).string()));
  CHECK(r.code == 2);
  const json d = Diagnostic(r);
  CHECK(d["error"] == "MissingControlWord");
  CHECK(d["message"].get<std::string>().find(bare["utterances"][0]["utterance_id"].get<std::string>()) !=
        std::string::npos);
}

TEST_CASE("identical runs produce identical bytes") {
  const Fixture &f = Shared();
  const fs::path out = f.root / "det";
  const fs::path cache = f.root / "cache";
  const std::string base = " --corpus " + Quote(f.manifest.string()) + " --out " + Quote(out.string());
  for (const std::string exp : {"perceived", "triage", "correlations", "localize", "agreement"}) {
    CAPTURE(exp);
    // Cold cache on one thread, then warm cache on all cores.
    REQUIRE(f.Cli("experiment " + exp + base + " --threads 1 --cache-dir " + Quote(cache.string())).code == 0);
    const std::string json1 = Slurp(out / (exp + ".json")), text1 = Slurp(out / (exp + ".txt"));
    REQUIRE(f.Cli("experiment " + exp + base + " --cache-dir " + Quote(cache.string())).code == 0);
    CHECK(Slurp(out / (exp + ".json")) == json1);
    CHECK(Slurp(out / (exp + ".txt")) == text1);
    REQUIRE(f.Cli("experiment " + exp + base).code == 0);
    CHECK(Slurp(out / (exp + ".json")) == json1);
    CHECK(!json1.empty());
  }
  const Run a = f.Cli("extract --corpus " + Quote(f.manifest.string()) + " --cache-dir " + Quote(cache.string()));
  const Run b = f.Cli("extract --corpus " + Quote(f.manifest.string()));
  CHECK(a.out == b.out);
}

TEST_CASE("correlations report is a 20 x 3 table with the config embedded") {
  const Fixture &f = Shared();
  const fs::path out = f.root / "corr";
  REQUIRE(f.Cli("experiment correlations --seed 7 --corpus " + Quote(f.manifest.string()) + " --out " +
                Quote(out.string()))
              .code == 0);
  const json doc = json::parse(Slurp(out / "correlations.json"));
  CHECK(doc["seed"] == 7);
  CHECK(doc["config"]["seed"] == 7);
  CHECK(doc["config"]["tracker"]["hop"] == 0.010);
  const json &table = doc["report"]["table"];
  REQUIRE(table.size() == 20);
  for (const auto &row : table)
    for (const char *scope : {"utterance", "context", "target"}) CHECK(row.contains(scope));
  CHECK(CountLines(Slurp(out / "correlations.txt")) >= 22);
}

TEST_CASE("triage on pure subsets matches a hand count") {
  const Fixture &f = Shared();
  json pure = f.doc;
  // Self rating fixed by subset: A (incorrect, sounds certain) and B
  // (correct, sounds uncertain) are certain; A' and B' are not.
  int certain = 0, perceived_agrees = 0;
  const int n = static_cast<int>(pure["utterances"].size());
  for (auto &u : pure["utterances"]) {
    double sum = 0;
    for (int r : u["listener_ratings"]) sum += r;
    const bool perceived_certain = sum / u["listener_ratings"].size() >= 3.0;
    const bool correct = u["correctness"] == "correct";
    u["self_rating"] = correct != perceived_certain ? 5 : 1;
    const bool label = u["self_rating"] == 5;
    certain += label;
    perceived_agrees += label == perceived_certain;
  }
  const int majority = certain > n - certain ? certain : n - certain;

  const fs::path out = f.root / "triage";
  const Run r = f.Cli("experiment triage --corpus " + Quote(f.Variant("pure", pure).string()) + " --out " +
                      Quote(out.string()));
  REQUIRE(r.code == 0);
  const json rep = json::parse(Slurp(out / "triage.json"))["report"];
  CHECK(rep["utterances"] == n);
  CHECK(rep["triage_accuracy"] == 1.0);
  CHECK(rep["baseline_majority_accuracy"] == static_cast<double>(majority) / n);
  CHECK(rep["baseline_perceived_accuracy"] == static_cast<double>(perceived_agrees) / n);
  for (const auto &sub : rep["subsets"]) CHECK(sub["tree_accuracy"] == 1.0);
}

TEST_CASE("config file paths are relative to it and flags override it") {
  const Fixture &f = Shared();
  const fs::path dir = f.root / "cfg";
  fs::create_directories(dir);
  Spit(dir / "run.json", json{{"corpus", "../syn/manifest.json"},
                              {"out_dir", "results"},
                              {"feature_set", "A"},
                              {"tracker", {{"min_silence_run", 0.12}}},
                              {"seed", 3}}
                             .dump());
  REQUIRE(f.Cli("experiment perceived --config " + Quote((dir / "run.json").string())).code == 0);
  json doc = json::parse(Slurp(dir / "results" / "perceived.json"));
  CHECK(doc["report"]["feature_set"]["set_id"] == "A");
  CHECK(doc["config"]["tracker"]["min_silence_run"] == 0.12);
  CHECK(doc["seed"] == 3);

  const fs::path other = f.root / "cfg_override";
  REQUIRE(f.Cli("experiment perceived --config " + Quote((dir / "run.json").string()) +
                " --feature-set B --seed 9 --out " + Quote(other.string()))
              .code == 0);
  doc = json::parse(Slurp(other / "perceived.json"));
  CHECK(doc["report"]["feature_set"]["set_id"] == "B");
  CHECK(doc["config"]["tracker"]["min_silence_run"] == 0.12);
  CHECK(doc["seed"] == 9);
}

TEST_CASE("usage errors exit 1 with a JSON diagnostic") {
  const Fixture &f = Shared();
  Run r = f.Cli("experiment nonsense --corpus x.json");
  CHECK(r.code == 1);
  CHECK(Diagnostic(r)["error"] == "Usage");

  r = f.Cli("extract --no-such-flag");
  CHECK(r.code == 1);
  Diagnostic(r);

  r = f.Cli("extract");
  CHECK(r.code == 1);
  CHECK(Diagnostic(r)["error"] == "Usage");

  Spit(f.root / "bad.json", R"({"corpus": "a.json", "colour": 1})");
  r = f.Cli("extract --config " + Quote((f.root / "bad.json").string()));
  CHECK(r.code == 1);
  CHECK(Diagnostic(r)["message"].get<std::string>().find("colour") != std::string::npos);

  r = f.Cli("experiment perceived --feature-set Q --corpus " + Quote(f.manifest.string()));
  CHECK(r.code == 2);
  CHECK(Diagnostic(r)["error"] == "InvalidParameters");

  CHECK(f.Cli("--help").code == 0);
}

TEST_CASE("validate and agreement") {
  const Fixture &f = Shared();
  Run r = f.Cli("validate " + Quote(f.manifest.string()));
  REQUIRE(r.code == 0);
  const json v = json::parse(r.out);
  CHECK(v["utterances"] == f.doc["utterances"].size());
  CHECK(v["speakers"] == 6);

  json bad = f.doc;
  bad["utterances"][0]["self_rating"] = 6;
  r = f.Cli("validate " + Quote(f.Variant("bad_rating", bad).string()));
  CHECK(r.code == 2);
  CHECK(Diagnostic(r)["error"] == "RatingOutOfRange");

  const fs::path out = f.root / "agree";
  REQUIRE(f.Cli("agreement --kappa fleiss --corpus " + Quote(f.manifest.string()) + " --out " +
                Quote(out.string()))
              .code == 0);
  const json doc = json::parse(Slurp(out / "agreement.json"));
  CHECK(doc["config"]["kappa"] == "fleiss");
  CHECK(doc["report"]["judges"] == 5);
}

TEST_CASE("train writes a reloadable model") {
  const Fixture &f = Shared();
  const fs::path model = f.root / "model.json";
  REQUIRE(f.Cli("train --feature-set B --corpus " + Quote(f.manifest.string()) + " -o " +
                Quote(model.string()))
              .code == 0);
  const json doc = json::parse(Slurp(model));
  CHECK(doc["feature_set"]["set_id"] == "B");
  CHECK(doc["model"]["coefficients"].size() == 20);
}
