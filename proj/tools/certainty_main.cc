// certainty/tools/certainty_main.cc

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "certainty/corpus.h"
#include "certainty/error.h"
#include "certainty/experiments.h"
#include "certainty/featuresets.h"
#include "certainty/models.h"
#include "certainty/session.h"
#include "certainty/synthetic.h"
#include "feature_cache.h"
#include "json.hpp"

namespace certainty {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitModule = 2;

const std::vector<std::string> kExperiments = {"perceived", "triage", "correlations", "localize",
                                               "agreement"};

struct RunConfig {
  std::string corpus;
  std::string out_dir = "out";
  std::optional<std::string> feature_set;
  std::optional<std::string> feature_set_file;
  std::string model = "linear";
  TrackerConfig tracker;
  TreeParams tree;
  std::string kappa = "pairwise";
  int threads = 0;
  std::optional<std::string> cache_dir;
  std::uint64_t seed = 1;

  ojson ToJson() const {
    ojson j;
    j["corpus"] = corpus;
    j["out_dir"] = out_dir;
    j["feature_set"] = feature_set ? json(*feature_set) : json(nullptr);
    j["feature_set_file"] = feature_set_file ? json(*feature_set_file) : json(nullptr);
    j["model"] = model;
    j["tracker"] = certainty::ToJson(tracker);
    j["tree"] = {{"min_leaf", tree.min_leaf}, {"confidence", tree.confidence}, {"prune", tree.prune}};
    j["kappa"] = kappa;
    j["seed"] = seed;
    return j;
  }
};

[[noreturn]] void Usage(const std::string &msg) { throw Error(ErrorKind::kUsage, msg); }

void CheckKeys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
  if (!obj.is_object()) Usage(where + " must be an object");
  for (const auto &[key, _] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed) ok = ok || key == a;
    if (!ok) Usage("unknown config key " + where + "." + key);
  }
}

std::string ResolvePath(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

// Paths inside the file are taken relative to the file.
RunConfig LoadConfigFile(const fs::path &path) {
  std::ifstream in(path);
  if (!in) Usage("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &e) {
    Usage("config " + path.string() + ": " + e.what());
  }
  CheckKeys(doc,
            {"corpus", "out_dir", "feature_set", "feature_set_file", "model", "tracker", "tree", "kappa",
             "threads", "cache_dir", "seed"},
            "config");
  const fs::path base = path.parent_path();
  RunConfig c;
  try {
    if (doc.contains("corpus")) c.corpus = ResolvePath(base, doc["corpus"]);
    if (doc.contains("out_dir")) c.out_dir = ResolvePath(base, doc["out_dir"]);
    if (doc.contains("feature_set")) c.feature_set = doc["feature_set"].get<std::string>();
    if (doc.contains("feature_set_file"))
      c.feature_set_file = ResolvePath(base, doc["feature_set_file"]);
    if (doc.contains("model")) c.model = doc["model"];
    if (doc.contains("kappa")) c.kappa = doc["kappa"];
    if (doc.contains("threads")) c.threads = doc["threads"];
    if (doc.contains("cache_dir")) c.cache_dir = ResolvePath(base, doc["cache_dir"]);
    if (doc.contains("seed")) c.seed = doc["seed"];
    if (doc.contains("tracker")) {
      const json &t = doc["tracker"];
      CheckKeys(t,
                {"frame_length", "hop", "f0_floor", "f0_ceil", "voicing_threshold",
                 "silence_db_threshold", "min_silence_run"},
                "tracker");
      c.tracker.frame_length = t.value("frame_length", c.tracker.frame_length);
      c.tracker.hop = t.value("hop", c.tracker.hop);
      c.tracker.f0_floor = t.value("f0_floor", c.tracker.f0_floor);
      c.tracker.f0_ceil = t.value("f0_ceil", c.tracker.f0_ceil);
      c.tracker.voicing_threshold = t.value("voicing_threshold", c.tracker.voicing_threshold);
      c.tracker.silence_db_threshold = t.value("silence_db_threshold", c.tracker.silence_db_threshold);
      c.tracker.min_silence_run = t.value("min_silence_run", c.tracker.min_silence_run);
    }
    if (doc.contains("tree")) {
      const json &t = doc["tree"];
      CheckKeys(t, {"min_leaf", "confidence", "prune"}, "tree");
      c.tree.min_leaf = t.value("min_leaf", c.tree.min_leaf);
      c.tree.confidence = t.value("confidence", c.tree.confidence);
      c.tree.prune = t.value("prune", c.tree.prune);
    }
  } catch (const json::exception &e) {
    Usage("config " + path.string() + ": " + e.what());
  }
  return c;
}

// Flags mirror the config file; a flag given on the command line wins.
struct Flags {
  std::string config;
  RunConfig v;
  CLI::Option *corpus, *out_dir, *feature_set, *feature_set_file, *model, *kappa, *threads, *cache_dir,
      *seed, *frame_length, *hop, *f0_floor, *f0_ceil, *voicing, *silence_db, *min_silence, *min_leaf,
      *confidence, *no_prune;
  std::string fs_value, fs_file_value, cache_value;
  bool no_prune_value = false;

  void Add(CLI::App *app) {
    app->add_option("--config", config, "JSON run config; flags override it");
    corpus = app->add_option("--corpus", v.corpus, "manifest path");
    out_dir = app->add_option("--out", v.out_dir, "output directory");
    feature_set = app->add_option("--feature-set", fs_value, "A B C D E nonprosodic or sums like B+nonprosodic");
    feature_set_file = app->add_option("--feature-set-file", fs_file_value, "JSON feature set");
    model = app->add_option("--model", v.model, "linear or majority")->check(CLI::IsMember({"linear", "majority"}));
    kappa = app->add_option("--kappa", v.kappa, "pairwise or fleiss");
    threads = app->add_option("--threads", v.threads, "worker threads, 0 = all cores");
    cache_dir = app->add_option("--cache-dir", cache_value, "tracker output cache");
    seed = app->add_option("--seed", v.seed, "recorded in reports");
    frame_length = app->add_option("--frame-length", v.tracker.frame_length);
    hop = app->add_option("--hop", v.tracker.hop);
    f0_floor = app->add_option("--f0-floor", v.tracker.f0_floor);
    f0_ceil = app->add_option("--f0-ceil", v.tracker.f0_ceil);
    voicing = app->add_option("--voicing-threshold", v.tracker.voicing_threshold);
    silence_db = app->add_option("--silence-db", v.tracker.silence_db_threshold);
    min_silence = app->add_option("--min-silence", v.tracker.min_silence_run);
    min_leaf = app->add_option("--min-leaf", v.tree.min_leaf);
    confidence = app->add_option("--confidence", v.tree.confidence);
    no_prune = app->add_flag("--no-prune", no_prune_value, "grow unpruned trees");
  }

  RunConfig Resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : LoadConfigFile(config);
    auto given = [](const CLI::Option *o) { return o->count() > 0; };
    if (given(corpus)) c.corpus = v.corpus;
    if (given(out_dir)) c.out_dir = v.out_dir;
    if (given(feature_set)) c.feature_set = fs_value;
    if (given(feature_set_file)) c.feature_set_file = fs_file_value;
    if (given(model)) c.model = v.model;
    if (given(kappa)) c.kappa = v.kappa;
    if (given(threads)) c.threads = v.threads;
    if (given(cache_dir)) c.cache_dir = cache_value;
    if (given(seed)) c.seed = v.seed;
    if (given(frame_length)) c.tracker.frame_length = v.tracker.frame_length;
    if (given(hop)) c.tracker.hop = v.tracker.hop;
    if (given(f0_floor)) c.tracker.f0_floor = v.tracker.f0_floor;
    if (given(f0_ceil)) c.tracker.f0_ceil = v.tracker.f0_ceil;
    if (given(voicing)) c.tracker.voicing_threshold = v.tracker.voicing_threshold;
    if (given(silence_db)) c.tracker.silence_db_threshold = v.tracker.silence_db_threshold;
    if (given(min_silence)) c.tracker.min_silence_run = v.tracker.min_silence_run;
    if (given(min_leaf)) c.tree.min_leaf = v.tree.min_leaf;
    if (given(confidence)) c.tree.confidence = v.tree.confidence;
    if (given(no_prune)) c.tree.prune = !no_prune_value;
    if (c.corpus.empty()) Usage("no corpus given (--corpus or config \"corpus\")");
    if (c.model != "linear" && c.model != "majority") Usage("model must be linear or majority");
    if (c.feature_set && c.feature_set_file) Usage("give feature_set or feature_set_file, not both");
    return c;
  }
};

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

// Loads the corpus and runs feature extraction through the cache.
struct Loaded {
  Corpus corpus;
  Lexicon lexicon;
  Dataset dataset;
};

Loaded LoadAndExtract(const RunConfig &c) {
  Loaded l;
  l.corpus = LoadManifest(c.corpus);
  l.lexicon = LoadCorpusLexicon(l.corpus);
  FeatureCache cache(c.cache_dir ? std::optional<fs::path>(*c.cache_dir) : std::nullopt);
  l.dataset = BuildDatasetCached(l.corpus, l.lexicon, {c.tracker, c.threads}, cache);
  return l;
}

FeatureSetSpec ResolveSpec(const RunConfig &c, const Dataset &ds, const FeatureSetSpec &fallback) {
  if (c.feature_set_file) {
    std::ifstream in(*c.feature_set_file);
    if (!in) Usage("cannot read feature set " + *c.feature_set_file);
    try {
      return FeatureSetSpec::FromJson(json::parse(in));
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kSchemaViolation, *c.feature_set_file + ": " + e.what());
    }
  }
  if (!c.feature_set) return fallback;
  const std::string &name = *c.feature_set;
  // E is chosen from this corpus's correlation table.
  if (name == "E") return RunCorrelations(ds).combination;
  if (name.rfind("E+", 0) == 0)
    return CombineSets(RunCorrelations(ds).combination, NamedSet(name.substr(2)));
  return NamedSet(name);
}

// ---------------------------------------------------------------------------

void CmdExtract(const RunConfig &c, bool normalized, bool nonprosodic, const std::string &output) {
  Loaded l = LoadAndExtract(c);
  std::ostringstream csv;
  csv << "utterance_id,speaker_id,perceived_mean,self_rating,correctness";
  for (Scope s : {Scope::kUtterance, Scope::kContext, Scope::kTarget})
    for (int f = 0; f < kNumProsodicFeatures; ++f)
      csv << ',' << ScopeName(s) << '.' << FeatureName(static_cast<FeatureId>(f));
  if (nonprosodic)
    for (int f = 0; f < kNumNonprosodicFeatures; ++f) csv << ",np." << NonprosodicFeatureName(f);
  csv << '\n';
  for (const DatasetRow &row : l.dataset.rows) {
    csv << row.utterance_id << ',' << row.speaker_id << ',' << FormatDouble(row.perceived_mean) << ','
        << row.self_rating << ',' << CorrectnessName(row.correctness);
    const SegmentedFeatures &seg = normalized ? row.normalized : row.raw;
    for (Scope s : {Scope::kUtterance, Scope::kContext, Scope::kTarget}) {
      const bool present = s == Scope::kUtterance || row.segmented;
      for (int f = 0; f < kNumProsodicFeatures; ++f) {
        const auto &v = seg[s].values[f];
        csv << ',' << (present && v ? FormatDouble(*v) : "NA");
      }
    }
    if (nonprosodic)
      for (double v : row.nonprosodic.values) csv << ',' << FormatDouble(v);
    csv << '\n';
  }
  if (output.empty() || output == "-") {
    std::cout << csv.str();
  } else {
    WriteText(output, csv.str());
  }
}

template <typename Report>
void WriteReport(const RunConfig &c, const std::string &name, const Report &report) {
  fs::create_directories(c.out_dir);
  ojson doc;
  doc["experiment"] = name;
  doc["seed"] = c.seed;
  doc["config"] = c.ToJson();
  doc["report"] = ToJson(report);
  WriteText(fs::path(c.out_dir) / (name + ".json"), doc.dump(2) + "\n");
  WriteText(fs::path(c.out_dir) / (name + ".txt"), RenderText(report));
}

void CmdAgreement(const RunConfig &c) {
  const Corpus corpus = LoadManifest(c.corpus, {.check_audio = false});
  WriteReport(c, "agreement", RunAgreement(corpus, ParseKappaVariant(c.kappa)));
}

void CmdExperiment(const RunConfig &c, const std::string &experiment) {
  if (experiment == "agreement") return CmdAgreement(c);
  const Loaded l = LoadAndExtract(c);
  const Dataset &ds = l.dataset;
  if (experiment == "perceived") {
    PerceivedOptions o;
    o.spec = ResolveSpec(c, ds, o.spec);
    o.model = c.model == "majority" ? PerceivedModel::kMajority : PerceivedModel::kLinear;
    o.scatter = true;
    WriteReport(c, experiment, RunPerceivedExperiment(ds, o));
  } else if (experiment == "triage") {
    TriageOptions o;
    o.spec = ResolveSpec(c, ds, o.spec);
    o.tree = c.tree;
    WriteReport(c, experiment, RunTriageExperiment(ds, o));
  } else if (experiment == "correlations") {
    WriteReport(c, experiment, RunCorrelations(ds));
  } else if (experiment == "localize") {
    LocalizationOptions o;
    o.spec = ResolveSpec(c, ds, o.spec);
    WriteReport(c, experiment, RunLocalization(ds, o));
  } else {
    Usage("unknown experiment " + experiment);
  }
}

// Linear model on every segmented single-target row, for reuse elsewhere.
void CmdTrain(const RunConfig &c, const std::string &output) {
  const Loaded l = LoadAndExtract(c);
  const FeatureSetSpec spec = ResolveSpec(c, l.dataset, ScopeSet(Scope::kUtterance));
  FeatureMatrix x;
  std::vector<double> y;
  for (const DatasetRow &row : l.dataset.rows) {
    if (!row.single_target || !row.segmented) continue;
    x.push_back(AssembleInputs(spec, row.normalized, &row.nonprosodic));
    y.push_back(row.perceived_mean);
  }
  if (x.empty()) throw Error(ErrorKind::kEmptyData, "no segmented single-target utterances");
  ojson doc;
  doc["feature_set"] = spec.ToJson();
  doc["model"] = FitOls(x, y).ToJson();
  const std::string path = output.empty() ? (fs::path(c.out_dir) / "model.json").string() : output;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  WriteText(path, doc.dump(2) + "\n");
}

void CmdValidate(const std::string &manifest, bool check_audio) {
  const Corpus corpus = LoadManifest(manifest, {.check_audio = check_audio});
  ojson doc;
  doc["valid"] = true;
  doc["utterances"] = corpus.utterances.size();
  doc["speakers"] = corpus.Speakers().size();
  doc["items"] = corpus.items.size();
  doc["judges"] = corpus.judges.size();
  std::cout << doc.dump() << "\n";
}

void CmdServe(const std::string &study_path, const std::string &data_dir, const std::string &host,
              int port) {
  Study study(StudyConfig::Load(study_path), data_dir);
  SessionServer server(&study);
  const int bound = server.Bind(host, port);
  std::cout << ojson{{"listening", host}, {"port", bound}}.dump() << std::endl;
  server.Run();
}

void CmdSynth(const std::string &dir, SyntheticOptions opts) {
  const SyntheticStudy s = GenerateSyntheticStudy(dir, opts);
  std::cout << ojson{{"manifest", s.manifest.string()}, {"utterances", s.corpus.utterances.size()}}.dump()
            << "\n";
}

void PrintError(std::string_view kind, const std::string &message, int code) {
  std::cerr << ojson{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
}

int Main(int argc, char **argv) {
  CLI::App app{"Prosodic certainty analysis"};
  app.require_subcommand(1);

  bool normalized = false, with_nonprosodic = false;
  std::string extract_out, train_out;
  Flags extract_flags, experiment_flags, agreement_flags, train_flags;

  auto *extract = app.add_subcommand("extract", "write the feature CSV");
  extract_flags.Add(extract);
  extract->add_flag("--normalized", normalized, "per-speaker z-scored values");
  extract->add_flag("--nonprosodic", with_nonprosodic, "append the nonprosodic columns");
  extract->add_option("-o,--output", extract_out, "CSV path, default stdout");

  std::string experiment_name;
  auto *experiment = app.add_subcommand("experiment", "run one experiment");
  experiment->add_option("name", experiment_name)->required()->check(CLI::IsMember(kExperiments));
  experiment_flags.Add(experiment);

  auto *agreement = app.add_subcommand("agreement", "inter-judge agreement");
  agreement_flags.Add(agreement);

  auto *train = app.add_subcommand("train", "fit a linear model on the whole corpus");
  train_flags.Add(train);
  train->add_option("-o,--output", train_out, "model path, default <out>/model.json");

  std::string validate_manifest;
  bool validate_audio = true;
  auto *validate = app.add_subcommand("validate", "check a manifest");
  validate->add_option("manifest", validate_manifest)->required();
  validate->add_flag("!--no-audio", validate_audio, "skip decoding audio");

  std::string study_path, data_dir = "study-data", host = "127.0.0.1";
  int port = 8080;
  auto *serve = app.add_subcommand("serve", "run the session service");
  serve->add_option("--study", study_path, "study config JSON")->required();
  serve->add_option("--data-dir", data_dir);
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  std::string synth_dir;
  SyntheticOptions synth_opts;
  auto *synth = app.add_subcommand("synth", "generate a synthetic study");
  synth->add_option("dir", synth_dir)->required();
  synth->add_option("--speakers", synth_opts.speakers);
  synth->add_option("--items", synth_opts.items);
  synth->add_option("--sample-rate", synth_opts.sample_rate);
  synth->add_option("--seed", synth_opts.seed);
  synth->add_option("--threads", synth_opts.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    PrintError(ErrorKindName(ErrorKind::kUsage), e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (*extract) CmdExtract(extract_flags.Resolve(), normalized, with_nonprosodic, extract_out);
    if (*experiment) CmdExperiment(experiment_flags.Resolve(), experiment_name);
    if (*agreement) CmdAgreement(agreement_flags.Resolve());
    if (*train) CmdTrain(train_flags.Resolve(), train_out);
    if (*validate) CmdValidate(validate_manifest, validate_audio);
    if (*serve) CmdServe(study_path, data_dir, host, port);
    if (*synth) CmdSynth(synth_dir, synth_opts);
  } catch (const Error &e) {
    const int code = e.kind() == ErrorKind::kUsage ? kExitUsage : kExitModule;
    PrintError(ErrorKindName(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception &e) {
    PrintError(ErrorKindName(ErrorKind::kIo), e.what(), kExitModule);
    return kExitModule;
  }
  return 0;
}

}  // namespace
}  // namespace certainty

int main(int argc, char **argv) { return certainty::Main(argc, argv); }
