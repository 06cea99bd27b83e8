// certainty/src/session.cc

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

#include "certainty/session.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "certainty/audio.h"
#include "certainty/error.h"
#include "certainty/lexicon.h"
#include "certainty/random.h"
#include "httplib.h"

namespace certainty {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kBlank = "___";

double SystemSeconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

Error Schema(const std::string &msg) { return Error(ErrorKind::kSchemaViolation, msg); }

template <typename T>
T Get(const json &doc, const char *key) {
  if (!doc.is_object() || !doc.contains(key)) throw Schema(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception &) {
    throw Schema(std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<std::string> Tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    std::string w = NormalizeWord(tok);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

std::size_t CountBlanks(std::string_view text) {
  std::size_t n = 0;
  for (auto p = text.find(kBlank); p != std::string_view::npos; p = text.find(kBlank, p + kBlank.size())) ++n;
  return n;
}

// Transcript of the context sentence with each blank filled by the chosen
// option, plus the word span each option occupies.
std::vector<std::string> FillTranscript(const Item &item, const std::vector<int> &chosen,
                                        std::vector<WordSpan> *spans) {
  std::vector<std::string> words;
  std::string_view rest = item.context_text;
  for (std::size_t s = 0; s < item.slots.size(); ++s) {
    const auto p = rest.find(kBlank);
    for (auto &w : Tokens(rest.substr(0, p))) words.push_back(std::move(w));
    const int start = static_cast<int>(words.size());
    for (auto &w : Tokens(item.slots[s].options[chosen[s]])) words.push_back(std::move(w));
    spans->push_back({start, static_cast<int>(words.size()) - 1});
    rest = rest.substr(p + kBlank.size());
  }
  for (auto &w : Tokens(rest)) words.push_back(std::move(w));
  return words;
}

std::string ReadText(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view ItemStateName(ItemState s) {
  switch (s) {
    case ItemState::kPending: return "pending";
    case ItemState::kContextShown: return "context_shown";
    case ItemState::kTargetsRevealed: return "targets_revealed";
    case ItemState::kRecorded: return "recorded";
    case ItemState::kSelfRated: return "self_rated";
  }
  return "";
}

StudyConfig StudyConfig::FromJson(const json &doc) {
  if (!doc.is_object()) throw Schema("study config must be an object");
  json manifest = {{"schema_version", kManifestSchemaVersion},
                   {"items", doc.contains("items") ? doc["items"] : json::array()},
                   {"utterances", json::array()}};
  if (doc.contains("judges")) manifest["judges"] = doc["judges"];
  Corpus c = ParseManifest(manifest, ".", LoadOptions{false});
  StudyConfig cfg;
  cfg.judges = c.judges;
  cfg.items = c.items;
  for (const auto &item : cfg.items)
    if (CountBlanks(item.context_text) != item.slots.size())
      throw Schema("item " + item.item_id + ": context_text needs one ___ per slot");
  if (doc.contains("item_sets")) {
    if (!doc["item_sets"].is_object()) throw Schema("item_sets must be an object");
    for (const auto &[name, ids] : doc["item_sets"].items()) {
      std::vector<std::string> v;
      try {
        v = ids.get<std::vector<std::string>>();
      } catch (const json::exception &) {
        throw Schema("item_sets." + name + " must be a list of item ids");
      }
      for (const auto &id : v)
        if (!c.FindItem(id)) throw Schema("item_sets." + name + ": unknown item " + id);
      cfg.item_sets[name] = std::move(v);
    }
  }
  if (doc.contains("lexicon")) cfg.lexicon = Get<std::string>(doc, "lexicon");
  return cfg;
}

StudyConfig StudyConfig::Load(const fs::path &path) {
  try {
    return FromJson(json::parse(ReadText(path)));
  } catch (const json::parse_error &e) {
    throw Schema(path.string() + ": " + e.what());
  }
}

bool ElicitationSession::complete() const {
  return std::all_of(items.begin(), items.end(),
                     [](const ElicitationItem &i) { return i.state == ItemState::kSelfRated; });
}

bool ElicitationSession::flagged() const {
  return std::any_of(items.begin(), items.end(), [](const ElicitationItem &i) { return i.beep_flagged; });
}

std::size_t ElicitationSession::current() const {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].state != ItemState::kSelfRated) return i;
  return items.size();
}

std::vector<std::string> SeededOrder(std::vector<std::string> ids, std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(&ids);
  return ids;
}

std::string UtteranceIdFor(const std::string &session_id, const std::string &item_id) {
  return session_id + "_" + item_id;
}

// ---------------------------------------------------------------------------

struct Study::Elicitation {
  std::mutex mu;
  ElicitationSession s;
};

struct Study::Annotation {
  std::mutex mu;
  AnnotationSession s;
};

Study::Study(StudyConfig config, fs::path data_dir, Clock clock)
    : config_(std::move(config)), data_dir_(std::move(data_dir)), clock_(std::move(clock)) {
  if (!clock_) clock_ = SystemSeconds;
  if (config_.judges.empty())
    for (int j = 1; j <= kDefaultJudgeCount; ++j) config_.judges.push_back("j" + std::to_string(j));
  fs::create_directories(data_dir_ / "sessions");
  fs::create_directories(data_dir_ / "recordings");
  Replay();
}

Study::~Study() = default;

void Study::Replay() {
  std::vector<fs::path> logs;
  for (const auto &e : fs::directory_iterator(data_dir_ / "sessions"))
    if (e.path().extension() == ".jsonl") logs.push_back(e.path());
  std::sort(logs.begin(), logs.end());
  for (const auto &path : logs) {
    std::istringstream in(ReadText(path));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        ApplyRecord(json::parse(line));
      } catch (const json::exception &e) {
        throw Schema(path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
    const std::string id = path.stem().string();
    try {
      next_id_ = std::max(next_id_, std::stoi(id.substr(1)) + 1);
    } catch (const std::exception &) {
      throw Schema("unexpected session log name " + path.string());
    }
  }
  if (!logs.empty()) spdlog::info("replayed {} session logs", logs.size());
}

void Study::Append(const std::string &session_id, const json &record) {
  const fs::path path = data_dir_ / "sessions" / (session_id + ".jsonl");
  std::ofstream out(path, std::ios::app);
  out << record.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "cannot append to " + path.string());
}

void Study::ApplyRecord(const json &r) {
  const std::string op = r.at("op");
  const std::string sid = r.at("session_id");
  const double t = r.at("t");
  if (op == "create") {
    if (r.at("kind") == "elicitation") {
      auto e = std::make_unique<Elicitation>();
      e->s.session_id = sid;
      e->s.speaker_id = r.at("speaker_id");
      e->s.item_set = r.at("item_set");
      e->s.seed = r.at("seed");
      for (const auto &id : r.at("items")) {
        ElicitationItem it;
        it.item_id = id;
        it.timestamps["pending"] = t;
        e->s.items.push_back(std::move(it));
      }
      elicitations_[sid] = std::move(e);
    } else {
      auto a = std::make_unique<Annotation>();
      a->s.session_id = sid;
      a->s.judge_id = r.at("judge_id");
      a->s.seed = r.at("seed");
      a->s.playlist = r.at("playlist").get<std::vector<std::string>>();
      annotations_[sid] = std::move(a);
    }
    return;
  }
  if (op == "rating") {
    annotations_.at(sid)->s.ratings[r.at("utterance_id")] = r.at("rating");
    return;
  }
  auto &items = elicitations_.at(sid)->s.items;
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const ElicitationItem &i) { return i.item_id == r.at("item_id"); });
  if (it == items.end()) throw Schema("log names an unknown item");
  if (op == "show_context") {
    it->state = ItemState::kContextShown;
  } else if (op == "reveal_targets") {
    it->state = ItemState::kTargetsRevealed;
  } else if (op == "recorded") {
    it->state = ItemState::kRecorded;
    it->recording = r.at("path");
    it->sample_rate = r.at("sample_rate");
    if (r.contains("beep_delta_s")) {
      it->beep_delta = r["beep_delta_s"].get<double>();
      it->beep_flagged = std::abs(*it->beep_delta - kBeepOffsetSeconds) > kBeepTolerance;
    }
  } else if (op == "self_rated") {
    it->state = ItemState::kSelfRated;
    it->self_rating = r.at("rating");
    it->chosen_options = r.at("chosen_options").get<std::vector<int>>();
  } else {
    throw Schema("unknown log op " + op);
  }
  it->timestamps[std::string(ItemStateName(it->state))] = t;
}

std::string Study::NextSessionId(char prefix) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04d", prefix, next_id_++);
  return buf;
}

std::vector<std::string> Study::RecordedUtterances() const {
  std::vector<std::string> ids;
  for (const auto &[sid, e] : elicitations_)
    for (const auto &it : e->s.items)
      if (it.state == ItemState::kSelfRated) ids.push_back(UtteranceIdFor(sid, it.item_id));
  std::sort(ids.begin(), ids.end());
  return ids;
}

ojson Study::CreateElicitation(const std::string &speaker_id, const std::string &item_set,
                               std::uint64_t seed) {
  if (speaker_id.empty()) throw Schema("speaker_id must be non-empty");
  std::unique_lock lock(mu_);
  auto set = config_.item_sets.find(item_set);
  if (set == config_.item_sets.end() || set->second.empty())
    throw Error(ErrorKind::kUnknownItemSet, "unknown or empty item set '" + item_set + "'");
  for (const auto &[sid, e] : elicitations_)
    if (e->s.speaker_id == speaker_id)
      throw Error(ErrorKind::kIllegalTransition,
                  "speaker " + speaker_id + " already has session " + sid);
  const std::string sid = NextSessionId('E');
  json rec = {{"op", "create"},         {"session_id", sid}, {"kind", "elicitation"},
              {"speaker_id", speaker_id}, {"item_set", item_set}, {"seed", seed},
              {"items", SeededOrder(set->second, seed)}, {"t", clock_()}};
  Append(sid, rec);
  ApplyRecord(rec);
  lock.unlock();
  return SessionJson(sid);
}

ojson Study::CreateAnnotation(const std::string &judge_id, std::uint64_t seed) {
  std::unique_lock lock(mu_);
  if (std::find(config_.judges.begin(), config_.judges.end(), judge_id) == config_.judges.end())
    throw Error(ErrorKind::kInvalidParameters, "judge '" + judge_id + "' is not in the study");
  for (const auto &[sid, a] : annotations_)
    if (a->s.judge_id == judge_id)
      throw Error(ErrorKind::kIllegalTransition, "judge " + judge_id + " already has session " + sid);
  auto utterances = RecordedUtterances();
  if (utterances.empty()) throw Error(ErrorKind::kUnknownUtterance, "no recorded utterances to annotate");
  const std::string sid = NextSessionId('A');
  json rec = {{"op", "create"},       {"session_id", sid}, {"kind", "annotation"},
              {"judge_id", judge_id}, {"seed", seed},
              {"playlist", SeededOrder(std::move(utterances), seed)}, {"t", clock_()}};
  Append(sid, rec);
  ApplyRecord(rec);
  lock.unlock();
  return SessionJson(sid);
}

ojson Study::ApplyEvent(const std::string &session_id, const json &event) {
  std::shared_lock lock(mu_);
  auto found = elicitations_.find(session_id);
  if (found == elicitations_.end()) {
    if (annotations_.count(session_id))
      throw Error(ErrorKind::kIllegalTransition, "annotation sessions take ratings, not events");
    throw Error(ErrorKind::kUnknownSession, "unknown session " + session_id);
  }
  Elicitation &e = *found->second;
  std::lock_guard guard(e.mu);
  const std::string type = Get<std::string>(event, "type");
  const std::size_t cur = e.s.current();
  if (cur == e.s.items.size())
    throw Error(ErrorKind::kIllegalTransition, "session " + session_id + " is complete");
  ElicitationItem &item = e.s.items[cur];
  if (event.contains("item_id") && Get<std::string>(event, "item_id") != item.item_id)
    throw Error(ErrorKind::kIllegalTransition,
                "item " + Get<std::string>(event, "item_id") + " is not the current item (" +
                    item.item_id + ")");
  const Item &spec = *std::find_if(config_.items.begin(), config_.items.end(),
                                   [&](const Item &i) { return i.item_id == item.item_id; });
  auto illegal = [&] {
    return Error(ErrorKind::kIllegalTransition, type + " not allowed in state " +
                                                    std::string(ItemStateName(item.state)));
  };

  json rec = {{"session_id", session_id}, {"item_id", item.item_id}};
  ojson out = {{"session_id", session_id}, {"item_id", item.item_id}};
  if (type == "show_context") {
    if (item.state != ItemState::kPending) throw illegal();
    rec["op"] = "show_context";
    out["context_text"] = spec.context_text;
  } else if (type == "reveal_targets") {
    if (item.state != ItemState::kContextShown) throw illegal();
    rec["op"] = "reveal_targets";
    ojson options = ojson::array();
    for (const auto &s : spec.slots) options.push_back(s.options);
    out["options"] = options;
    out["beep_offset_s"] = kBeepOffsetSeconds;
  } else if (type == "submit_self_rating") {
    if (item.state != ItemState::kRecorded) throw illegal();
    const int rating = Get<int>(event, "rating");
    if (rating < 1 || rating > 5)
      throw Error(ErrorKind::kRatingOutOfRange, "self rating " + std::to_string(rating) + " outside [1, 5]");
    const auto chosen = Get<std::vector<int>>(event, "chosen_options");
    if (chosen.size() != spec.slots.size())
      throw Schema("chosen_options needs one entry per slot (" + std::to_string(spec.slots.size()) + ")");
    for (std::size_t s = 0; s < chosen.size(); ++s)
      if (chosen[s] < 0 || chosen[s] >= static_cast<int>(spec.slots[s].options.size()))
        throw Schema("chosen_options[" + std::to_string(s) + "] out of range");
    rec["op"] = "self_rated";
    rec["rating"] = rating;
    rec["chosen_options"] = chosen;
  } else if (type == "upload_recording") {
    throw Schema("recordings are uploaded with PUT /sessions/{id}/recordings/{item}");
  } else {
    throw Schema("unknown event type '" + type + "'");
  }
  rec["t"] = clock_();
  Append(session_id, rec);
  ApplyRecord(rec);
  out["state"] = ItemStateName(item.state);
  return out;
}

ojson Study::UploadRecording(const std::string &session_id, const std::string &item_id,
                             std::span<const std::uint8_t> wav, std::optional<double> beep_delta) {
  std::shared_lock lock(mu_);
  auto found = elicitations_.find(session_id);
  if (found == elicitations_.end())
    throw Error(ErrorKind::kUnknownSession, "unknown elicitation session " + session_id);
  Elicitation &e = *found->second;
  std::lock_guard guard(e.mu);
  auto &items = e.s.items;
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const ElicitationItem &i) { return i.item_id == item_id; });
  if (it == items.end())
    throw Error(ErrorKind::kIllegalTransition, "item " + item_id + " is not in session " + session_id);
  if (it->state != ItemState::kTargetsRevealed)
    throw Error(ErrorKind::kIllegalTransition,
                "upload not allowed in state " + std::string(ItemStateName(it->state)));
  int rate = 0;
  double duration = 0;
  try {
    AudioClip clip = DecodeWav(wav);
    rate = clip.sample_rate();
    duration = clip.duration();
  } catch (const Error &err) {
    throw Error(ErrorKind::kAudioRejected, std::string(err.name()) + ": " + err.what());
  }
  const fs::path rel = fs::path("recordings") / session_id / (item_id + ".wav");
  const fs::path abs = data_dir_ / rel;
  fs::create_directories(abs.parent_path());
  {
    std::ofstream out(abs.string() + ".tmp", std::ios::binary);
    out.write(reinterpret_cast<const char *>(wav.data()), static_cast<std::streamsize>(wav.size()));
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + abs.string());
  }
  fs::rename(abs.string() + ".tmp", abs);
  json rec = {{"op", "recorded"},   {"session_id", session_id}, {"item_id", item_id},
              {"path", rel.generic_string()}, {"sample_rate", rate}, {"duration_s", duration},
              {"t", clock_()}};
  if (beep_delta) rec["beep_delta_s"] = *beep_delta;
  Append(session_id, rec);
  ApplyRecord(rec);
  return {{"session_id", session_id},
          {"item_id", item_id},
          {"state", ItemStateName(it->state)},
          {"utterance_id", UtteranceIdFor(session_id, item_id)},
          {"beep_flagged", it->beep_flagged}};
}

ojson Study::SubmitRating(const std::string &session_id, const std::string &utterance_id, int rating) {
  std::shared_lock lock(mu_);
  auto found = annotations_.find(session_id);
  if (found == annotations_.end()) {
    if (elicitations_.count(session_id))
      throw Error(ErrorKind::kIllegalTransition, "elicitation sessions take events, not ratings");
    throw Error(ErrorKind::kUnknownSession, "unknown session " + session_id);
  }
  Annotation &a = *found->second;
  std::lock_guard guard(a.mu);
  if (std::find(a.s.playlist.begin(), a.s.playlist.end(), utterance_id) == a.s.playlist.end())
    throw Error(ErrorKind::kUnknownUtterance, "utterance " + utterance_id + " is not in the playlist");
  if (rating < 1 || rating > 5)
    throw Error(ErrorKind::kRatingOutOfRange, "rating " + std::to_string(rating) + " outside [1, 5]");
  if (a.s.ratings.count(utterance_id))
    throw Error(ErrorKind::kDuplicateRating, "utterance " + utterance_id + " already rated");
  json rec = {{"op", "rating"},
              {"session_id", session_id},
              {"utterance_id", utterance_id},
              {"rating", rating},
              {"t", clock_()}};
  Append(session_id, rec);
  ApplyRecord(rec);
  return {{"session_id", session_id},
          {"rated", a.s.ratings.size()},
          {"remaining", a.s.playlist.size() - a.s.ratings.size()}};
}

ojson Study::SessionJson(const std::string &session_id) const {
  std::shared_lock lock(mu_);
  if (auto f = elicitations_.find(session_id); f != elicitations_.end()) {
    std::lock_guard guard(f->second->mu);
    const auto &s = f->second->s;
    ojson items = ojson::array();
    for (const auto &it : s.items) {
      ojson j = {{"item_id", it.item_id}, {"state", ItemStateName(it.state)}};
      ojson ts = ojson::object();
      for (ItemState st : {ItemState::kPending, ItemState::kContextShown, ItemState::kTargetsRevealed,
                           ItemState::kRecorded, ItemState::kSelfRated}) {
        auto t = it.timestamps.find(std::string(ItemStateName(st)));
        if (t != it.timestamps.end()) ts[t->first] = t->second;
      }
      j["timestamps"] = ts;
      if (!it.recording.empty()) j["utterance_id"] = UtteranceIdFor(s.session_id, it.item_id);
      if (it.beep_delta) j["beep_delta_s"] = *it.beep_delta;
      j["beep_flagged"] = it.beep_flagged;
      if (it.state == ItemState::kSelfRated) j["self_rating"] = it.self_rating;
      items.push_back(std::move(j));
    }
    const std::size_t cur = s.current();
    return {{"session_id", s.session_id},
            {"kind", "elicitation"},
            {"speaker_id", s.speaker_id},
            {"item_set", s.item_set},
            {"seed", s.seed},
            {"beep_offset_s", kBeepOffsetSeconds},
            {"complete", s.complete()},
            {"flagged", s.flagged()},
            {"current_item", cur < s.items.size() ? ojson(s.items[cur].item_id) : ojson(nullptr)},
            {"items", items}};
  }
  if (auto f = annotations_.find(session_id); f != annotations_.end()) {
    std::lock_guard guard(f->second->mu);
    const auto &s = f->second->s;
    ojson playlist = ojson::array();
    for (const auto &u : s.playlist)
      playlist.push_back({{"utterance_id", u}, {"audio_url", "/recordings/" + u}, {"rated", s.ratings.count(u) > 0}});
    return {{"session_id", s.session_id},
            {"kind", "annotation"},
            {"judge_id", s.judge_id},
            {"seed", s.seed},
            {"complete", s.complete()},
            {"playlist", playlist}};
  }
  throw Error(ErrorKind::kUnknownSession, "unknown session " + session_id);
}

fs::path Study::RecordingPath(const std::string &utterance_id) const {
  std::shared_lock lock(mu_);
  for (const auto &[sid, e] : elicitations_) {
    std::lock_guard guard(e->mu);
    for (const auto &it : e->s.items)
      if (!it.recording.empty() && UtteranceIdFor(sid, it.item_id) == utterance_id)
        return data_dir_ / it.recording;
  }
  throw Error(ErrorKind::kUnknownUtterance, "no recording for " + utterance_id);
}

ojson Study::ReportLocked() const {
  const auto utterances = RecordedUtterances();
  const std::set<std::string> expected(utterances.begin(), utterances.end());
  bool complete = !utterances.empty();
  ojson elicit = ojson::array();
  for (const auto &[sid, e] : elicitations_) {
    const auto pending = std::count_if(e->s.items.begin(), e->s.items.end(), [](const ElicitationItem &i) {
      return i.state != ItemState::kSelfRated;
    });
    if (pending) complete = false;
    elicit.push_back({{"session_id", sid}, {"speaker_id", e->s.speaker_id}, {"pending_items", pending}});
  }
  ojson judges = ojson::array();
  for (const auto &judge : config_.judges) {
    const Annotation *a = nullptr;
    for (const auto &[sid, ann] : annotations_)
      if (ann->s.judge_id == judge) a = ann.get();
    std::size_t missing = utterances.size();
    if (a) {
      missing = 0;
      for (const auto &u : utterances)
        if (!a->s.ratings.count(u)) ++missing;
    }
    if (missing) complete = false;
    judges.push_back({{"judge_id", judge},
                      {"session_id", a ? ojson(a->s.session_id) : ojson(nullptr)},
                      {"missing_ratings", missing}});
  }
  return {{"complete", complete},
          {"utterances", utterances.size()},
          {"elicitation", elicit},
          {"judges", judges}};
}

ojson Study::IncompletenessReport() const {
  std::unique_lock lock(mu_);
  return ReportLocked();
}

ojson Study::ExportManifest() const {
  std::unique_lock lock(mu_);
  ojson report = ReportLocked();
  if (!report["complete"].get<bool>())
    throw Error(ErrorKind::kIncompleteStudy, report.dump());

  Corpus corpus;
  corpus.judges = config_.judges;
  corpus.items = config_.items;
  corpus.lexicon_path = config_.lexicon;
  std::map<std::string, const Annotation *> by_judge;
  for (const auto &[sid, a] : annotations_) by_judge[a->s.judge_id] = a.get();
  for (const auto &[sid, e] : elicitations_) {
    for (std::size_t k = 0; k < e->s.items.size(); ++k) {
      const ElicitationItem &it = e->s.items[k];
      const Item &item = *corpus.FindItem(it.item_id);
      Utterance u;
      u.utterance_id = UtteranceIdFor(sid, it.item_id);
      u.speaker_id = e->s.speaker_id;
      u.item_id = it.item_id;
      u.audio = it.recording;
      u.sample_rate = it.sample_rate;
      std::vector<WordSpan> spans;
      u.transcript = FillTranscript(item, it.chosen_options, &spans);
      for (const auto &sp : spans) u.target_spans.push_back({sp, std::nullopt});
      if (item.control_word) {
        const std::string cw = NormalizeWord(*item.control_word);
        for (int w = 0; w < static_cast<int>(u.transcript.size()); ++w) {
          const bool in_target = std::any_of(spans.begin(), spans.end(), [&](const WordSpan &s) {
            return w >= s.start_word && w <= s.end_word;
          });
          if (!in_target && u.transcript[w] == cw) {
            u.control_span = ControlSpan{w, std::nullopt};
            break;
          }
        }
      }
      u.chosen_options = it.chosen_options;
      bool correct = true;
      for (std::size_t s = 0; s < item.slots.size(); ++s) {
        const auto &ok = item.slots[s].correct;
        correct = correct && std::find(ok.begin(), ok.end(), it.chosen_options[s]) != ok.end();
      }
      u.correctness = correct ? Correctness::kCorrect : Correctness::kIncorrect;
      u.self_rating = it.self_rating;
      for (const auto &judge : config_.judges) u.listener_ratings.push_back(by_judge.at(judge)->s.ratings.at(u.utterance_id));
      u.presentation_ordinal = static_cast<int>(k) + 1;
      corpus.utterances.push_back(std::move(u));
    }
  }
  ojson doc = ManifestToJson(corpus);
  ParseManifest(json::parse(doc.dump()), data_dir_, LoadOptions{true});
  return doc;
}

// ---------------------------------------------------------------------------
// HTTP

int HttpStatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownSession:
    case ErrorKind::kUnknownUtterance:
    case ErrorKind::kUnknownItemSet:
      return 404;
    case ErrorKind::kIllegalTransition:
    case ErrorKind::kDuplicateRating:
    case ErrorKind::kIncompleteStudy:
      return 409;
    case ErrorKind::kRatingOutOfRange:
    case ErrorKind::kAudioRejected:
    case ErrorKind::kInvalidParameters:
      return 422;
    case ErrorKind::kSchemaViolation:
    case ErrorKind::kUsage:
      return 400;
    default:
      return 500;
  }
}

namespace {

void SendJson(httplib::Response &res, int status, const ojson &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json ParseBody(const httplib::Request &req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error &e) {
    throw Schema(std::string("request body is not JSON: ") + e.what());
  }
}

template <typename F>
httplib::Server::Handler Guard(F f) {
  return [f](const httplib::Request &req, httplib::Response &res) {
    try {
      f(req, res);
    } catch (const Error &e) {
      ojson body = {{"error", e.name()}, {"message", e.what()}};
      if (e.kind() == ErrorKind::kIncompleteStudy) {
        body["message"] = "study is incomplete";
        body["report"] = ojson::parse(e.what());
      }
      SendJson(res, HttpStatusFor(e.kind()), body);
    } catch (const std::exception &e) {
      SendJson(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

SessionServer::SessionServer(Study *study) : study_(study), server_(std::make_unique<httplib::Server>()) {
  auto &s = *server_;
  s.Post("/sessions", Guard([this](const httplib::Request &req, httplib::Response &res) {
           const json body = ParseBody(req);
           const std::string kind = Get<std::string>(body, "kind");
           const auto seed = body.contains("seed") ? Get<std::uint64_t>(body, "seed") : 0;
           if (kind == "elicitation") {
             SendJson(res, 201,
                      study_->CreateElicitation(Get<std::string>(body, "speaker_id"),
                                                Get<std::string>(body, "item_set"), seed));
           } else if (kind == "annotation") {
             SendJson(res, 201, study_->CreateAnnotation(Get<std::string>(body, "judge_id"), seed));
           } else {
             throw Schema("kind must be elicitation or annotation");
           }
         }));
  s.Get(R"(/sessions/([^/]+))", Guard([this](const httplib::Request &req, httplib::Response &res) {
          SendJson(res, 200, study_->SessionJson(req.matches[1]));
        }));
  s.Post(R"(/sessions/([^/]+)/events)", Guard([this](const httplib::Request &req, httplib::Response &res) {
           SendJson(res, 200, study_->ApplyEvent(req.matches[1], ParseBody(req)));
         }));
  s.Put(R"(/sessions/([^/]+)/recordings/([^/]+))",
        Guard([this](const httplib::Request &req, httplib::Response &res) {
          std::optional<double> delta;
          if (req.has_param("beep_delta_s")) {
            try {
              delta = std::stod(req.get_param_value("beep_delta_s"));
            } catch (const std::exception &) {
              throw Schema("beep_delta_s must be a number");
            }
          }
          std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t *>(req.body.data()),
                                              req.body.size());
          SendJson(res, 200, study_->UploadRecording(req.matches[1], req.matches[2], bytes, delta));
        }));
  s.Post(R"(/sessions/([^/]+)/ratings)", Guard([this](const httplib::Request &req, httplib::Response &res) {
           const json body = ParseBody(req);
           SendJson(res, 200,
                    study_->SubmitRating(req.matches[1], Get<std::string>(body, "utterance_id"),
                                         Get<int>(body, "rating")));
         }));
  s.Get(R"(/recordings/([^/]+))", Guard([this](const httplib::Request &req, httplib::Response &res) {
          const auto bytes = ReadFileBytes(study_->RecordingPath(req.matches[1]).string());
          res.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
        }));
  s.Get("/export/manifest", Guard([this](const httplib::Request &, httplib::Response &res) {
          SendJson(res, 200, study_->ExportManifest());
        }));
}

SessionServer::~SessionServer() { Stop(); }

int SessionServer::Bind(const std::string &host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::kIo, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void SessionServer::Run() { server_->listen_after_bind(); }

void SessionServer::Stop() {
  if (server_) server_->stop();
}

}  // namespace certainty
