// certainty/session.h

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

#ifndef CERTAINTY_SESSION_H_
#define CERTAINTY_SESSION_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "certainty/corpus.h"
#include "certainty/error.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace certainty {

// Elicitation and listener-annotation sessions. Every mutation is appended
// to sessions/<id>.jsonl under the data directory before it takes effect, and
// the logs are replayed on start. Recordings live under recordings/<id>/.

constexpr double kBeepOffsetSeconds = 1.5;
constexpr double kBeepTolerance = 0.050;

enum class ItemState { kPending, kContextShown, kTargetsRevealed, kRecorded, kSelfRated };
std::string_view ItemStateName(ItemState s);

struct StudyConfig {
  std::vector<std::string> judges;  // default j1..j5
  std::vector<Item> items;
  std::map<std::string, std::vector<std::string>> item_sets;
  std::optional<std::string> lexicon;  // copied into the exported manifest

  /// {"judges"?, "items": [...], "item_sets": {name: [item ids]}, "lexicon"?}.
  /// Items use the manifest item format.
  static StudyConfig FromJson(const nlohmann::json &doc);
  static StudyConfig Load(const std::filesystem::path &path);
};

struct ElicitationItem {
  std::string item_id;
  ItemState state = ItemState::kPending;
  std::map<std::string, double> timestamps;  // state name -> server time
  std::string recording;  // relative to the data directory
  int sample_rate = 0;
  std::optional<double> beep_delta;
  bool beep_flagged = false;
  int self_rating = 0;
  std::vector<int> chosen_options;
};

struct ElicitationSession {
  std::string session_id;
  std::string speaker_id;
  std::string item_set;
  std::uint64_t seed = 0;
  std::vector<ElicitationItem> items;  // presentation order

  bool complete() const;
  bool flagged() const;
  /// Index of the item currently accepting events, or items.size().
  std::size_t current() const;
};

struct AnnotationSession {
  std::string session_id;
  std::string judge_id;
  std::uint64_t seed = 0;
  std::vector<std::string> playlist;  // utterance ids
  std::map<std::string, int> ratings;

  bool complete() const { return ratings.size() == playlist.size(); }
};

/// Permutation of `ids` by the portable seeded shuffle.
std::vector<std::string> SeededOrder(std::vector<std::string> ids, std::uint64_t seed);

class Study {
 public:
  using Clock = std::function<double()>;

  /// Replays any existing logs under `data_dir`.
  Study(StudyConfig config, std::filesystem::path data_dir, Clock clock = {});
  ~Study();

  /// Throws UnknownItemSet for an unknown or empty set.
  nlohmann::ordered_json CreateElicitation(const std::string &speaker_id,
                                           const std::string &item_set, std::uint64_t seed);
  /// Throws UnknownUtterance when nothing has been recorded yet and
  /// IllegalTransition when the judge already has a session.
  nlohmann::ordered_json CreateAnnotation(const std::string &judge_id, std::uint64_t seed);

  /// Events: show_context, reveal_targets, submit_self_rating (with "rating"
  /// and "chosen_options"). Throws UnknownSession, IllegalTransition,
  /// RatingOutOfRange, SchemaViolation.
  nlohmann::ordered_json ApplyEvent(const std::string &session_id, const nlohmann::json &event);

  /// WAV PCM16 only; anything else is AudioRejected. A second upload for the
  /// same item is IllegalTransition.
  nlohmann::ordered_json UploadRecording(const std::string &session_id,
                                         const std::string &item_id,
                                         std::span<const std::uint8_t> wav,
                                         std::optional<double> beep_delta);

  nlohmann::ordered_json SubmitRating(const std::string &session_id,
                                      const std::string &utterance_id, int rating);

  nlohmann::ordered_json SessionJson(const std::string &session_id) const;

  /// Path of a stored recording. Throws UnknownUtterance.
  std::filesystem::path RecordingPath(const std::string &utterance_id) const;

  /// Manifest of the completed study, validated with audio checks. Throws
  /// IncompleteStudy carrying IncompletenessReport() as its message.
  nlohmann::ordered_json ExportManifest() const;
  nlohmann::ordered_json IncompletenessReport() const;

  const StudyConfig &config() const { return config_; }

 private:
  struct Elicitation;
  struct Annotation;

  void Replay();
  void Append(const std::string &session_id, const nlohmann::json &record);
  void ApplyRecord(const nlohmann::json &record);
  std::string NextSessionId(char prefix);
  std::vector<std::string> RecordedUtterances() const;  // caller holds mu_
  nlohmann::ordered_json ReportLocked() const;

  StudyConfig config_;
  std::filesystem::path data_dir_;
  Clock clock_;
  mutable std::shared_mutex mu_;  // exclusive for create and export
  std::map<std::string, std::unique_ptr<Elicitation>> elicitations_;
  std::map<std::string, std::unique_ptr<Annotation>> annotations_;
  int next_id_ = 1;
};

/// Utterance id assigned to an elicited item.
std::string UtteranceIdFor(const std::string &session_id, const std::string &item_id);

/// HTTP front end. Error bodies are {"error": kind, "message": text}.
class SessionServer {
 public:
  explicit SessionServer(Study *study);
  ~SessionServer();

  /// Returns the bound port; 0 asks the OS for one.
  int Bind(const std::string &host, int port);
  void Run();  // blocks until Stop()
  void Stop();

 private:
  Study *study_;
  std::unique_ptr<httplib::Server> server_;
};

int HttpStatusFor(ErrorKind kind);

}  // namespace certainty

#endif  // CERTAINTY_SESSION_H_
