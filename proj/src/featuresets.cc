// certainty/src/featuresets.cc

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

#include "certainty/featuresets.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "certainty/error.h"
#include "certainty/stats.h"

namespace certainty {

namespace {

constexpr double kEdgeSlack = 1e-6;
constexpr double kMinPiece = 1e-9;
constexpr Scope kScopes[] = {Scope::kUtterance, Scope::kContext, Scope::kTarget};

bool ByStart(const Interval &a, const Interval &b) { return a.start < b.start; }

std::string ScopeLabel(const FeatureRef &m) {
  return m.scope ? std::string(ScopeName(*m.scope)) : "nonprosodic";
}

std::string MemberName(const FeatureRef &m) {
  return m.scope ? std::string(FeatureName(FeatureAt(m.index)))
                 : std::string(NonprosodicFeatureName(m.index));
}

}  // namespace

std::vector<Interval> AbsorbPrecedingPauses(std::span<const Interval> targets,
                                            std::span<const Interval> silences,
                                            double hop) {
  std::vector<Interval> out(targets.begin(), targets.end());
  std::sort(out.begin(), out.end(), ByStart);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double lower = i > 0 ? out[i - 1].end : 0.0;
    double start = out[i].start;
    for (const auto &s : silences) {
      if (s.start < out[i].start && s.end >= out[i].start - hop && s.start < out[i].end)
        start = std::min(start, std::max(s.start, lower));
    }
    out[i].start = start;
  }
  return out;
}

SegmentedFeatures SegmentIntervals(const Contour &contour,
                                   std::span<const Interval> silences,
                                   std::span<const Interval> targets,
                                   int target_syllables, int total_syllables) {
  const double dur = contour.duration;
  if (targets.empty())
    throw Error(ErrorKind::kInvalidParameters, "segmentation needs at least one target");
  std::vector<Interval> spans;
  for (const auto &t : targets) {
    if (!(t.end > t.start) || t.start < -kEdgeSlack || t.end > dur + kEdgeSlack) {
      std::ostringstream msg;
      msg << "target (" << FormatDouble(t.start) << ", " << FormatDouble(t.end)
          << ") outside clip of " << FormatDouble(dur) << " s";
      throw Error(ErrorKind::kTargetSpanOutsideClip, msg.str());
    }
    spans.push_back({std::max(t.start, 0.0), std::min(t.end, dur)});
  }
  std::sort(spans.begin(), spans.end(), ByStart);
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i].start < spans[i - 1].end)
      throw Error(ErrorKind::kDegenerateInterval, "target spans overlap");

  spans = AbsorbPrecedingPauses(spans, silences, contour.hop);

  std::vector<Interval> context;
  double cursor = 0.0;
  for (const auto &t : spans) {
    if (t.start - cursor > kMinPiece) context.push_back({cursor, t.start});
    cursor = t.end;
  }
  if (dur - cursor > kMinPiece) context.push_back({cursor, dur});
  if (context.empty())
    throw Error(ErrorKind::kContextEmpty, "targets cover the whole clip");

  SegmentedFeatures out;
  out.effective_target = {spans.front().start, spans.back().end};
  out.context_pieces = context;
  const int context_syllables = std::max(0, total_syllables - target_syllables);
  out[Scope::kUtterance] = AggregateFeatures(contour, Interval{0.0, dur}, silences,
                                             total_syllables, Scope::kUtterance);
  out[Scope::kContext] =
      AggregateFeatures(contour, context, silences, context_syllables, Scope::kContext);
  out[Scope::kTarget] =
      AggregateFeatures(contour, spans, silences, target_syllables, Scope::kTarget);
  return out;
}

SegmentedFeatures SegmentFeatures(const Utterance &utterance, const Contour &contour,
                                  std::span<const Interval> silences,
                                  const Lexicon &lexicon) {
  std::vector<Interval> targets;
  int target_syllables = 0;
  std::span<const std::string> words(utterance.transcript);
  for (const auto &t : utterance.target_spans) {
    if (!t.time)
      throw Error(ErrorKind::kMissingAlignment,
                  utterance.utterance_id + ": target span has no time alignment");
    targets.push_back(*t.time);
    target_syllables += CountSyllables(
        lexicon, words.subspan(t.words.start_word, t.words.end_word - t.words.start_word + 1));
  }
  SegmentedFeatures out = SegmentIntervals(contour, silences, targets, target_syllables,
                                           CountSyllables(lexicon, words));
  out.utterance_id = utterance.utterance_id;
  return out;
}

SegmentedFeatures SegmentWithControlWord(const Utterance &utterance,
                                         const Contour &contour,
                                         std::span<const Interval> silences,
                                         const Lexicon &lexicon) {
  if (!utterance.control_span)
    throw Error(ErrorKind::kMissingControlWord,
                utterance.utterance_id + ": no control word marked");
  const ControlSpan &c = *utterance.control_span;
  if (!c.time)
    throw Error(ErrorKind::kMissingAlignment,
                utterance.utterance_id + ": control word has no time alignment");
  std::span<const std::string> words(utterance.transcript);
  Interval target = *c.time;
  SegmentedFeatures out =
      SegmentIntervals(contour, silences, std::span<const Interval>(&target, 1),
                       CountSyllables(lexicon, words.subspan(c.word_index, 1)),
                       CountSyllables(lexicon, words));
  out.utterance_id = utterance.utterance_id;
  return out;
}

std::map<std::string, ScopeStats> SpeakerScopeStats(std::span<const SegmentedFeatures> raw,
                                                     std::span<const std::string> speakers) {
  if (raw.size() != speakers.size())
    throw Error(ErrorKind::kLengthMismatch, "one speaker id per utterance required");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < raw.size(); ++i) members[speakers[i]].push_back(i);
  std::map<std::string, ScopeStats> out;
  for (const auto &[speaker, idx] : members) {
    ScopeStats stats;
    for (Scope s : kScopes) {
      std::vector<ProsodicFeatureVector> vs;
      for (std::size_t i : idx) vs.push_back(raw[i][s]);
      stats[static_cast<int>(s)] = ComputeNormalizationStats(vs);
    }
    out.emplace(speaker, stats);
  }
  return out;
}

SegmentedFeatures NormalizeSegmented(const SegmentedFeatures &raw, const ScopeStats &stats) {
  SegmentedFeatures out = raw;
  for (Scope s : kScopes) out[s] = ApplyNormalization(raw[s], stats[static_cast<int>(s)]);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> FeatureSetSpec::ColumnNames() const {
  std::vector<std::string> out;
  for (const auto &m : members) out.push_back(ScopeLabel(m) + "." + MemberName(m));
  return out;
}

bool FeatureSetSpec::uses_nonprosodic() const {
  return std::any_of(members.begin(), members.end(),
                     [](const FeatureRef &m) { return m.nonprosodic(); });
}

nlohmann::ordered_json FeatureSetSpec::ToJson() const {
  nlohmann::ordered_json doc;
  doc["set_id"] = set_id;
  if (!label.empty()) doc["label"] = label;
  doc["members"] = nlohmann::ordered_json::array();
  for (const auto &m : members)
    doc["members"].push_back({{"feature", MemberName(m)}, {"scope", ScopeLabel(m)}});
  return doc;
}

FeatureSetSpec FeatureSetSpec::FromJson(const nlohmann::json &doc) {
  auto bad = [](const std::string &msg) {
    return Error(ErrorKind::kSchemaViolation, "feature set: " + msg);
  };
  if (!doc.is_object() || !doc.contains("set_id") || !doc["set_id"].is_string() ||
      !doc.contains("members") || !doc["members"].is_array())
    throw bad("expected {set_id, members}");
  FeatureSetSpec spec;
  spec.set_id = doc["set_id"].get<std::string>();
  static const char *kIds[] = {"A", "B", "C", "D", "E", "nonprosodic", "custom"};
  if (std::find(std::begin(kIds), std::end(kIds), spec.set_id) == std::end(kIds))
    throw bad("unknown set_id '" + spec.set_id + "'");
  if (doc.contains("label") && doc["label"].is_string())
    spec.label = doc["label"].get<std::string>();
  for (const auto &m : doc["members"]) {
    if (!m.is_object() || !m.contains("feature") || !m.contains("scope") ||
        !m["feature"].is_string() || !m["scope"].is_string())
      throw bad("member needs feature and scope strings");
    const std::string feature = m["feature"].get<std::string>();
    const std::string scope = m["scope"].get<std::string>();
    FeatureRef ref;
    if (scope == "nonprosodic") {
      auto idx = ParseNonprosodicFeature(feature);
      if (!idx) throw bad("unknown nonprosodic feature '" + feature + "'");
      ref.index = *idx;
    } else {
      auto s = ParseScope(scope);
      auto f = ParseFeatureId(feature);
      if (!s) throw bad("unknown scope '" + scope + "'");
      if (!f) throw bad("unknown feature '" + feature + "'");
      ref.index = static_cast<int>(*f);
      ref.scope = *s;
    }
    spec.members.push_back(ref);
  }
  return spec;
}

FeatureSetSpec ScopeSet(Scope scope) {
  FeatureSetSpec spec;
  spec.set_id = scope == Scope::kUtterance ? "A" : scope == Scope::kTarget ? "B" : "C";
  for (int f = 0; f < kNumProsodicFeatures; ++f) spec.members.push_back({f, scope});
  return spec;
}

FeatureSetSpec AllProsodicSet() {
  FeatureSetSpec spec;
  spec.set_id = "D";
  for (Scope s : kScopes)
    for (int f = 0; f < kNumProsodicFeatures; ++f) spec.members.push_back({f, s});
  return spec;
}

FeatureSetSpec NonprosodicSet() {
  FeatureSetSpec spec;
  spec.set_id = "nonprosodic";
  for (int f = 0; f < kNumNonprosodicFeatures; ++f) spec.members.push_back({f, std::nullopt});
  return spec;
}

FeatureSetSpec CombineSets(const FeatureSetSpec &a, const FeatureSetSpec &b) {
  FeatureSetSpec spec;
  spec.set_id = "custom";
  spec.label = (a.label.empty() ? a.set_id : a.label) + "+" + (b.label.empty() ? b.set_id : b.label);
  spec.members = a.members;
  spec.members.insert(spec.members.end(), b.members.begin(), b.members.end());
  return spec;
}

FeatureSetSpec NamedSet(const std::string &name) {
  auto plus = name.find('+');
  if (plus != std::string::npos)
    return CombineSets(NamedSet(name.substr(0, plus)), NamedSet(name.substr(plus + 1)));
  if (name == "A") return ScopeSet(Scope::kUtterance);
  if (name == "B") return ScopeSet(Scope::kTarget);
  if (name == "C") return ScopeSet(Scope::kContext);
  if (name == "D") return AllProsodicSet();
  if (name == "nonprosodic") return NonprosodicSet();
  throw Error(ErrorKind::kInvalidParameters,
              "unknown feature set '" + name + "' (A B C D nonprosodic, joined with '+')");
}

std::vector<double> AssembleInputs(const FeatureSetSpec &spec,
                                   const SegmentedFeatures &segmented,
                                   const NonprosodicFeatureVector *nonprosodic) {
  std::vector<double> x;
  x.reserve(spec.members.size());
  for (const auto &m : spec.members) {
    if (m.nonprosodic()) {
      if (!nonprosodic)
        throw Error(ErrorKind::kMissingFeature,
                    segmented.utterance_id + ": nonprosodic features not supplied");
      x.push_back(nonprosodic->values.at(m.index));
      continue;
    }
    const auto &v = segmented[*m.scope][FeatureAt(m.index)];
    if (!v)
      throw Error(ErrorKind::kMissingFeature, segmented.utterance_id + ": " + ScopeLabel(m) +
                                                  "." + MemberName(m) + " is missing");
    x.push_back(*v);
  }
  return x;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json CorrelationTable::ToJson() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    nlohmann::ordered_json row;
    row["feature"] = FeatureName(FeatureAt(f));
    for (Scope s : kScopes) {
      const auto &c = at(FeatureAt(f), s);
      row[std::string(ScopeName(s))] = {
          {"r", c.r}, {"p", c.p}, {"n", c.n}, {"sig05", c.sig05()}, {"sig01", c.sig01()}};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CorrelationTable BuildCorrelationTable(std::span<const SegmentedFeatures> features,
                                       std::span<const double> targets) {
  if (features.size() != targets.size())
    throw Error(ErrorKind::kLengthMismatch, "one target per utterance required");
  CorrelationTable table;
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    for (Scope s : kScopes) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < features.size(); ++i) {
        const auto &v = features[i][s][FeatureAt(f)];
        if (v && std::isfinite(targets[i])) {
          x.push_back(*v);
          y.push_back(targets[i]);
        }
      }
      const std::string where =
          std::string(ScopeName(s)) + "." + std::string(FeatureName(FeatureAt(f)));
      if (x.size() < 3)
        throw Error(ErrorKind::kEmptyData, where + ": fewer than three observations");
      CorrelationCell &cell = table.at(FeatureAt(f), s);
      try {
        cell.r = PearsonR(x, y);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::kZeroVariance) throw;
        throw Error(ErrorKind::kZeroVariance, where + " is constant across the corpus");
      }
      cell.n = static_cast<int>(x.size());
      cell.p = PearsonPValue(cell.r, cell.n);
    }
  }
  return table;
}

FeatureSetSpec SelectCombinationSet(const CorrelationTable &table) {
  FeatureSetSpec spec;
  spec.set_id = "E";
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    Scope best = Scope::kUtterance;
    for (Scope s : kScopes)
      if (std::abs(table.at(FeatureAt(f), s).r) > std::abs(table.at(FeatureAt(f), best).r))
        best = s;
    spec.members.push_back({f, best});
  }
  return spec;
}

}  // namespace certainty
