// certainty/featuresets.h

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

#ifndef CERTAINTY_FEATURESETS_H_
#define CERTAINTY_FEATURESETS_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certainty/corpus.h"
#include "certainty/prosody.h"
#include "json.hpp"

namespace certainty {

constexpr int kNumScopes = 3;

/// Utterance, context and target vectors of one utterance.
struct SegmentedFeatures {
  std::string utterance_id;
  std::array<ProsodicFeatureVector, kNumScopes> scopes;
  Interval effective_target;  // hull of the targets after pause absorption
  std::vector<Interval> context_pieces;

  ProsodicFeatureVector &operator[](Scope s) { return scopes[static_cast<int>(s)]; }
  const ProsodicFeatureVector &operator[](Scope s) const {
    return scopes[static_cast<int>(s)];
  }
};

/// Extends each target leftward over a silence run that ends at (or within
/// one hop of) its start. Runs never reach back past the previous target.
std::vector<Interval> AbsorbPrecedingPauses(std::span<const Interval> targets,
                                            std::span<const Interval> silences,
                                            double hop);

/// Segments a clip given explicit target intervals. Throws
/// TargetSpanOutsideClip or ContextEmpty.
SegmentedFeatures SegmentIntervals(const Contour &contour,
                                   std::span<const Interval> silences,
                                   std::span<const Interval> targets,
                                   int target_syllables, int total_syllables);

/// Uses the utterance's aligned target spans. Throws MissingAlignment when a
/// span has no times.
SegmentedFeatures SegmentFeatures(const Utterance &utterance, const Contour &contour,
                                  std::span<const Interval> silences,
                                  const Lexicon &lexicon);

/// Same with the control word standing in as the only target.
SegmentedFeatures SegmentWithControlWord(const Utterance &utterance,
                                         const Contour &contour,
                                         std::span<const Interval> silences,
                                         const Lexicon &lexicon);

// ---------------------------------------------------------------------------
// Speaker normalization

using ScopeStats = std::array<NormalizationStats, kNumScopes>;

/// Stats per speaker per scope over raw segmented vectors.
std::map<std::string, ScopeStats> SpeakerScopeStats(
    std::span<const SegmentedFeatures> raw, std::span<const std::string> speakers);

SegmentedFeatures NormalizeSegmented(const SegmentedFeatures &raw, const ScopeStats &stats);

// ---------------------------------------------------------------------------
// Feature set specs

/// A model input: one prosodic feature in one scope, or one nonprosodic
/// feature (scope empty).
struct FeatureRef {
  int index = 0;
  std::optional<Scope> scope;

  bool nonprosodic() const { return !scope.has_value(); }
  bool operator==(const FeatureRef &) const = default;
};

struct FeatureSetSpec {
  std::string set_id;  // A B C D E nonprosodic custom
  std::string label;   // free text for custom combinations
  std::vector<FeatureRef> members;

  std::vector<std::string> ColumnNames() const;
  bool uses_nonprosodic() const;
  nlohmann::ordered_json ToJson() const;
  static FeatureSetSpec FromJson(const nlohmann::json &doc);
};

FeatureSetSpec ScopeSet(Scope scope);  // A utterance, B target, C context
FeatureSetSpec AllProsodicSet();       // D
FeatureSetSpec NonprosodicSet();
/// Members of `a` followed by members of `b`; set_id "custom".
FeatureSetSpec CombineSets(const FeatureSetSpec &a, const FeatureSetSpec &b);

/// A B C D nonprosodic by id, or "B+nonprosodic" style sums. E needs a table
/// and is not resolvable here. Throws InvalidParameters.
FeatureSetSpec NamedSet(const std::string &name);

/// Throws MissingFeature for an absent member or nonprosodic members without
/// a nonprosodic vector.
std::vector<double> AssembleInputs(const FeatureSetSpec &spec,
                                   const SegmentedFeatures &segmented,
                                   const NonprosodicFeatureVector *nonprosodic = nullptr);

// ---------------------------------------------------------------------------
// Correlations

struct CorrelationCell {
  double r = 0.0;
  double p = 1.0;
  int n = 0;
  bool sig05() const { return p < 0.05; }
  bool sig01() const { return p < 0.01; }
};

struct CorrelationTable {
  std::array<std::array<CorrelationCell, kNumScopes>, kNumProsodicFeatures> cells{};

  CorrelationCell &at(FeatureId f, Scope s) {
    return cells[static_cast<int>(f)][static_cast<int>(s)];
  }
  const CorrelationCell &at(FeatureId f, Scope s) const {
    return cells[static_cast<int>(f)][static_cast<int>(s)];
  }
  nlohmann::ordered_json ToJson() const;
};

/// Pearson r of every (feature, scope) against the targets, with pairwise
/// deletion of missing values. Throws EmptyData with fewer than three
/// complete pairs in any cell and ZeroVariance for a constant feature.
CorrelationTable BuildCorrelationTable(std::span<const SegmentedFeatures> features,
                                       std::span<const double> targets);

/// Per feature, the scope with the largest |r|; ties favor utterance, then
/// context. Members are listed in feature order.
FeatureSetSpec SelectCombinationSet(const CorrelationTable &table);

}  // namespace certainty

#endif  // CERTAINTY_FEATURESETS_H_
