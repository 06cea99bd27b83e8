// certainty/prosody.h

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

#ifndef CERTAINTY_PROSODY_H_
#define CERTAINTY_PROSODY_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "certainty/audio.h"

namespace certainty {

/// Pitch and energy tracker parameters. Times in seconds.
struct TrackerConfig {
  double frame_length = 0.040;
  double hop = 0.010;
  double f0_floor = 50.0;
  double f0_ceil = 500.0;
  // Minimum normalized autocorrelation peak for a frame to count as voiced.
  double voicing_threshold = 0.45;
  // Frame rms below (clip peak rms + this many dB) is silent.
  double silence_db_threshold = -35.0;
  double min_silence_run = 0.100;

  /// Throws InvalidParameters unless frame_length > hop > 0 and
  /// 0 < f0_floor < f0_ceil.
  void Validate() const;
};

struct Frame {
  double time = 0.0;  // frame center
  std::optional<double> f0;  // empty when unvoiced
  double rms = 0.0;

  bool voiced() const { return f0.has_value(); }
};

/// Frames of one clip plus the geometry needed to map them back to time.
struct Contour {
  std::vector<Frame> frames;
  double duration = 0.0;
  double frame_length = 0.0;
  double hop = 0.0;
};

struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool operator==(const Interval &) const = default;
};

/// One f0/rms frame per hop. f0 is the normalized-autocorrelation peak inside
/// [f0_floor, f0_ceil], refined by parabolic interpolation; frames whose peak
/// falls below the voicing threshold are unvoiced. Throws ClipTooShort when
/// the clip is shorter than one frame.
Contour ExtractContour(const AudioClip &clip, const TrackerConfig &config);

/// Maximal runs of frames whose rms is below the peak-relative threshold and
/// that last at least min_silence_run. Runs are disjoint and ordered. A run is
/// reported as the union of its frames' analysis windows, stretched to the
/// clip edges when it touches them.
std::vector<Interval> DetectSilence(const Contour &contour,
                                    const TrackerConfig &config);

// ---------------------------------------------------------------------------
// Feature inventory

constexpr int kNumProsodicFeatures = 20;

enum class FeatureId : int {
  kF0Min,
  kF0Max,
  kF0Mean,
  kF0Stdev,
  kF0Range,
  kF0RelposMin,
  kF0RelposMax,
  kF0AbsSlopeHz,
  kF0AbsSlopeSemi,
  kRmsMin,
  kRmsMax,
  kRmsMean,
  kRmsStdev,
  kRmsRelposMin,
  kRmsRelposMax,
  kSilenceTotal,
  kSilencePercent,
  kDurationTotal,
  kDurationSpeaking,
  kSpeakingRate,
};

enum class FeatureGroup { kPitch, kIntensity, kTemporal };

FeatureGroup GroupOf(FeatureId id);
std::string_view FeatureName(FeatureId id);
std::optional<FeatureId> ParseFeatureId(std::string_view name);
constexpr FeatureId FeatureAt(int index) { return static_cast<FeatureId>(index); }

enum class Scope { kUtterance, kContext, kTarget };

std::string_view ScopeName(Scope scope);
std::optional<Scope> ParseScope(std::string_view name);

/// The twenty prosodic features over one scope. Empty entries mark
/// values that could not be measured (no voiced frames, no frames at all).
struct ProsodicFeatureVector {
  Scope scope = Scope::kUtterance;
  bool normalized = false;
  std::array<std::optional<double>, kNumProsodicFeatures> values{};

  std::optional<double> &operator[](FeatureId id) {
    return values[static_cast<int>(id)];
  }
  const std::optional<double> &operator[](FeatureId id) const {
    return values[static_cast<int>(id)];
  }
  bool complete() const;
  bool has_pitch() const { return (*this)[FeatureId::kF0Mean].has_value(); }
};

constexpr double kSemitoneReferenceHz = 100.0;

/// Aggregates a contour over the union of `pieces` (pooled frames). Pitch
/// statistics use voiced frames, rms statistics all frames whose center lies
/// in a piece. Relative positions are measured against the hull of the pieces.
/// Throws DegenerateInterval for empty or out-of-clip pieces.
ProsodicFeatureVector AggregateFeatures(const Contour &contour,
                                        std::span<const Interval> pieces,
                                        std::span<const Interval> silences,
                                        int syllable_count, Scope scope);

ProsodicFeatureVector AggregateFeatures(const Contour &contour,
                                        Interval interval,
                                        std::span<const Interval> silences,
                                        int syllable_count, Scope scope);

/// Per-speaker, per-scope mean and sample standard deviation of every
/// pitch and intensity feature. Temporal entries are left unused.
struct NormalizationStats {
  std::array<double, kNumProsodicFeatures> mean{};
  std::array<double, kNumProsodicFeatures> stdev{};
  std::array<int, kNumProsodicFeatures> count{};
};

NormalizationStats ComputeNormalizationStats(
    std::span<const ProsodicFeatureVector> vectors);

/// z-scores the pitch and intensity features; temporal features are copied
/// bit-for-bit. A feature with fewer than two observations or zero spread
/// maps to 0.
ProsodicFeatureVector ApplyNormalization(const ProsodicFeatureVector &vector,
                                         const NormalizationStats &stats);

/// All vectors must belong to one speaker and share a scope.
std::vector<ProsodicFeatureVector> ZscoreNormalize(
    std::span<const ProsodicFeatureVector> vectors);

// ---------------------------------------------------------------------------
// CSV: utterance_id,scope,normalized,<20 feature ids>; missing values are NA.

struct FeatureRow {
  std::string utterance_id;
  ProsodicFeatureVector features;
};

void WriteFeatureCsv(std::ostream &out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> ReadFeatureCsv(std::istream &in);

/// Shortest round-trip text for a double.
std::string FormatDouble(double value);

}  // namespace certainty

#endif  // CERTAINTY_PROSODY_H_
