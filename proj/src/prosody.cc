// certainty/src/prosody.cc

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

#include "certainty/prosody.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "certainty/error.h"

namespace certainty {

namespace {

// A later (longer-lag) autocorrelation peak only wins over an earlier one if
// it is higher by more than this factor; suppresses sub-octave picks.
constexpr double kOctaveRatio = 0.9;

constexpr std::array<std::string_view, kNumProsodicFeatures> kFeatureNames = {
    "f0_min",          "f0_max",         "f0_mean",
    "f0_stdev",        "f0_range",       "f0_relpos_min",
    "f0_relpos_max",   "f0_abs_slope_hz", "f0_abs_slope_semi",
    "rms_min",         "rms_max",        "rms_mean",
    "rms_stdev",       "rms_relpos_min", "rms_relpos_max",
    "silence_total",   "silence_percent", "duration_total",
    "duration_speaking", "speaking_rate",
};

struct Summary {
  double min = 0, max = 0, mean = 0, stdev = 0;
  double time_of_min = 0, time_of_max = 0;
};

// values/times are parallel and nonempty.
Summary Summarize(const std::vector<double> &values,
                  const std::vector<double> &times) {
  Summary s;
  std::size_t imin = 0, imax = 0;
  double sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < values[imin]) imin = i;
    if (values[i] > values[imax]) imax = i;
    sum += values[i];
  }
  s.min = values[imin];
  s.max = values[imax];
  s.time_of_min = times[imin];
  s.time_of_max = times[imax];
  s.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / (values.size() - 1));
  }
  return s;
}

double OlsSlope(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

double Overlap(const Interval &a, const Interval &b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

// Normalized cross-correlation of a frame with itself at each lag in
// [lo, hi]; out[k] holds lag lo + k.
void Nccf(const std::vector<double> &x, int lo, int hi,
          std::vector<double> *out) {
  const int n = static_cast<int>(x.size());
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  out->assign(hi - lo + 1, 0.0);
  for (int lag = lo; lag <= hi; ++lag) {
    double num = 0;
    const int m = n - lag;
    for (int i = 0; i < m; ++i) num += x[i] * x[i + lag];
    double e0 = prefix[m];
    double e1 = prefix[n] - prefix[lag];
    double den = std::sqrt(e0 * e1);
    (*out)[lag - lo] = den > 0 ? num / den : 0.0;
  }
}

}  // namespace

void TrackerConfig::Validate() const {
  if (!(hop > 0.0) || !(frame_length > hop))
    throw Error(ErrorKind::kInvalidParameters,
                "tracker config requires frame_length > hop > 0");
  if (!(f0_floor > 0.0) || !(f0_floor < f0_ceil))
    throw Error(ErrorKind::kInvalidParameters,
                "tracker config requires 0 < f0_floor < f0_ceil");
  if (!(min_silence_run >= 0.0))
    throw Error(ErrorKind::kInvalidParameters, "negative min_silence_run");
}

Contour ExtractContour(const AudioClip &clip, const TrackerConfig &config) {
  config.Validate();
  const int rate = clip.sample_rate();
  const int window = static_cast<int>(std::lround(config.frame_length * rate));
  const int step = static_cast<int>(std::lround(config.hop * rate));
  if (static_cast<int>(clip.size()) < window || window < 4 || step < 1) {
    throw Error(ErrorKind::kClipTooShort,
                "clip of " + std::to_string(clip.duration()) +
                    " s is shorter than one analysis frame");
  }
  int lag_lo = std::max(2, static_cast<int>(std::floor(rate / config.f0_ceil)));
  int lag_hi = std::min(window - 2,
                        static_cast<int>(std::ceil(rate / config.f0_floor)));
  if (lag_lo >= lag_hi) {
    throw Error(ErrorKind::kInvalidParameters,
                "frame too short for the configured f0 range");
  }

  Contour contour;
  contour.duration = clip.duration();
  contour.frame_length = static_cast<double>(window) / rate;
  contour.hop = static_cast<double>(step) / rate;

  const auto samples = clip.samples();
  const std::size_t num_frames = (clip.size() - window) / step + 1;
  contour.frames.reserve(num_frames);
  std::vector<double> buf(window), r;
  for (std::size_t f = 0; f < num_frames; ++f) {
    const std::size_t begin = f * step;
    Frame frame;
    frame.time = (static_cast<double>(begin) + window / 2.0) / rate;
    double sq = 0, mean = 0;
    for (int i = 0; i < window; ++i) {
      double s = samples[begin + i];
      sq += s * s;
      mean += s;
    }
    frame.rms = std::sqrt(sq / window);
    mean /= window;
    for (int i = 0; i < window; ++i) buf[i] = samples[begin + i] - mean;

    if (frame.rms > 0) {
      // Lags lag_lo-1 .. lag_hi+1 so that both ends can be local maxima.
      Nccf(buf, lag_lo - 1, lag_hi + 1, &r);
      double best = -1.0;
      for (int lag = lag_lo; lag <= lag_hi; ++lag)
        best = std::max(best, r[lag - lag_lo + 1]);
      int chosen = -1;
      for (int lag = lag_lo; lag <= lag_hi; ++lag) {
        const double v = r[lag - lag_lo + 1];
        const bool peak = v >= r[lag - lag_lo] && v > r[lag - lag_lo + 2];
        if (peak && v >= kOctaveRatio * best) {
          chosen = lag;
          break;
        }
      }
      if (chosen > 0 && r[chosen - lag_lo + 1] >= config.voicing_threshold) {
        const double a = r[chosen - lag_lo];
        const double b = r[chosen - lag_lo + 1];
        const double c = r[chosen - lag_lo + 2];
        const double denom = a - 2 * b + c;
        double delta = denom != 0 ? 0.5 * (a - c) / denom : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        double f0 = rate / (chosen + delta);
        frame.f0 = std::clamp(f0, config.f0_floor, config.f0_ceil);
      }
    }
    contour.frames.push_back(frame);
  }
  return contour;
}

std::vector<Interval> DetectSilence(const Contour &contour,
                                    const TrackerConfig &config) {
  std::vector<Interval> result;
  const auto &frames = contour.frames;
  if (frames.empty()) return result;

  double peak = 0;
  for (const auto &f : frames) peak = std::max(peak, f.rms);
  const double threshold = peak * std::pow(10.0, config.silence_db_threshold / 20.0);
  auto silent = [&](const Frame &f) { return f.rms == 0.0 || f.rms < threshold; };

  const double half = contour.frame_length / 2;
  std::vector<Interval> runs;
  std::size_t i = 0;
  while (i < frames.size()) {
    if (!silent(frames[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < frames.size() && silent(frames[j + 1])) ++j;
    Interval run{frames[i].time - half, frames[j].time + half};
    if (i == 0) run.start = 0.0;
    if (j + 1 == frames.size()) run.end = contour.duration;
    run.start = std::max(0.0, run.start);
    run.end = std::min(contour.duration, run.end);
    if (!runs.empty() && run.start <= runs.back().end) {
      runs.back().end = std::max(runs.back().end, run.end);
    } else {
      runs.push_back(run);
    }
    i = j + 1;
  }
  for (const auto &run : runs) {
    if (run.length() >= config.min_silence_run - 1e-9) result.push_back(run);
  }
  return result;
}

FeatureGroup GroupOf(FeatureId id) {
  int i = static_cast<int>(id);
  if (i <= static_cast<int>(FeatureId::kF0AbsSlopeSemi)) return FeatureGroup::kPitch;
  if (i <= static_cast<int>(FeatureId::kRmsRelposMax)) return FeatureGroup::kIntensity;
  return FeatureGroup::kTemporal;
}

std::string_view FeatureName(FeatureId id) {
  return kFeatureNames[static_cast<int>(id)];
}

std::optional<FeatureId> ParseFeatureId(std::string_view name) {
  for (int i = 0; i < kNumProsodicFeatures; ++i)
    if (kFeatureNames[i] == name) return FeatureAt(i);
  return std::nullopt;
}

std::string_view ScopeName(Scope scope) {
  switch (scope) {
    case Scope::kUtterance: return "utterance";
    case Scope::kContext: return "context";
    case Scope::kTarget: return "target";
  }
  return "";
}

std::optional<Scope> ParseScope(std::string_view name) {
  for (Scope s : {Scope::kUtterance, Scope::kContext, Scope::kTarget})
    if (ScopeName(s) == name) return s;
  return std::nullopt;
}

bool ProsodicFeatureVector::complete() const {
  return std::all_of(values.begin(), values.end(),
                     [](const auto &v) { return v.has_value(); });
}

ProsodicFeatureVector AggregateFeatures(const Contour &contour,
                                        std::span<const Interval> pieces,
                                        std::span<const Interval> silences,
                                        int syllable_count, Scope scope) {
  if (pieces.empty())
    throw Error(ErrorKind::kDegenerateInterval, "no interval to aggregate over");
  std::vector<Interval> sorted(pieces.begin(), pieces.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval &a, const Interval &b) { return a.start < b.start; });
  constexpr double kEdgeSlack = 1e-9;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto &p = sorted[k];
    if (!(p.end > p.start))
      throw Error(ErrorKind::kDegenerateInterval,
                  "interval end must exceed start (" + FormatDouble(p.start) +
                      ", " + FormatDouble(p.end) + ")");
    if (p.start < -kEdgeSlack || p.end > contour.duration + kEdgeSlack)
      throw Error(ErrorKind::kDegenerateInterval, "interval outside clip");
    if (k > 0 && p.start < sorted[k - 1].end - kEdgeSlack)
      throw Error(ErrorKind::kDegenerateInterval, "intervals overlap");
  }
  const double hull_start = sorted.front().start;
  const double hull_len = sorted.back().end - hull_start;
  auto relpos = [&](double t) {
    return std::clamp((t - hull_start) / hull_len, 0.0, 1.0);
  };

  std::vector<double> f0, f0_times, semi, rms, rms_times;
  for (const auto &frame : contour.frames) {
    bool inside = std::any_of(sorted.begin(), sorted.end(), [&](const Interval &p) {
      return frame.time >= p.start && frame.time < p.end;
    });
    if (!inside) continue;
    rms.push_back(frame.rms);
    rms_times.push_back(frame.time);
    if (frame.voiced()) {
      f0.push_back(*frame.f0);
      f0_times.push_back(frame.time);
      semi.push_back(12.0 * std::log2(*frame.f0 / kSemitoneReferenceHz));
    }
  }

  ProsodicFeatureVector v;
  v.scope = scope;
  if (!f0.empty()) {
    Summary s = Summarize(f0, f0_times);
    v[FeatureId::kF0Min] = s.min;
    v[FeatureId::kF0Max] = s.max;
    v[FeatureId::kF0Mean] = s.mean;
    v[FeatureId::kF0Stdev] = s.stdev;
    v[FeatureId::kF0Range] = s.max - s.min;
    v[FeatureId::kF0RelposMin] = relpos(s.time_of_min);
    v[FeatureId::kF0RelposMax] = relpos(s.time_of_max);
    v[FeatureId::kF0AbsSlopeHz] = std::abs(OlsSlope(f0_times, f0));
    v[FeatureId::kF0AbsSlopeSemi] = std::abs(OlsSlope(f0_times, semi));
  }
  if (!rms.empty()) {
    Summary s = Summarize(rms, rms_times);
    v[FeatureId::kRmsMin] = s.min;
    v[FeatureId::kRmsMax] = s.max;
    v[FeatureId::kRmsMean] = s.mean;
    v[FeatureId::kRmsStdev] = s.stdev;
    v[FeatureId::kRmsRelposMin] = relpos(s.time_of_min);
    v[FeatureId::kRmsRelposMax] = relpos(s.time_of_max);
  }

  double total = 0, silence = 0;
  for (const auto &p : sorted) {
    total += p.length();
    for (const auto &s : silences) silence += Overlap(p, s);
  }
  silence = std::min(silence, total);
  const double speaking = total - silence;
  v[FeatureId::kSilenceTotal] = silence;
  v[FeatureId::kSilencePercent] = silence / total;
  v[FeatureId::kDurationTotal] = total;
  v[FeatureId::kDurationSpeaking] = speaking;
  if (speaking > 0) v[FeatureId::kSpeakingRate] = syllable_count / speaking;
  return v;
}

ProsodicFeatureVector AggregateFeatures(const Contour &contour,
                                        Interval interval,
                                        std::span<const Interval> silences,
                                        int syllable_count, Scope scope) {
  return AggregateFeatures(contour, std::span<const Interval>(&interval, 1),
                           silences, syllable_count, scope);
}

NormalizationStats ComputeNormalizationStats(
    std::span<const ProsodicFeatureVector> vectors) {
  NormalizationStats stats;
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    if (GroupOf(FeatureAt(f)) == FeatureGroup::kTemporal) continue;
    double sum = 0;
    int n = 0;
    for (const auto &v : vectors) {
      if (v.values[f]) {
        sum += *v.values[f];
        ++n;
      }
    }
    stats.count[f] = n;
    if (n == 0) continue;
    stats.mean[f] = sum / n;
    if (n > 1) {
      double ss = 0;
      for (const auto &v : vectors)
        if (v.values[f]) ss += (*v.values[f] - stats.mean[f]) * (*v.values[f] - stats.mean[f]);
      stats.stdev[f] = std::sqrt(ss / (n - 1));
    }
  }
  return stats;
}

ProsodicFeatureVector ApplyNormalization(const ProsodicFeatureVector &vector,
                                         const NormalizationStats &stats) {
  ProsodicFeatureVector out = vector;
  out.normalized = true;
  for (int f = 0; f < kNumProsodicFeatures; ++f) {
    if (GroupOf(FeatureAt(f)) == FeatureGroup::kTemporal) continue;
    if (!vector.values[f]) continue;
    if (stats.count[f] < 2 || stats.stdev[f] == 0.0) {
      out.values[f] = 0.0;
    } else {
      out.values[f] = (*vector.values[f] - stats.mean[f]) / stats.stdev[f];
    }
  }
  return out;
}

std::vector<ProsodicFeatureVector> ZscoreNormalize(
    std::span<const ProsodicFeatureVector> vectors) {
  for (const auto &v : vectors) {
    if (v.scope != vectors.front().scope)
      throw Error(ErrorKind::kInvalidParameters,
                  "cannot normalize vectors of different scopes together");
    if (v.normalized)
      throw Error(ErrorKind::kInvalidParameters, "vector already normalized");
  }
  NormalizationStats stats = ComputeNormalizationStats(vectors);
  std::vector<ProsodicFeatureVector> out;
  out.reserve(vectors.size());
  for (const auto &v : vectors) out.push_back(ApplyNormalization(v, stats));
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void WriteFeatureCsv(std::ostream &out, std::span<const FeatureRow> rows) {
  out << "utterance_id,scope,normalized";
  for (auto name : kFeatureNames) out << ',' << name;
  out << '\n';
  for (const auto &row : rows) {
    out << row.utterance_id << ',' << ScopeName(row.features.scope) << ','
        << (row.features.normalized ? 1 : 0);
    for (const auto &v : row.features.values)
      out << ',' << (v ? FormatDouble(*v) : std::string("NA"));
    out << '\n';
  }
}

std::vector<FeatureRow> ReadFeatureCsv(std::istream &in) {
  std::vector<FeatureRow> rows;
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorKind::kSchemaViolation, "feature CSV: missing header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3 + kNumProsodicFeatures)
      throw Error(ErrorKind::kSchemaViolation,
                  "feature CSV line " + std::to_string(line_no) +
                      ": expected 23 columns");
    FeatureRow row;
    row.utterance_id = cells[0];
    auto scope = ParseScope(cells[1]);
    if (!scope)
      throw Error(ErrorKind::kSchemaViolation,
                  "feature CSV line " + std::to_string(line_no) + ": bad scope");
    row.features.scope = *scope;
    row.features.normalized = cells[2] == "1";
    for (int f = 0; f < kNumProsodicFeatures; ++f) {
      const std::string &c = cells[3 + f];
      if (c == "NA") continue;
      double value = 0;
      auto res = std::from_chars(c.data(), c.data() + c.size(), value);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size())
        throw Error(ErrorKind::kSchemaViolation,
                    "feature CSV line " + std::to_string(line_no) +
                        ": bad number '" + c + "'");
      row.features.values[f] = value;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace certainty
