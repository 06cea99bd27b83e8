// certainty/tools/feature_cache.cc

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

#include "feature_cache.h"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "certainty/audio.h"
#include "certainty/error.h"

namespace certainty {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string Sha256Hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::kIo, "sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string Sha256Hex(const std::string &text) {
  return Sha256Hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

namespace {

json ContourJson(const Contour &c, const std::vector<Interval> &silences) {
  json frames = json::array();
  for (const auto &f : c.frames) frames.push_back({f.time, f.f0 ? json(*f.f0) : json(nullptr), f.rms});
  json sil = json::array();
  for (const auto &s : silences) sil.push_back({s.start, s.end});
  return {{"version", 1},          {"duration", c.duration}, {"frame_length", c.frame_length},
          {"hop", c.hop},          {"frames", frames},       {"silences", sil}};
}

std::pair<Contour, std::vector<Interval>> ContourFromJson(const json &doc) {
  Contour c;
  c.duration = doc.at("duration");
  c.frame_length = doc.at("frame_length");
  c.hop = doc.at("hop");
  for (const auto &f : doc.at("frames")) {
    Frame fr;
    fr.time = f.at(0);
    if (!f.at(1).is_null()) fr.f0 = f.at(1).get<double>();
    fr.rms = f.at(2);
    c.frames.push_back(fr);
  }
  std::vector<Interval> sil;
  for (const auto &s : doc.at("silences")) sil.push_back({s.at(0), s.at(1)});
  return {std::move(c), std::move(sil)};
}

}  // namespace

std::pair<Contour, std::vector<Interval>> FeatureCache::Track(const Utterance &u,
                                                              const TrackerConfig &tracker) const {
  try {
    const auto bytes = ReadFileBytes(u.audio_path.string());
    fs::path entry;
    if (dir_) {
      entry = *dir_ / (Sha256Hex(bytes) + "-" + Sha256Hex(ToJson(tracker).dump()).substr(0, 16) + ".json");
      std::ifstream in(entry);
      if (in) {
        try {
          return ContourFromJson(json::parse(in));
        } catch (const json::exception &) {
          // Unreadable entry; recompute and overwrite.
        }
      }
    }
    AudioClip clip = DecodeWav(bytes);
    Contour contour = ExtractContour(clip, tracker);
    std::vector<Interval> silences = DetectSilence(contour, tracker);
    if (dir_) {
      fs::create_directories(*dir_);
      std::ostringstream tid;
      tid << std::this_thread::get_id();
      const fs::path tmp = entry.string() + ".tmp" + tid.str();
      {
        std::ofstream out(tmp);
        out << ContourJson(contour, silences).dump();
        if (!out) throw Error(ErrorKind::kIo, "cannot write cache entry " + tmp.string());
      }
      fs::rename(tmp, entry);
    }
    return {std::move(contour), std::move(silences)};
  } catch (const Error &e) {
    throw Error(e.kind(), u.utterance_id + ": " + e.what());
  }
}

Dataset BuildDatasetCached(const Corpus &corpus, const Lexicon &lexicon,
                           const ExtractionOptions &options, const FeatureCache &cache) {
  options.tracker.Validate();
  std::vector<UtteranceAnalysis> analyses(corpus.utterances.size());
  ParallelFor(analyses.size(), options.threads, [&](std::size_t i) {
    const Utterance &u = corpus.utterances[i];
    auto [contour, silences] = cache.Track(u, options.tracker);
    analyses[i] = AnalyzeContour(u, lexicon, contour, silences);
  });
  return AssembleDataset(corpus, lexicon, std::move(analyses));
}

}  // namespace certainty
