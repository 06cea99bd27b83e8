// certainty/src/audio.cc

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

#include "certainty/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "certainty/error.h"

namespace certainty {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t ReadU32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool TagIs(std::span<const std::uint8_t> b, std::size_t at, const char *tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void PutU16(std::vector<std::uint8_t> *out, std::uint16_t v) {
  out->push_back(static_cast<std::uint8_t>(v & 0xff));
  out->push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t> *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out->push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void PutTag(std::vector<std::uint8_t> *out, const char *tag) {
  out->insert(out->end(), tag, tag + 4);
}

Error Malformed(const std::string &what) {
  return Error(ErrorKind::kMalformedContainer, "malformed WAV: " + what);
}

}  // namespace

AudioClip::AudioClip(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0)
    throw Error(ErrorKind::kInvalidParameters, "sample rate must be positive");
  for (double s : samples_) {
    if (!(s >= -1.0 && s <= 1.0))
      throw Error(ErrorKind::kInvalidParameters,
                  "sample outside [-1, 1]: " + std::to_string(s));
  }
}

AudioClip DecodeWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw Malformed("header truncated");
  if (!TagIs(bytes, 0, "RIFF") || !TagIs(bytes, 8, "WAVE"))
    throw Malformed("missing RIFF/WAVE tags");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t chunk_size = ReadU32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (chunk_size > bytes.size() - body) {
      throw Malformed("chunk extends past end of data");
    }
    if (TagIs(bytes, pos, "fmt ")) {
      if (chunk_size < 16) throw Malformed("fmt chunk too small");
      format = ReadU16(bytes, body);
      channels = ReadU16(bytes, body + 2);
      rate = ReadU32(bytes, body + 4);
      block_align = ReadU16(bytes, body + 12);
      bits = ReadU16(bytes, body + 14);
      if (format == kFormatExtensible && chunk_size >= 26) {
        // The first two bytes of the sub-format GUID carry the real tag.
        format = ReadU16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (TagIs(bytes, pos, "data")) {
      data = bytes.subspan(body, chunk_size);
      have_data = true;
      break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  if (!have_fmt) throw Malformed("no fmt chunk");
  if (!have_data) throw Malformed("no data chunk");

  if (format != kFormatPcm || bits != 16) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                "only 16-bit PCM is supported (format " +
                    std::to_string(format) + ", " + std::to_string(bits) +
                    " bits)");
  }
  if (channels != 1 && channels != 2) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                "only mono or stereo is supported (" +
                    std::to_string(channels) + " channels)");
  }
  if (block_align != channels * 2) throw Malformed("inconsistent block align");
  if (rate < static_cast<std::uint32_t>(kMinSampleRate)) {
    throw Error(ErrorKind::kUnsupportedRate,
                "sample rate " + std::to_string(rate) + " Hz below " +
                    std::to_string(kMinSampleRate) + " Hz");
  }
  if (rate > 1'000'000) throw Malformed("implausible sample rate");
  if (data.size() % block_align != 0) throw Malformed("data truncated mid-frame");

  const std::size_t frames = data.size() / block_align;
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    std::size_t at = i * block_align;
    if (channels == 1) {
      samples[i] = static_cast<std::int16_t>(ReadU16(data, at)) / 32768.0;
    } else {
      double l = static_cast<std::int16_t>(ReadU16(data, at)) / 32768.0;
      double r = static_cast<std::int16_t>(ReadU16(data, at + 2)) / 32768.0;
      samples[i] = 0.5 * (l + r);
    }
  }
  return AudioClip(std::move(samples), static_cast<int>(rate));
}

std::vector<std::uint8_t> EncodeWav(const AudioClip &clip) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_bytes);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(clip.sample_rate()));
  PutU32(&out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  PutTag(&out, "data");
  PutU32(&out, data_bytes);
  for (double s : clip.samples()) {
    double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    PutU16(&out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

AudioClip ReadWavFile(const std::string &path) {
  auto bytes = ReadFileBytes(path);
  return DecodeWav(bytes);
}

void WriteWavFile(const std::string &path, const AudioClip &clip) {
  auto bytes = EncodeWav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

AudioClip SynthesizeTone(double freq, double amplitude, double duration,
                         int sample_rate) {
  if (sample_rate <= 0 || !(freq > 0.0) || !(freq < sample_rate / 2.0)) {
    throw Error(ErrorKind::kInvalidParameters,
                "tone frequency must lie in (0, rate/2)");
  }
  if (!(amplitude > 0.0 && amplitude <= 1.0))
    throw Error(ErrorKind::kInvalidParameters, "amplitude must lie in (0, 1]");
  if (!(duration > 0.0))
    throw Error(ErrorKind::kInvalidParameters, "duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  std::vector<double> samples(n);
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  for (std::size_t i = 0; i < n; ++i)
    samples[i] = amplitude * std::sin(w * static_cast<double>(i));
  return AudioClip(std::move(samples), sample_rate);
}

AudioClip Concatenate(std::span<const AudioClip> clips) {
  if (clips.empty())
    throw Error(ErrorKind::kInvalidParameters, "nothing to concatenate");
  std::vector<double> all;
  const int rate = clips.front().sample_rate();
  for (const auto &c : clips) {
    if (c.sample_rate() != rate)
      throw Error(ErrorKind::kInvalidParameters, "sample rates differ");
    all.insert(all.end(), c.samples().begin(), c.samples().end());
  }
  return AudioClip(std::move(all), rate);
}

AudioClip Silence(double duration, int sample_rate) {
  if (!(duration >= 0.0))
    throw Error(ErrorKind::kInvalidParameters, "negative duration");
  return AudioClip(
      std::vector<double>(
          static_cast<std::size_t>(std::llround(duration * sample_rate)), 0.0),
      sample_rate);
}

}  // namespace certainty
