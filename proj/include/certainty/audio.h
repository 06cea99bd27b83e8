// certainty/audio.h

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

#ifndef CERTAINTY_AUDIO_H_
#define CERTAINTY_AUDIO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace certainty {

constexpr int kMinSampleRate = 8000;

/// Mono PCM samples in [-1, 1] at a fixed rate. Immutable once built.
class AudioClip {
 public:
  /// Throws InvalidParameters if the rate is not positive or a sample lies
  /// outside [-1, 1].
  AudioClip(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

/// Decodes a RIFF/WAVE container holding 16-bit PCM, mono or stereo.
/// Stereo is downmixed by averaging the two channels; samples are scaled by
/// 1/32768.
AudioClip DecodeWav(std::span<const std::uint8_t> bytes);

/// Writes a canonical 44-byte-header mono PCM16 WAV. Samples are rounded to
/// the nearest step and clipped to the int16 range.
std::vector<std::uint8_t> EncodeWav(const AudioClip &clip);

AudioClip ReadWavFile(const std::string &path);
void WriteWavFile(const std::string &path, const AudioClip &clip);

std::vector<std::uint8_t> ReadFileBytes(const std::string &path);

/// Pure sine a*sin(2*pi*f*t). Requires 0 < freq < rate/2, 0 < amplitude <= 1,
/// duration > 0.
AudioClip SynthesizeTone(double freq, double amplitude, double duration,
                         int sample_rate);

/// Concatenates clips that share a sample rate.
AudioClip Concatenate(std::span<const AudioClip> clips);

/// Clip of zeros.
AudioClip Silence(double duration, int sample_rate);

}  // namespace certainty

#endif  // CERTAINTY_AUDIO_H_
