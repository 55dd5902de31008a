// audio/wav.h

// Copyright 2026  MPSS Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPSS_AUDIO_WAV_H_
#define MPSS_AUDIO_WAV_H_

#include <string>
#include <vector>

namespace mpss {
namespace audio {

/// Mono waveform, samples in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a RIFF PCM16 mono WAV file. Rejects non-mono channels, unsupported
/// encodings and truncated files.
Waveform LoadWav(const std::string& path);

/// Writes PCM16 mono. Samples are clamped to [-1, 1] and quantized, so a
/// save/load round trip differs from the source by at most 1/32768.
void SaveWav(const std::string& path, const Waveform& wav);

}  // namespace audio
}  // namespace mpss

#endif  // MPSS_AUDIO_WAV_H_
