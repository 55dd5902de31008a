// audio/features.h

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

#ifndef MPSS_AUDIO_FEATURES_H_
#define MPSS_AUDIO_FEATURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "audio/wav.h"

namespace mpss {
namespace audio {

/// T x D feature rows plus the frame geometry they were computed with.
struct FeatureMatrix {
  int64_t frames = 0;  // T
  int64_t dim = 0;     // D
  int64_t window = 0;  // analysis window, samples
  int64_t hop = 0;     // frame step, samples
  std::vector<double> data;  // row-major, frames x dim

  double At(int64_t t, int64_t d) const { return data[t * dim + d]; }
  const double* Row(int64_t t) const { return &data[t * dim]; }
};

/// floor((n_samples - window) / hop) + 1, or 0 when the signal is shorter
/// than one window. Shared by features, labels, masks and mixtures so every
/// stream stays aligned.
int64_t FrameCount(int64_t n_samples, int64_t window, int64_t hop);

/// Mean squared sample value. Used for the mixture energy-ratio scaling, so
/// it is deliberately length-invariant.
double Energy(const double* samples, int64_t n);
double Energy(const Waveform& wav);

struct MfccConfig {
  int n_mel = 26;
  int n_coef = 13;
  int64_t window = 400;  // 25 ms at 16 kHz
  int64_t hop = 320;     // 20 ms at 16 kHz -> 50 frames/s
  double preemphasis = 0.97;
  int fft_size = 512;
};

/// Pre-emphasis, Hann window, magnitude spectrum, mel filter bank, log,
/// DCT-II, first n_coef coefficients. Deterministic; throws if the signal is
/// shorter than one window.
FeatureMatrix Mfcc(const Waveform& wav, const MfccConfig& cfg = MfccConfig());

// Binary matrix file: u32 T, u32 D, then T*D little-endian float64 row-major.
void SaveMatrix(const std::string& path, const FeatureMatrix& m);
FeatureMatrix LoadMatrix(const std::string& path);

/// In-place complex radix-2 FFT (re/im interleaved pairs, n a power of two).
/// Exposed for the noise synthesizer and spectrum tests.
void Fft(std::vector<double>* re, std::vector<double>* im, bool inverse);

}  // namespace audio
}  // namespace mpss

#endif  // MPSS_AUDIO_FEATURES_H_
