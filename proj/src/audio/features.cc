// audio/features.cc

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

#include "audio/features.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/tensor.h"

namespace mpss {
namespace audio {

using core::Error;

int64_t FrameCount(int64_t n_samples, int64_t window, int64_t hop) {
  if (window <= 0 || hop <= 0) throw Error("frame_count: window and hop must be positive");
  if (n_samples < window) return 0;
  return (n_samples - window) / hop + 1;
}

double Energy(const double* samples, int64_t n) {
  if (n <= 0) throw Error("energy: empty segment");
  double acc = 0;
  for (int64_t i = 0; i < n; ++i) acc += samples[i] * samples[i];
  return acc / static_cast<double>(n);
}

double Energy(const Waveform& wav) {
  return Energy(wav.samples.data(), wav.size());
}

void Fft(std::vector<double>* re, std::vector<double>* im, bool inverse) {
  const size_t n = re->size();
  if (n != im->size() || n == 0 || (n & (n - 1)) != 0) {
    throw Error("fft: length must be a power of two");
  }
  auto& x = *re;
  auto& y = *im;
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(x[i], x[j]);
      std::swap(y[i], y[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (size_t j = 0; j < len / 2; ++j) {
        const size_t a = i + j, b = i + j + len / 2;
        const double tr = x[b] * cr - y[b] * ci;
        const double ti = x[b] * ci + y[b] * cr;
        x[b] = x[a] - tr;
        y[b] = y[a] - ti;
        x[a] += tr;
        y[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
  if (inverse) {
    for (size_t i = 0; i < n; ++i) {
      x[i] /= static_cast<double>(n);
      y[i] /= static_cast<double>(n);
    }
  }
}

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters over FFT bins, low edge 0 Hz, high edge Nyquist.
std::vector<std::vector<double>> MelFilterBank(int n_mel, int fft_size,
                                               int sample_rate) {
  const int n_bins = fft_size / 2 + 1;
  const double mel_lo = HzToMel(0.0);
  const double mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mel + 2);
  for (int i = 0; i < n_mel + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (n_mel + 1);
    edges[i] = MelToHz(mel) * fft_size / sample_rate;  // fractional bin
  }
  std::vector<std::vector<double>> bank(n_mel, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < n_mel; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int b = 0; b < n_bins; ++b) {
      if (b > lo && b < mid) {
        bank[m][b] = (b - lo) / (mid - lo);
      } else if (b >= mid && b < hi) {
        bank[m][b] = (hi - b) / (hi - mid);
      }
    }
  }
  return bank;
}

}  // namespace

FeatureMatrix Mfcc(const Waveform& wav, const MfccConfig& cfg) {
  if (cfg.window < cfg.hop) throw Error("mfcc: window must cover at least one hop");
  if (cfg.n_coef > cfg.n_mel) throw Error("mfcc: n_coef cannot exceed n_mel");
  if (cfg.fft_size < cfg.window) throw Error("mfcc: fft_size smaller than window");
  const int64_t t_count = FrameCount(wav.size(), cfg.window, cfg.hop);
  if (t_count == 0) {
    throw Error("mfcc: signal shorter than one analysis window (" +
                std::to_string(wav.size()) + " < " +
                std::to_string(cfg.window) + " samples)");
  }

  std::vector<double> hann(cfg.window);
  for (int64_t i = 0; i < cfg.window; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (cfg.window - 1));
  }
  const auto bank = MelFilterBank(cfg.n_mel, cfg.fft_size, wav.sample_rate);
  const int n_bins = cfg.fft_size / 2 + 1;

  // Orthonormal DCT-II rows (n_coef x n_mel).
  std::vector<double> dct(static_cast<size_t>(cfg.n_coef) * cfg.n_mel);
  for (int k = 0; k < cfg.n_coef; ++k) {
    const double norm = (k == 0) ? std::sqrt(1.0 / cfg.n_mel)
                                 : std::sqrt(2.0 / cfg.n_mel);
    for (int m = 0; m < cfg.n_mel; ++m) {
      dct[k * cfg.n_mel + m] =
          norm * std::cos(M_PI * k * (2.0 * m + 1.0) / (2.0 * cfg.n_mel));
    }
  }

  FeatureMatrix out;
  out.frames = t_count;
  out.dim = cfg.n_coef;
  out.window = cfg.window;
  out.hop = cfg.hop;
  out.data.resize(static_cast<size_t>(t_count) * cfg.n_coef);

  std::vector<double> re(cfg.fft_size), im(cfg.fft_size);
  std::vector<double> mel_energy(cfg.n_mel);
  for (int64_t t = 0; t < t_count; ++t) {
    const double* frame = &wav.samples[t * cfg.hop];
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    // Per-frame pre-emphasis; the first sample subtracts itself so a DC
    // signal yields identical frames everywhere.
    for (int64_t i = 0; i < cfg.window; ++i) {
      const double prev = (i == 0) ? frame[0] : frame[i - 1];
      re[i] = (frame[i] - cfg.preemphasis * prev) * hann[i];
    }
    Fft(&re, &im, false);
    for (int m = 0; m < cfg.n_mel; ++m) {
      double acc = 0;
      const auto& filt = bank[m];
      for (int b = 0; b < n_bins; ++b) {
        if (filt[b] == 0.0) continue;
        const double mag = std::hypot(re[b], im[b]);
        acc += filt[b] * mag;
      }
      mel_energy[m] = std::log(std::max(acc, 1e-10));
    }
    for (int k = 0; k < cfg.n_coef; ++k) {
      double acc = 0;
      for (int m = 0; m < cfg.n_mel; ++m)
        acc += dct[k * cfg.n_mel + m] * mel_energy[m];
      out.data[t * cfg.n_coef + k] = acc;
    }
  }
  return out;
}

void SaveMatrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("matrix: cannot open '" + path + "' for writing");
  const uint32_t t = static_cast<uint32_t>(m.frames);
  const uint32_t d = static_cast<uint32_t>(m.dim);
  os.write(reinterpret_cast<const char*>(&t), 4);
  os.write(reinterpret_cast<const char*>(&d), 4);
  os.write(reinterpret_cast<const char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!os) throw Error("matrix: write failed for '" + path + "'");
}

FeatureMatrix LoadMatrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("matrix: cannot open '" + path + "'");
  uint32_t t = 0, d = 0;
  is.read(reinterpret_cast<char*>(&t), 4);
  is.read(reinterpret_cast<char*>(&d), 4);
  if (!is) throw Error("matrix: truncated header in '" + path + "'");
  FeatureMatrix m;
  m.frames = t;
  m.dim = d;
  m.data.resize(static_cast<size_t>(t) * d);
  is.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!is) throw Error("matrix: truncated data in '" + path + "'");
  return m;
}

}  // namespace audio
}  // namespace mpss
