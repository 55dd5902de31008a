// audio/wav.cc

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

#include "audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "core/tensor.h"

namespace mpss {
namespace audio {

using core::Error;

namespace {

template <typename T>
T ReadPod(std::ifstream& is, const std::string& what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("wav: truncated file while reading " + what);
  return v;
}

template <typename T>
void WritePod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform LoadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("wav: cannot open '" + path + "'");

  char riff[4], wave[4];
  is.read(riff, 4);
  if (!is || std::memcmp(riff, "RIFF", 4) != 0)
    throw Error("wav: '" + path + "' is not a RIFF file");
  ReadPod<uint32_t>(is, "riff size");
  is.read(wave, 4);
  if (!is || std::memcmp(wave, "WAVE", 4) != 0)
    throw Error("wav: '" + path + "' is not a WAVE file");

  // Walk chunks; require one fmt before data, ignore everything else.
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t sample_rate = 0;
  Waveform out;
  while (true) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    const uint32_t size = ReadPod<uint32_t>(is, "chunk size");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw Error("wav: malformed fmt chunk");
      format = ReadPod<uint16_t>(is, "format tag");
      channels = ReadPod<uint16_t>(is, "channel count");
      sample_rate = ReadPod<uint32_t>(is, "sample rate");
      ReadPod<uint32_t>(is, "byte rate");
      ReadPod<uint16_t>(is, "block align");
      bits = ReadPod<uint16_t>(is, "bits per sample");
      if (size > 16) is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw Error("wav: data chunk before fmt chunk");
      if (format != 1) throw Error("wav: unsupported encoding (PCM only)");
      if (bits != 16) throw Error("wav: unsupported sample width (16-bit only)");
      if (channels != 1) throw Error("wav: non-mono file rejected");
      if (size % 2 != 0) throw Error("wav: odd data chunk size");
      const size_t n = size / 2;
      std::vector<int16_t> raw(n);
      is.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(size));
      if (!is) throw Error("wav: truncated data chunk in '" + path + "'");
      out.samples.resize(n);
      for (size_t i = 0; i < n; ++i) out.samples[i] = raw[i] / 32768.0;
      out.sample_rate = static_cast<int>(sample_rate);
      if (out.samples.empty()) throw Error("wav: empty data chunk");
      return out;
    } else {
      // Skip unknown chunk (word aligned).
      is.seekg(size + (size & 1), std::ios::cur);
      if (!is) throw Error("wav: truncated chunk in '" + path + "'");
    }
  }
  throw Error("wav: no data chunk found in '" + path + "'");
}

void SaveWav(const std::string& path, const Waveform& wav) {
  if (wav.samples.empty()) throw Error("wav: refusing to write empty waveform");
  if (wav.sample_rate <= 0) throw Error("wav: invalid sample rate");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("wav: cannot open '" + path + "' for writing");

  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  os.write("RIFF", 4);
  WritePod<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  WritePod<uint32_t>(os, 16);
  WritePod<uint16_t>(os, 1);  // PCM
  WritePod<uint16_t>(os, 1);  // mono
  WritePod<uint32_t>(os, static_cast<uint32_t>(wav.sample_rate));
  WritePod<uint32_t>(os, static_cast<uint32_t>(wav.sample_rate * 2));
  WritePod<uint16_t>(os, 2);
  WritePod<uint16_t>(os, 16);
  os.write("data", 4);
  WritePod<uint32_t>(os, data_bytes);
  for (double s : wav.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    double q = std::floor(clamped * 32768.0 + 0.5);
    q = std::clamp(q, -32768.0, 32767.0);
    WritePod<int16_t>(os, static_cast<int16_t>(q));
  }
  if (!os) throw Error("wav: write failed for '" + path + "'");
}

}  // namespace audio
}  // namespace mpss
