// core/checkpoint.cc

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

#include "core/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace mpss {
namespace core {

namespace {

constexpr char kMagic[8] = {'M', 'P', 'S', 'S', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void WritePod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::ifstream& is, const std::string& what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("checkpoint: truncated while reading " + what);
  return v;
}

void WriteDoubles(std::ofstream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void ReadDoubles(std::ifstream& is, std::vector<double>* v, size_t n,
                 const std::string& what) {
  v->resize(n);
  is.read(reinterpret_cast<char*>(v->data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error("checkpoint: truncated while reading " + what);
}

}  // namespace

void SaveCheckpoint(const std::string& path, const ParamStore& store,
                    const std::string& config_blob) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  WritePod<uint32_t>(os, kVersion);
  WritePod<uint32_t>(os, 0);  // flags
  WritePod<uint64_t>(os, static_cast<uint64_t>(store.step_count_));
  WritePod<uint64_t>(os, config_blob.size());
  os.write(config_blob.data(),
           static_cast<std::streamsize>(config_blob.size()));
  WritePod<uint64_t>(os, store.params_.size());
  for (const auto& [name, t] : store.params_) {
    WritePod<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    WritePod<uint32_t>(os, static_cast<uint32_t>(t.shape().size()));
    for (int64_t d : t.shape()) WritePod<int64_t>(os, d);
    WriteDoubles(os, t.values());
    const auto& mo = store.moments_.at(name);
    WriteDoubles(os, mo.m);
    WriteDoubles(os, mo.v);
  }
  if (!os) throw Error("checkpoint: write failed for '" + path + "'");
}

void LoadCheckpoint(const std::string& path, ParamStore* store,
                    std::string* config_blob) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("checkpoint: bad magic in '" + path + "'");
  }
  const uint32_t version = ReadPod<uint32_t>(is, "version");
  if (version != kVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  ReadPod<uint32_t>(is, "flags");
  const uint64_t step = ReadPod<uint64_t>(is, "step");
  const uint64_t cfg_len = ReadPod<uint64_t>(is, "config length");
  std::string cfg(cfg_len, '\0');
  is.read(cfg.data(), static_cast<std::streamsize>(cfg_len));
  if (!is) throw Error("checkpoint: truncated config block");
  if (config_blob) *config_blob = cfg;

  const uint64_t n_params = ReadPod<uint64_t>(is, "parameter count");
  if (!store->params_.empty()) {
    throw Error("checkpoint: load target must be an empty ParamStore");
  }
  for (uint64_t pi = 0; pi < n_params; ++pi) {
    const uint32_t name_len = ReadPod<uint32_t>(is, "name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw Error("checkpoint: truncated parameter name");
    const uint32_t ndim = ReadPod<uint32_t>(is, "ndim");
    std::vector<int64_t> shape(ndim);
    for (uint32_t d = 0; d < ndim; ++d)
      shape[d] = ReadPod<int64_t>(is, "dimension");
    const size_t numel = static_cast<size_t>(ShapeNumel(shape));
    std::vector<double> values, m, v;
    ReadDoubles(is, &values, numel, "values of " + name);
    ReadDoubles(is, &m, numel, "moment m of " + name);
    ReadDoubles(is, &v, numel, "moment v of " + name);
    store->Create(name, shape, std::move(values));
    auto& mo = store->moments_[name];
    mo.m = std::move(m);
    mo.v = std::move(v);
  }
  store->step_count_ = static_cast<int64_t>(step);
}

}  // namespace core
}  // namespace mpss
