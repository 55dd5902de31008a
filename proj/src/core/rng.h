// core/rng.h

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

#ifndef MPSS_CORE_RNG_H_
#define MPSS_CORE_RNG_H_

#include <cstdint>
#include <initializer_list>

namespace mpss {
namespace core {

/// Counter-friendly deterministic generator (splitmix64). Streams are derived
/// by hashing a key path, so rng(seed, {step, sample}) is a stable, independent
/// stream regardless of evaluation order. All draws are platform-independent;
/// std::random distributions are deliberately avoided.
class Rng {
 public:
  explicit Rng(uint64_t key) : state_(key) {}

  /// Derive a stream from a seed and a path of stream ids.
  static Rng Keyed(uint64_t seed, std::initializer_list<uint64_t> path);

  uint64_t NextU64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double NextDouble();

  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi);

  /// Uniform integer in [0, n). Rejection-sampled, no modulo bias.
  uint64_t UniformInt(uint64_t n);

  /// Standard normal via Box-Muller (two uniforms per draw).
  double Normal();

 private:
  uint64_t state_;
};

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_RNG_H_
