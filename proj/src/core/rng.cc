// core/rng.cc

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

#include "core/rng.h"

#include <cmath>

namespace mpss {
namespace core {

namespace {

inline uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::Keyed(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t key = Mix64(seed + 0x9E3779B97F4A7C15ULL);
  for (uint64_t p : path) {
    key = Mix64(key ^ (p + 0x9E3779B97F4A7C15ULL));
  }
  return Rng(key);
}

uint64_t Rng::NextU64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return Mix64(state_);
}

double Rng::NextDouble() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) {
  return lo + (hi - lo) * NextDouble();
}

uint64_t Rng::UniformInt(uint64_t n) {
  if (n == 0) return 0;
  const uint64_t limit = ~0ULL - (~0ULL % n);
  uint64_t r;
  do {
    r = NextU64();
  } while (r >= limit);
  return r % n;
}

double Rng::Normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - NextDouble();
  double u2 = NextDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace core
}  // namespace mpss
