// Copyright 2026 The Meshfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Every random draw in the framework goes through these helpers so that
// results depend only on the engine's raw output, never on a standard
// library's distribution implementation.

#ifndef MESHFUZZ_RNG_H_
#define MESHFUZZ_RNG_H_

#include <cstdint>
#include <random>

namespace meshfuzz {

using Rng = std::mt19937_64;

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for sub-task `index` of a run seeded with `seed`.
inline Rng DeriveRng(uint64_t seed, uint64_t index) {
  return Rng(SplitMix64(seed ^ SplitMix64(index + 1)));
}

// Uniform in [0, n), unbiased. n must be > 0.
inline uint64_t UniformBelow(Rng &rng, uint64_t n) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform in [lo, hi].
inline uint64_t UniformIn(Rng &rng, uint64_t lo, uint64_t hi) {
  return lo + UniformBelow(rng, hi - lo + 1);
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double UniformUnit(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace meshfuzz

#endif  // MESHFUZZ_RNG_H_
