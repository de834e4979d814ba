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

#ifndef MESHFUZZ_MUTATION_H_
#define MESHFUZZ_MUTATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "meshfuzz/rng.h"
#include "meshfuzz/value.h"

namespace meshfuzz {

enum class MutationKind { kBitByteFlip, kArithmetic, kInterestingReplace, kHavoc, kSplice };

std::string_view MutationKindName(MutationKind kind);

inline constexpr std::array<uint64_t, 14> kInterestingValues = {
    0, 1, 16, 32, 64, 127, 128, 255, 256, 512, 1024, 32767, 65535, 2147483647};

// Havoc never grows an input past this many bytes (or its own size).
inline constexpr size_t kMaxMutantSize = 4096;

struct MutationOp {
  MutationKind kind = MutationKind::kBitByteFlip;
  // BitByteFlip: bit index (bit 0 = LSB of byte 0), or byte index when
  // whole_byte. Arithmetic/InterestingReplace: byte offset of the window.
  // Splice: the cut.
  size_t offset = 0;
  bool whole_byte = false;
  size_t width = 1;     // 1, 2, 4 or 8
  int delta = 1;        // +1 or -1
  uint64_t value = 0;   // InterestingReplace, written little-endian, truncated
};

// Applies a fully specified op. Havoc draws its sub-ops from `rng`; the
// other kinds are deterministic. Splice needs `other`. Throws InvalidOffset
// for windows, bits or cuts outside the input and for empty inputs.
Bytes Mutate(const Bytes &input, const MutationOp &op, Rng &rng,
             const Bytes *other = nullptr);

// a[0..cut) ++ b[cut..); requires cut <= min(|a|, |b|).
Bytes Splice(const Bytes &a, const Bytes &b, size_t cut);
Bytes Havoc(const Bytes &input, Rng &rng);

// Draws a valid op of `kind` for an input of `size` bytes (and `other_size`
// for Splice).
MutationOp RandomOp(MutationKind kind, size_t size, Rng &rng, size_t other_size = 0);

// One random operator; Splice is eligible only with a non-empty partner. An
// empty input becomes a single random byte.
Bytes MutateRandom(const Bytes &input, Rng &rng, const Bytes *partner = nullptr,
                   MutationKind *used = nullptr);

}  // namespace meshfuzz

#endif  // MESHFUZZ_MUTATION_H_
