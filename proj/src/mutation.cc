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

#include "meshfuzz/mutation.h"

#include <algorithm>

#include "meshfuzz/errors.h"

namespace meshfuzz {

std::string_view MutationKindName(MutationKind kind) {
  switch (kind) {
    case MutationKind::kBitByteFlip:
      return "bit_byte_flip";
    case MutationKind::kArithmetic:
      return "arithmetic";
    case MutationKind::kInterestingReplace:
      return "interesting_replace";
    case MutationKind::kHavoc:
      return "havoc";
    case MutationKind::kSplice:
      return "splice";
  }
  return "?";
}

namespace {

bool ValidWidth(size_t w) { return w == 1 || w == 2 || w == 4 || w == 8; }

void CheckWindow(const Bytes &input, size_t offset, size_t width) {
  if (!ValidWidth(width)) throw InvalidOffset("width " + std::to_string(width));
  if (offset > input.size() || width > input.size() - offset) {
    throw InvalidOffset("window [" + std::to_string(offset) + ", +" +
                        std::to_string(width) + ") on " + std::to_string(input.size()) +
                        " bytes");
  }
}

uint64_t LoadLe(const Bytes &b, size_t offset, size_t width) {
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(b[offset + i])) << (8 * i);
  }
  return v;
}

void StoreLe(Bytes &b, size_t offset, size_t width, uint64_t v) {
  for (size_t i = 0; i < width; ++i) b[offset + i] = static_cast<char>(v >> (8 * i));
}

size_t RandomWidth(size_t size, Rng &rng) {
  constexpr size_t kWidths[] = {1, 2, 4, 8};
  size_t fitting = 0;
  while (fitting < 4 && kWidths[fitting] <= size) ++fitting;
  return kWidths[UniformBelow(rng, fitting)];
}

}  // namespace

Bytes Splice(const Bytes &a, const Bytes &b, size_t cut) {
  if (cut > std::min(a.size(), b.size())) {
    throw InvalidOffset("splice cut " + std::to_string(cut) + " beyond " +
                        std::to_string(std::min(a.size(), b.size())));
  }
  return a.substr(0, cut) + b.substr(cut);
}

Bytes Havoc(const Bytes &input, Rng &rng) {
  Bytes out = input;
  const size_t cap = std::max(input.size(), kMaxMutantSize);
  const uint64_t rounds = UniformIn(rng, 1, 16);
  for (uint64_t r = 0; r < rounds; ++r) {
    switch (UniformBelow(rng, 3)) {
      case 0: {  // set a random byte
        out[UniformBelow(rng, out.size())] = static_cast<char>(UniformBelow(rng, 256));
        break;
      }
      case 1: {  // delete a span, keeping at least one byte
        if (out.size() < 2) break;
        size_t len = UniformIn(rng, 1, out.size() - 1);
        size_t pos = UniformBelow(rng, out.size() - len + 1);
        out.erase(pos, len);
        break;
      }
      default: {  // duplicate a span in place
        if (out.size() >= cap) break;
        size_t len = UniformIn(rng, 1, std::min(out.size(), cap - out.size()));
        size_t pos = UniformBelow(rng, out.size() - len + 1);
        out.insert(pos + len, out.substr(pos, len));
        break;
      }
    }
  }
  return out;
}

Bytes Mutate(const Bytes &input, const MutationOp &op, Rng &rng, const Bytes *other) {
  if (op.kind == MutationKind::kSplice) {
    if (!other) throw InvalidOffset("splice needs a second input");
    return Splice(input, *other, op.offset);
  }
  if (input.empty()) throw InvalidOffset("empty input");
  Bytes out = input;
  switch (op.kind) {
    case MutationKind::kBitByteFlip:
      if (op.whole_byte) {
        if (op.offset >= out.size()) throw InvalidOffset("byte " + std::to_string(op.offset));
        out[op.offset] = static_cast<char>(~static_cast<unsigned char>(out[op.offset]));
      } else {
        if (op.offset >= 8 * out.size()) throw InvalidOffset("bit " + std::to_string(op.offset));
        out[op.offset / 8] = static_cast<char>(static_cast<unsigned char>(out[op.offset / 8]) ^
                                               (1u << (op.offset % 8)));
      }
      return out;
    case MutationKind::kArithmetic: {
      CheckWindow(out, op.offset, op.width);
      if (op.delta != 1 && op.delta != -1) throw InvalidOffset("delta must be +1 or -1");
      uint64_t v = LoadLe(out, op.offset, op.width);
      v += op.delta == 1 ? 1 : ~uint64_t{0};
      StoreLe(out, op.offset, op.width, v);
      return out;
    }
    case MutationKind::kInterestingReplace:
      CheckWindow(out, op.offset, op.width);
      StoreLe(out, op.offset, op.width, op.value);
      return out;
    case MutationKind::kHavoc:
      return Havoc(out, rng);
    case MutationKind::kSplice:
      break;
  }
  return out;
}

MutationOp RandomOp(MutationKind kind, size_t size, Rng &rng, size_t other_size) {
  MutationOp op;
  op.kind = kind;
  switch (kind) {
    case MutationKind::kBitByteFlip:
      op.whole_byte = UniformBelow(rng, 4) == 0;
      op.offset = op.whole_byte ? UniformBelow(rng, size) : UniformBelow(rng, 8 * size);
      break;
    case MutationKind::kArithmetic:
      op.width = RandomWidth(size, rng);
      op.offset = UniformBelow(rng, size - op.width + 1);
      op.delta = UniformBelow(rng, 2) ? 1 : -1;
      break;
    case MutationKind::kInterestingReplace: {
      op.width = RandomWidth(size, rng);
      op.offset = UniformBelow(rng, size - op.width + 1);
      // Prefer values that fit the window.
      size_t fitting = 0;
      while (fitting < kInterestingValues.size() &&
             (op.width == 8 || kInterestingValues[fitting] < (uint64_t{1} << (8 * op.width))))
        ++fitting;
      op.value = kInterestingValues[UniformBelow(rng, fitting)];
      break;
    }
    case MutationKind::kHavoc:
      break;
    case MutationKind::kSplice: {
      size_t m = std::min(size, other_size);
      op.offset = m >= 2 ? UniformIn(rng, 1, m - 1) : m;
      break;
    }
  }
  return op;
}

Bytes MutateRandom(const Bytes &input, Rng &rng, const Bytes *partner, MutationKind *used) {
  if (input.empty()) {
    if (used) *used = MutationKind::kHavoc;
    return Bytes(1, static_cast<char>(UniformBelow(rng, 256)));
  }
  const bool can_splice = partner && !partner->empty();
  const auto kind = static_cast<MutationKind>(UniformBelow(rng, can_splice ? 5 : 4));
  if (used) *used = kind;
  MutationOp op = RandomOp(kind, input.size(), rng, can_splice ? partner->size() : 0);
  return Mutate(input, op, rng, partner);
}

}  // namespace meshfuzz
