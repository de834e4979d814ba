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

// Identifiers for coverage probes and mock points, and the recorded shape of
// a downstream call's coverage.

#ifndef MESHFUZZ_COVERAGE_H_
#define MESHFUZZ_COVERAGE_H_

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace meshfuzz {

// One basic block of one handler of one App. Fired on block entry.
struct ProbeId {
  std::string app;
  std::string handler;
  std::string block;

  // "app:handler:block"
  std::string ToString() const;
  static std::optional<ProbeId> Parse(std::string_view text);

  friend bool operator==(const ProbeId &, const ProbeId &) = default;
  friend auto operator<=>(const ProbeId &, const ProbeId &) = default;
};

using ProbeSet = std::set<ProbeId>;

// An interception-eligible statement: block plus statement index.
struct PointId {
  std::string app;
  std::string handler;
  std::string block;
  size_t index = 0;

  // "app:handler:block#index"
  std::string ToString() const;
  static std::optional<PointId> Parse(std::string_view text);
  ProbeId block_probe() const { return {app, handler, block}; }

  friend bool operator==(const PointId &, const PointId &) = default;
  friend auto operator<=>(const PointId &, const PointId &) = default;
};

// Coverage of one handler invocation and everything it called, as recorded
// by the tracing agents. Stored alongside a mocked RPC output so that a
// substituted call still contributes the callee's recorded coverage.
struct SpanSketch {
  std::string app;
  std::string handler;
  std::vector<ProbeId> probes;
  std::vector<SpanSketch> children;

  friend bool operator==(const SpanSketch &, const SpanSketch &) = default;
};

nlohmann::json SketchToJson(const SpanSketch &sketch);
SpanSketch SketchFromJson(const nlohmann::json &j);

// Appends every probe of `sketch` (pre-order) to `out`.
void FlattenSketch(const SpanSketch &sketch, std::vector<ProbeId> &out);

}  // namespace meshfuzz

#endif  // MESHFUZZ_COVERAGE_H_
