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

// Per-App trace agents and the central collector. Agents buffer spans under
// a trace id; the collector pulls every span of a finished request, splices
// them into a tree and hashes the union of their probes into a cover digest.

#ifndef MESHFUZZ_TRACING_H_
#define MESHFUZZ_TRACING_H_

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "meshfuzz/coverage.h"

namespace meshfuzz {

struct TraceId {
  uint64_t hi = 0;
  uint64_t lo = 0;

  std::string ToHex() const;  // 32 hex digits
  static std::optional<TraceId> FromHex(std::string_view hex);

  friend bool operator==(const TraceId &, const TraceId &) = default;
  friend auto operator<=>(const TraceId &, const TraceId &) = default;
};

struct TraceContext {
  TraceId trace_id;
  uint64_t span_id = 0;         // the span currently executing
  uint64_t parent_span_id = 0;  // 0 for the root
  uint32_t depth = 0;           // hops from the root
};

struct Span {
  uint64_t span_id = 0;
  uint64_t parent_span_id = 0;
  TraceId trace_id;
  std::string app;
  std::string handler;
  uint64_t start_ms = 0;
  uint64_t end_ms = 0;
  std::vector<ProbeId> probes;  // execution order, duplicates kept
  std::vector<uint64_t> child_span_ids;
  bool closed = false;
  // Spliced from a recorded callee sketch rather than executed.
  bool synthetic = false;
  std::string status;  // Outcome summary, set on close
};

// FNV-1a 64 over the sorted "app:handler:block" strings joined by '\n'.
uint64_t ComputeCoverDigest(const ProbeSet &probes);
std::string DigestHex(uint64_t digest);  // 16 lowercase hex digits
std::optional<uint64_t> ParseDigestHex(std::string_view hex);

struct Trace {
  TraceId trace_id;
  std::vector<Span> spans;  // pre-order, root first, siblings by start time
  ProbeSet probes;
  uint64_t cover_digest = 0;
  std::string outcome;

  const Span &root() const { return spans.front(); }
  // Sketch of the subtree rooted at spans[index].
  SpanSketch Sketch(size_t index = 0) const;
};

nlohmann::json TraceToJson(const Trace &trace);

class TraceAgent {
 public:
  explicit TraceAgent(std::string app_id) : app_id_(std::move(app_id)) {}

  const std::string &app_id() const { return app_id_; }

  void OpenSpan(const TraceContext &ctx, std::string handler, uint64_t start_ms,
                bool synthetic = false);
  // Throws UnknownTrace unless ctx names an open span on this agent.
  void Record(const TraceContext &ctx, const ProbeId &probe);
  void AddChild(const TraceContext &ctx, uint64_t child_span_id);
  void CloseSpan(const TraceContext &ctx, uint64_t end_ms, std::string status = {});

  // Removes and returns every span buffered for `trace_id`.
  std::vector<Span> Drain(const TraceId &trace_id);
  bool HasOpenSpan(const TraceId &trace_id) const;
  size_t buffered() const;

 private:
  Span *FindOpen(const TraceContext &ctx);

  const std::string app_id_;
  mutable std::mutex mu_;
  std::map<TraceId, std::vector<Span>> spans_;
};

class TraceCollector {
 public:
  // Agents are created on first use and live as long as the collector.
  TraceAgent &Agent(const std::string &app_id);

  // Throws IncompleteTrace while any agent holds an open span for the trace
  // (nothing is drained in that case) and UnknownTrace if no agent has it.
  Trace CollectAndSplice(const TraceId &trace_id);
  std::optional<Trace> Find(const TraceId &trace_id) const;
  void Forget(const TraceId &trace_id);

  // True iff `digest` was not reported before in this campaign.
  bool ReportNewDigest(uint64_t digest);
  size_t seen_digests() const;
  void ResetSeen();

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<TraceAgent>> agents_;
  std::map<TraceId, Trace> traces_;
  std::unordered_set<uint64_t> seen_;
};

}  // namespace meshfuzz

#endif  // MESHFUZZ_TRACING_H_
