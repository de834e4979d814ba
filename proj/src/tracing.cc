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

#include "meshfuzz/tracing.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>

#include "meshfuzz/errors.h"

namespace meshfuzz {

using nlohmann::json;

namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<uint64_t> ParseHex64(std::string_view hex) {
  if (hex.size() != 16) return std::nullopt;
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string TraceId::ToHex() const { return Hex64(hi) + Hex64(lo); }

std::optional<TraceId> TraceId::FromHex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  auto hi = ParseHex64(hex.substr(0, 16));
  auto lo = ParseHex64(hex.substr(16));
  if (!hi || !lo) return std::nullopt;
  return TraceId{*hi, *lo};
}

uint64_t ComputeCoverDigest(const ProbeSet &probes) {
  std::vector<std::string> keys;
  keys.reserve(probes.size());
  for (const auto &p : probes) keys.push_back(p.ToString());
  std::sort(keys.begin(), keys.end());
  uint64_t h = kFnvOffset;
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= kFnvPrime;
  };
  for (size_t i = 0; i < keys.size(); ++i) {
    if (i) feed('\n');
    for (char c : keys[i]) feed(static_cast<unsigned char>(c));
  }
  return h;
}

std::string DigestHex(uint64_t digest) { return Hex64(digest); }
std::optional<uint64_t> ParseDigestHex(std::string_view hex) { return ParseHex64(hex); }

SpanSketch Trace::Sketch(size_t index) const {
  const Span &s = spans.at(index);
  SpanSketch out{s.app, s.handler, s.probes, {}};
  for (uint64_t child : s.child_span_ids) {
    for (size_t j = 0; j < spans.size(); ++j) {
      if (spans[j].span_id == child) {
        out.children.push_back(Sketch(j));
        break;
      }
    }
  }
  return out;
}

json TraceToJson(const Trace &trace) {
  std::function<json(size_t)> span_json = [&](size_t i) {
    const Span &s = trace.spans[i];
    json probes = json::array();
    for (const auto &p : s.probes) probes.push_back(p.ToString());
    json children = json::array();
    for (uint64_t child : s.child_span_ids) {
      for (size_t j = 0; j < trace.spans.size(); ++j) {
        if (trace.spans[j].span_id == child) children.push_back(span_json(j));
      }
    }
    json j = {{"span_id", Hex64(s.span_id)},
              {"app", s.app},
              {"handler", s.handler},
              {"start_ms", s.start_ms},
              {"end_ms", s.end_ms},
              {"probes", std::move(probes)},
              {"children", std::move(children)}};
    if (s.synthetic) j["synthetic"] = true;
    return j;
  };
  json probes = json::array();
  for (const auto &p : trace.probes) probes.push_back(p.ToString());
  return {{"trace_id", trace.trace_id.ToHex()},
          {"digest", DigestHex(trace.cover_digest)},
          {"outcome", trace.outcome},
          {"probes", std::move(probes)},
          {"root", trace.spans.empty() ? json(nullptr) : span_json(0)}};
}

void TraceAgent::OpenSpan(const TraceContext &ctx, std::string handler,
                          uint64_t start_ms, bool synthetic) {
  std::lock_guard lock(mu_);
  Span s;
  s.span_id = ctx.span_id;
  s.parent_span_id = ctx.parent_span_id;
  s.trace_id = ctx.trace_id;
  s.app = app_id_;
  s.handler = std::move(handler);
  s.start_ms = start_ms;
  s.end_ms = start_ms;
  s.synthetic = synthetic;
  spans_[ctx.trace_id].push_back(std::move(s));
}

Span *TraceAgent::FindOpen(const TraceContext &ctx) {
  auto it = spans_.find(ctx.trace_id);
  if (it != spans_.end()) {
    for (auto &s : it->second) {
      if (s.span_id == ctx.span_id && !s.closed) return &s;
    }
  }
  throw UnknownTrace("no open span " + Hex64(ctx.span_id) + " of trace " +
                     ctx.trace_id.ToHex() + " on agent " + app_id_);
}

void TraceAgent::Record(const TraceContext &ctx, const ProbeId &probe) {
  std::lock_guard lock(mu_);
  FindOpen(ctx)->probes.push_back(probe);
}

void TraceAgent::AddChild(const TraceContext &ctx, uint64_t child_span_id) {
  std::lock_guard lock(mu_);
  FindOpen(ctx)->child_span_ids.push_back(child_span_id);
}

void TraceAgent::CloseSpan(const TraceContext &ctx, uint64_t end_ms,
                           std::string status) {
  std::lock_guard lock(mu_);
  Span *s = FindOpen(ctx);
  s->end_ms = std::max(end_ms, s->start_ms);
  s->status = std::move(status);
  s->closed = true;
}

std::vector<Span> TraceAgent::Drain(const TraceId &trace_id) {
  std::lock_guard lock(mu_);
  auto node = spans_.extract(trace_id);
  return node ? std::move(node.mapped()) : std::vector<Span>{};
}

bool TraceAgent::HasOpenSpan(const TraceId &trace_id) const {
  std::lock_guard lock(mu_);
  auto it = spans_.find(trace_id);
  if (it == spans_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [](const Span &s) { return !s.closed; });
}

size_t TraceAgent::buffered() const {
  std::lock_guard lock(mu_);
  size_t n = 0;
  for (const auto &[id, spans] : spans_) n += spans.size();
  return n;
}

TraceAgent &TraceCollector::Agent(const std::string &app_id) {
  std::lock_guard lock(mu_);
  auto &slot = agents_[app_id];
  if (!slot) slot = std::make_unique<TraceAgent>(app_id);
  return *slot;
}

Trace TraceCollector::CollectAndSplice(const TraceId &trace_id) {
  std::vector<TraceAgent *> agents;
  {
    std::lock_guard lock(mu_);
    for (auto &[id, agent] : agents_) agents.push_back(agent.get());
  }
  for (TraceAgent *agent : agents) {
    if (agent->HasOpenSpan(trace_id)) {
      throw IncompleteTrace("trace " + trace_id.ToHex() + " has an open span on " +
                            agent->app_id());
    }
  }
  std::vector<Span> all;
  for (TraceAgent *agent : agents) {
    auto spans = agent->Drain(trace_id);
    std::move(spans.begin(), spans.end(), std::back_inserter(all));
  }
  if (all.empty()) throw UnknownTrace("trace " + trace_id.ToHex());

  std::map<uint64_t, size_t> by_id;
  for (size_t i = 0; i < all.size(); ++i) by_id[all[i].span_id] = i;
  std::map<uint64_t, std::vector<size_t>> kids;
  std::vector<size_t> roots;
  for (size_t i = 0; i < all.size(); ++i) {
    if (by_id.contains(all[i].parent_span_id) && all[i].parent_span_id != all[i].span_id) {
      kids[all[i].parent_span_id].push_back(i);
    } else {
      roots.push_back(i);
    }
  }
  auto by_start = [&](size_t a, size_t b) {
    if (all[a].start_ms != all[b].start_ms) return all[a].start_ms < all[b].start_ms;
    return all[a].span_id < all[b].span_id;
  };
  std::sort(roots.begin(), roots.end(), by_start);

  Trace trace;
  trace.trace_id = trace_id;
  std::function<void(size_t)> visit = [&](size_t i) {
    auto &children = kids[all[i].span_id];
    std::sort(children.begin(), children.end(), by_start);
    all[i].child_span_ids.clear();
    for (size_t c : children) all[i].child_span_ids.push_back(all[c].span_id);
    trace.probes.insert(all[i].probes.begin(), all[i].probes.end());
    trace.spans.push_back(all[i]);
    for (size_t c : children) visit(c);
  };
  for (size_t r : roots) visit(r);
  trace.cover_digest = ComputeCoverDigest(trace.probes);
  trace.outcome = trace.spans.front().status;

  std::lock_guard lock(mu_);
  traces_[trace_id] = trace;
  return trace;
}

std::optional<Trace> TraceCollector::Find(const TraceId &trace_id) const {
  std::lock_guard lock(mu_);
  auto it = traces_.find(trace_id);
  if (it == traces_.end()) return std::nullopt;
  return it->second;
}

void TraceCollector::Forget(const TraceId &trace_id) {
  std::lock_guard lock(mu_);
  traces_.erase(trace_id);
}

bool TraceCollector::ReportNewDigest(uint64_t digest) {
  std::lock_guard lock(mu_);
  return seen_.insert(digest).second;
}

size_t TraceCollector::seen_digests() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

void TraceCollector::ResetSeen() {
  std::lock_guard lock(mu_);
  seen_.clear();
}

}  // namespace meshfuzz
