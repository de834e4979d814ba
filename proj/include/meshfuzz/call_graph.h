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

#ifndef MESHFUZZ_CALL_GRAPH_H_
#define MESHFUZZ_CALL_GRAPH_H_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meshfuzz/app_spec.h"
#include "meshfuzz/coverage.h"

namespace meshfuzz {

// Block-level interprocedural graph over a set of Apps. Block nodes are keyed
// "app:handler:block"; method nodes "app:handler". Edges are CFG successor
// pairs plus one edge per resolvable RpcCall, from the calling block to the
// callee's entry block. Unit weights; parallel edges are kept.
class CallGraph {
 public:
  const std::vector<std::string> &nodes() const { return nodes_; }
  const std::vector<std::pair<size_t, size_t>> &edges() const { return edges_; }
  // RpcCalls whose target app or handler is not in the set.
  const std::vector<std::string> &warnings() const { return warnings_; }

  std::optional<size_t> Find(std::string_view key) const;
  std::optional<size_t> Find(const ProbeId &probe) const { return Find(probe.ToString()); }
  bool IsMethodNode(size_t node) const;
  // out[u] lists v for every edge u -> v, in edge order.
  std::vector<std::vector<size_t>> Adjacency() const;
  std::vector<std::vector<size_t>> ReverseAdjacency() const;

  friend CallGraph BuildCallGraph(std::span<const AppSpec> apps);
  // For hand-built graphs in tests and benchmarks.
  static CallGraph FromEdges(std::vector<std::string> nodes,
                             std::vector<std::pair<size_t, size_t>> edges);

 private:
  std::vector<std::string> nodes_;  // sorted
  std::vector<std::pair<size_t, size_t>> edges_;
  std::vector<std::string> warnings_;
};

CallGraph BuildCallGraph(std::span<const AppSpec> apps);

struct BlockDiff {
  ProbeSet changed;  // added or modified in `new`
  ProbeSet deleted;  // present only in `old`
};

BlockDiff DiffBlocks(std::span<const AppSpec> old_apps,
                     std::span<const AppSpec> new_apps);

// Apps reachable from `app_id` through RpcCall statements, including itself.
std::set<std::string> CallClosure(std::span<const AppSpec> apps,
                                  std::string_view app_id);

}  // namespace meshfuzz

#endif  // MESHFUZZ_CALL_GRAPH_H_
