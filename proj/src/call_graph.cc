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

#include "meshfuzz/call_graph.h"

#include <algorithm>
#include <map>

namespace meshfuzz {

std::optional<size_t> CallGraph::Find(std::string_view key) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
  if (it == nodes_.end() || *it != key) return std::nullopt;
  return static_cast<size_t>(it - nodes_.begin());
}

bool CallGraph::IsMethodNode(size_t node) const {
  return std::count(nodes_[node].begin(), nodes_[node].end(), ':') == 1;
}

std::vector<std::vector<size_t>> CallGraph::Adjacency() const {
  std::vector<std::vector<size_t>> out(nodes_.size());
  for (auto [u, v] : edges_) out[u].push_back(v);
  return out;
}

std::vector<std::vector<size_t>> CallGraph::ReverseAdjacency() const {
  std::vector<std::vector<size_t>> out(nodes_.size());
  for (auto [u, v] : edges_) out[v].push_back(u);
  return out;
}

CallGraph CallGraph::FromEdges(std::vector<std::string> nodes,
                               std::vector<std::pair<size_t, size_t>> edges) {
  CallGraph g;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  return g;
}

namespace {

const AppSpec *FindApp(std::span<const AppSpec> apps, std::string_view id) {
  for (const auto &app : apps) {
    if (app.app_id == id) return &app;
  }
  return nullptr;
}

std::string BlockKey(const std::string &app, const std::string &handler,
                     const std::string &block) {
  return app + ":" + handler + ":" + block;
}

}  // namespace

CallGraph BuildCallGraph(std::span<const AppSpec> apps) {
  CallGraph g;
  for (const auto &app : apps) {
    for (const auto &h : app.handlers) {
      g.nodes_.push_back(app.app_id + ":" + h.name);
      for (const auto &[id, block] : h.blocks) {
        g.nodes_.push_back(BlockKey(app.app_id, h.name, id));
      }
    }
  }
  std::sort(g.nodes_.begin(), g.nodes_.end());

  // Apps and handlers are visited in sorted order so edge order is stable
  // regardless of how the caller ordered the set.
  std::vector<const AppSpec *> sorted;
  for (const auto &app : apps) sorted.push_back(&app);
  std::sort(sorted.begin(), sorted.end(),
            [](const AppSpec *a, const AppSpec *b) { return a->app_id < b->app_id; });

  for (const AppSpec *app : sorted) {
    std::vector<const Handler *> handlers;
    for (const auto &h : app->handlers) handlers.push_back(&h);
    std::sort(handlers.begin(), handlers.end(),
              [](const Handler *a, const Handler *b) { return a->name < b->name; });
    for (const Handler *h : handlers) {
      for (const auto &[id, block] : h->blocks) {
        size_t from = *g.Find(BlockKey(app->app_id, h->name, id));
        for (const auto &succ : h->Successors(block)) {
          g.edges_.emplace_back(from, *g.Find(BlockKey(app->app_id, h->name, succ)));
        }
        for (const auto &stmt : block.stmts) {
          const auto *rpc = std::get_if<RpcCallStmt>(&stmt);
          if (!rpc) continue;
          const AppSpec *callee = FindApp(apps, rpc->app);
          const Handler *ch = callee ? callee->FindHandler(rpc->handler) : nullptr;
          if (!ch) {
            g.warnings_.push_back(BlockKey(app->app_id, h->name, id) +
                                  ": unresolved rpc " + rpc->app + ":" + rpc->handler);
            continue;
          }
          g.edges_.emplace_back(from, *g.Find(BlockKey(rpc->app, ch->name, ch->entry)));
        }
      }
    }
  }
  return g;
}

BlockDiff DiffBlocks(std::span<const AppSpec> old_apps,
                     std::span<const AppSpec> new_apps) {
  auto bodies = [](std::span<const AppSpec> apps) {
    std::map<ProbeId, std::string> out;
    for (const auto &app : apps) {
      for (const auto &h : app.handlers) {
        for (const auto &[id, block] : h.blocks) {
          out[{app.app_id, h.name, id}] = CanonicalBlockBody(block);
        }
      }
    }
    return out;
  };
  const auto before = bodies(old_apps);
  const auto after = bodies(new_apps);
  BlockDiff diff;
  for (const auto &[probe, body] : after) {
    auto it = before.find(probe);
    if (it == before.end() || it->second != body) diff.changed.insert(probe);
  }
  for (const auto &[probe, body] : before) {
    if (!after.contains(probe)) diff.deleted.insert(probe);
  }
  return diff;
}

std::set<std::string> CallClosure(std::span<const AppSpec> apps,
                                  std::string_view app_id) {
  std::set<std::string> seen{std::string(app_id)};
  std::vector<std::string> work{std::string(app_id)};
  while (!work.empty()) {
    std::string cur = std::move(work.back());
    work.pop_back();
    const AppSpec *app = FindApp(apps, cur);
    if (!app) continue;
    for (const auto &h : app->handlers) {
      for (const auto &[id, block] : h.blocks) {
        for (const auto &stmt : block.stmts) {
          if (const auto *rpc = std::get_if<RpcCallStmt>(&stmt)) {
            if (seen.insert(rpc->app).second) work.push_back(rpc->app);
          }
        }
      }
    }
  }
  return seen;
}

}  // namespace meshfuzz
