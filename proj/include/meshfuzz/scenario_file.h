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

// Cluster scenario files:
//
//   {
//     "apps": ["apps/gateway.json", ...],        // relative to the file
//     "seed": 7,
//     "fault_policy": {"rpc_failure_probability": "1/10",   // or a number
//                      "latency_ms": 0, "affected_apps": ["db"]},
//     "events": [{"time_ms": 3600000, "app_spec": "apps/gateway_v2.json"}],
//     "corpus": [{"app": "gateway", "handler": "get", "args": ["0x01"]}],
//     "step_budget": 100000,
//     "max_hops": 32
//   }

#ifndef MESHFUZZ_SCENARIO_FILE_H_
#define MESHFUZZ_SCENARIO_FILE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "meshfuzz/app_spec.h"
#include "meshfuzz/cluster.h"
#include "meshfuzz/fuzz_engine.h"
#include "meshfuzz/seed.h"

namespace meshfuzz {

struct Scenario {
  std::vector<AppSpec> apps;
  uint64_t seed = 0;
  FaultPolicy fault_policy;
  std::vector<ScriptedEvent> events;
  std::vector<Seed> corpus;
  std::optional<uint64_t> step_budget;
  std::optional<uint32_t> max_hops;
};

// Throws ParseError / ValidationError.
Scenario ParseScenario(const nlohmann::json &doc, const std::filesystem::path &base_dir);
Scenario LoadScenarioFile(const std::filesystem::path &path);

// Parses "a/b" or a decimal in [0, 1].
void ParseProbability(const nlohmann::json &j, FaultPolicy &policy);

// A cluster with every scenario app deployed; events are not applied.
std::unique_ptr<Cluster> BuildCluster(const Scenario &scenario,
                                      std::optional<uint64_t> seed_override = std::nullopt);

}  // namespace meshfuzz

#endif  // MESHFUZZ_SCENARIO_FILE_H_
