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

#ifndef MESHFUZZ_SEED_H_
#define MESHFUZZ_SEED_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "meshfuzz/value.h"

namespace meshfuzz {

enum class SeedOrigin { kTraffic, kMutation, kRefresh };

std::string_view SeedOriginName(SeedOrigin origin);
std::optional<SeedOrigin> ParseSeedOrigin(std::string_view name);

struct Seed {
  std::string seed_id;
  std::string app;
  std::string handler;
  std::vector<Bytes> args;
  uint64_t created_at = 0;  // virtual ms
  SeedOrigin origin = SeedOrigin::kTraffic;
  std::string app_version_id;
  uint64_t cover_digest = 0;
  std::string parent_id;  // empty for traffic seeds

  friend bool operator==(const Seed &, const Seed &) = default;
};

nlohmann::json SeedToJson(const Seed &seed);
Seed SeedFromJson(const nlohmann::json &j);

}  // namespace meshfuzz

#endif  // MESHFUZZ_SEED_H_
