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

#include "meshfuzz/seed.h"

#include "meshfuzz/errors.h"
#include "meshfuzz/tracing.h"

namespace meshfuzz {

std::string_view SeedOriginName(SeedOrigin origin) {
  switch (origin) {
    case SeedOrigin::kTraffic:
      return "traffic";
    case SeedOrigin::kMutation:
      return "mutation";
    case SeedOrigin::kRefresh:
      return "refresh";
  }
  return "traffic";
}

std::optional<SeedOrigin> ParseSeedOrigin(std::string_view name) {
  for (auto o : {SeedOrigin::kTraffic, SeedOrigin::kMutation, SeedOrigin::kRefresh}) {
    if (SeedOriginName(o) == name) return o;
  }
  return std::nullopt;
}

nlohmann::json SeedToJson(const Seed &seed) {
  nlohmann::json args = nlohmann::json::array();
  for (const auto &a : seed.args) args.push_back(HexEncode(a));
  nlohmann::json j = {{"seed_id", seed.seed_id},
                      {"app", seed.app},
                      {"handler", seed.handler},
                      {"args", std::move(args)},
                      {"created_at", seed.created_at},
                      {"origin", SeedOriginName(seed.origin)},
                      {"version", seed.app_version_id},
                      {"digest", DigestHex(seed.cover_digest)}};
  if (!seed.parent_id.empty()) j["parent"] = seed.parent_id;
  return j;
}

Seed SeedFromJson(const nlohmann::json &j) {
  try {
    Seed seed;
    seed.seed_id = j.at("seed_id").get<std::string>();
    seed.app = j.at("app").get<std::string>();
    seed.handler = j.at("handler").get<std::string>();
    for (const auto &a : j.at("args")) {
      auto bytes = HexDecode(a.get<std::string>());
      if (!bytes) throw ParseError("seed " + seed.seed_id + ": bad hex argument " + a.dump());
      seed.args.push_back(std::move(*bytes));
    }
    seed.created_at = j.at("created_at").get<uint64_t>();
    auto origin = ParseSeedOrigin(j.at("origin").get<std::string>());
    if (!origin) throw ParseError("seed " + seed.seed_id + ": unknown origin");
    seed.origin = *origin;
    seed.app_version_id = j.at("version").get<std::string>();
    auto digest = ParseDigestHex(j.at("digest").get<std::string>());
    if (!digest) throw ParseError("seed " + seed.seed_id + ": bad digest");
    seed.cover_digest = *digest;
    seed.parent_id = j.value("parent", "");
    return seed;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("seed document: ") + e.what());
  }
}

}  // namespace meshfuzz
