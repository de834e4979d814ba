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

#include "meshfuzz/scenario_file.h"

#include <cmath>
#include <fstream>
#include <set>

#include "meshfuzz/errors.h"

namespace meshfuzz {

using nlohmann::json;

namespace {

// An app entry is either a path (relative to the scenario) or an inline spec.
AppSpec LoadApp(const json &entry, const std::filesystem::path &base) {
  if (entry.is_string()) {
    std::filesystem::path p = entry.get<std::string>();
    return LoadAppSpecFile(p.is_absolute() ? p : base / p);
  }
  if (entry.is_object()) return ParseAppSpec(entry);
  throw ParseError("app entry must be a path or an object");
}

uint64_t ParseU64(const json &j, const char *field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<int64_t>() >= 0)) {
    throw ParseError(std::string("\"") + field + "\" must be a non-negative integer");
  }
  return j.get<uint64_t>();
}

}  // namespace

void ParseProbability(const json &j, FaultPolicy &policy) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) throw std::invalid_argument(s);
      size_t used = 0;
      policy.numerator = std::stoull(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(s);
      const std::string den = s.substr(slash + 1);
      policy.denominator = std::stoull(den, &used);
      if (used != den.size()) throw std::invalid_argument(s);
    } catch (const std::exception &) {
      throw ParseError("rpc_failure_probability \"" + s + "\" is not a fraction a/b");
    }
  } else if (j.is_number()) {
    const double p = j.get<double>();
    if (!(p >= 0 && p <= 1)) throw ParseError("rpc_failure_probability must lie in [0, 1]");
    policy.denominator = 1'000'000;
    policy.numerator = static_cast<uint64_t>(std::llround(p * 1e6));
  } else {
    throw ParseError("rpc_failure_probability must be a number or \"a/b\"");
  }
  if (policy.denominator == 0 || policy.numerator > policy.denominator) {
    throw ParseError("rpc_failure_probability must lie in [0, 1]");
  }
}

Scenario ParseScenario(const json &doc, const std::filesystem::path &base) {
  if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
  Scenario s;
  try {
    std::set<std::string> ids;
    for (const auto &entry : doc.at("apps")) {
      s.apps.push_back(LoadApp(entry, base));
      if (!ids.insert(s.apps.back().app_id).second) {
        throw ValidationError("app \"" + s.apps.back().app_id + "\" listed twice");
      }
    }
    if (doc.contains("seed")) s.seed = ParseU64(doc["seed"], "seed");
    if (doc.contains("fault_policy")) {
      const json &fp = doc["fault_policy"];
      if (fp.contains("rpc_failure_probability")) {
        ParseProbability(fp["rpc_failure_probability"], s.fault_policy);
      }
      if (fp.contains("latency_ms")) s.fault_policy.latency_ms = ParseU64(fp["latency_ms"], "latency_ms");
      if (fp.contains("affected_apps")) {
        s.fault_policy.affected_apps = fp["affected_apps"].get<std::set<std::string>>();
      }
    }
    for (const auto &e : doc.value("events", json::array())) {
      s.events.push_back({ParseU64(e.at("time_ms"), "time_ms"), LoadApp(e.at("app_spec"), base)});
    }
    for (const auto &c : doc.value("corpus", json::array())) {
      Seed seed;
      seed.app = c.at("app").get<std::string>();
      seed.handler = c.at("handler").get<std::string>();
      for (const auto &a : c.at("args")) {
        auto bytes = HexDecode(a.get<std::string>());
        if (!bytes) throw ParseError("corpus arg \"" + a.get<std::string>() + "\" is not hex");
        seed.args.push_back(std::move(*bytes));
      }
      if (!ids.count(seed.app)) throw ValidationError("corpus names unknown app \"" + seed.app + "\"");
      s.corpus.push_back(std::move(seed));
    }
    if (doc.contains("step_budget")) s.step_budget = ParseU64(doc["step_budget"], "step_budget");
    if (doc.contains("max_hops")) {
      s.max_hops = static_cast<uint32_t>(ParseU64(doc["max_hops"], "max_hops"));
    }
  } catch (const json::exception &e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario LoadScenarioFile(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return ParseScenario(doc, path.parent_path());
}

std::unique_ptr<Cluster> BuildCluster(const Scenario &scenario,
                                      std::optional<uint64_t> seed_override) {
  auto cluster = std::make_unique<Cluster>(seed_override.value_or(scenario.seed),
                                           scenario.fault_policy);
  if (scenario.step_budget) cluster->set_step_budget(*scenario.step_budget);
  if (scenario.max_hops) cluster->set_max_hops(*scenario.max_hops);
  for (const auto &app : scenario.apps) cluster->Deploy(app);
  return cluster;
}

}  // namespace meshfuzz
