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

#include "meshfuzz/coverage.h"

#include <charconv>

#include "meshfuzz/errors.h"

namespace meshfuzz {

std::string ProbeId::ToString() const {
  return app + ":" + handler + ":" + block;
}

std::optional<ProbeId> ProbeId::Parse(std::string_view text) {
  size_t a = text.find(':');
  if (a == std::string_view::npos) return std::nullopt;
  size_t b = text.find(':', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  if (text.find(':', b + 1) != std::string_view::npos) return std::nullopt;
  return ProbeId{std::string(text.substr(0, a)),
                 std::string(text.substr(a + 1, b - a - 1)),
                 std::string(text.substr(b + 1))};
}

std::string PointId::ToString() const {
  return app + ":" + handler + ":" + block + "#" + std::to_string(index);
}

std::optional<PointId> PointId::Parse(std::string_view text) {
  size_t hash = text.rfind('#');
  if (hash == std::string_view::npos) return std::nullopt;
  auto probe = ProbeId::Parse(text.substr(0, hash));
  if (!probe) return std::nullopt;
  std::string_view digits = text.substr(hash + 1);
  size_t index = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size() ||
      digits.empty())
    return std::nullopt;
  return PointId{probe->app, probe->handler, probe->block, index};
}

nlohmann::json SketchToJson(const SpanSketch &sketch) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto &p : sketch.probes) probes.push_back(p.ToString());
  nlohmann::json children = nlohmann::json::array();
  for (const auto &c : sketch.children) children.push_back(SketchToJson(c));
  return {{"app", sketch.app},
          {"handler", sketch.handler},
          {"probes", std::move(probes)},
          {"children", std::move(children)}};
}

SpanSketch SketchFromJson(const nlohmann::json &j) {
  if (!j.is_object()) throw ParseError("span sketch must be an object");
  SpanSketch out;
  out.app = j.at("app").get<std::string>();
  out.handler = j.at("handler").get<std::string>();
  for (const auto &p : j.at("probes")) {
    auto probe = ProbeId::Parse(p.get<std::string>());
    if (!probe) throw ParseError("bad probe id " + p.dump());
    out.probes.push_back(std::move(*probe));
  }
  for (const auto &c : j.at("children")) out.children.push_back(SketchFromJson(c));
  return out;
}

void FlattenSketch(const SpanSketch &sketch, std::vector<ProbeId> &out) {
  out.insert(out.end(), sketch.probes.begin(), sketch.probes.end());
  for (const auto &c : sketch.children) FlattenSketch(c, out);
}

}  // namespace meshfuzz
