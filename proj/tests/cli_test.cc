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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "meshfuzz/cli.h"
#include "test_util.h"

namespace meshfuzz {
namespace {

using namespace testutil;

struct Result {
  int code;
  std::string out, err;
  json Json() const { return json::parse(out); }
};

Result Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(ParseBudget, IterationsAndDurations) {
  EXPECT_EQ(ParseBudget("500")->iterations, 500u);
  EXPECT_FALSE(ParseBudget("500")->seconds.has_value());
  EXPECT_DOUBLE_EQ(*ParseBudget("30s")->seconds, 30.0);
  EXPECT_DOUBLE_EQ(*ParseBudget("5m")->seconds, 300.0);
  EXPECT_DOUBLE_EQ(*ParseBudget("2h")->seconds, 7200.0);
  EXPECT_EQ(ParseBudget("0")->iterations, 0u);
  for (const char *bad : {"", "x", "5d", "-1", "1.5", "s", "10ss"}) EXPECT_FALSE(ParseBudget(bad)) << bad;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"fuzz", "run", "--bogus"}).code, kExitUsage);
  auto r = Invoke({"fuzz", "run", "--scenario", Fixture("shop.json"), "--app", "gateway", "--budget", "soon"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
  EXPECT_EQ(Invoke({"fuzz", "run", "--scenario", Fixture("shop.json"), "--app", "nope"}).code, kExitUsage);
}

TEST(Cli, BudgetZeroExitsCleanly) {
  auto r = Invoke({"fuzz", "run", "--scenario", Fixture("shop.json"), "--app", "gateway", "--budget", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.Json()["iterations"], 0);
  EXPECT_EQ(r.Json()["stopped_by"], "budget");
}

TEST(Cli, SysVulFindingsExitTwo) {
  auto r = Invoke({"fuzz", "run", "--scenario", Fixture("crashy.json"), "--app", "crashy", "--budget", "500",
                "--no-switch"});
  EXPECT_EQ(r.code, kExitFindings) << r.err;
  EXPECT_FALSE(r.Json()["crashes"]["Sys_Vul"].empty());
}

TEST(Cli, StoreLifecycle) {
  TempDir dir;
  const std::string store = (dir.path() / "store").string();
  auto r = Invoke({"fuzz", "run", "--scenario", Fixture("classifier.json"), "--app", "classifier", "--budget",
                "300", "--store", store, "--out", (dir.path() / "report.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream rep(dir.path() / "report.json");
  const json report = json::parse(rep);
  const auto stored = report["stored_seeds"].get<size_t>();

  auto ls = Invoke({"seedstore", "ls", "--store", store});
  ASSERT_EQ(ls.code, kExitOk);
  EXPECT_EQ(static_cast<size_t>(std::count(ls.out.begin(), ls.out.end(), '\n')), stored);
  const std::string first_id = ls.out.substr(0, ls.out.find(' '));

  auto rp = Invoke({"replay", "--scenario", Fixture("classifier.json"), "--store", store, "--seed-id", first_id});
  ASSERT_EQ(rp.code, kExitOk) << rp.err;
  EXPECT_EQ(rp.Json()["digest"], rp.Json()["recorded_digest"]);

  auto text = Invoke({"report", (dir.path() / "report.json").string()});
  EXPECT_EQ(text.code, kExitOk);
  EXPECT_NE(text.out.find("classifier"), std::string::npos);

  auto rf = Invoke({"seedstore", "refresh", "--store", store, "--app", "classifier", "--scenario",
                 Fixture("classifier.json")});
  ASSERT_EQ(rf.code, kExitOk) << rf.err;
  EXPECT_EQ(rf.Json()["refreshed"], stored);

  EXPECT_EQ(Invoke({"seedstore", "rm", "--store", store, "--seed-id", first_id}).code, kExitOk);
  EXPECT_EQ(Invoke({"seedstore", "rm", "--store", store, "--seed-id", first_id}).code, kExitUsage);
  ls = Invoke({"seedstore", "ls", "--store", store});
  EXPECT_EQ(static_cast<size_t>(std::count(ls.out.begin(), ls.out.end(), '\n')), stored - 1);
}

TEST(Cli, SwitchOffStopsCampaign) {
  TempDir dir;
  const std::string store = (dir.path() / "store").string();
  ASSERT_EQ(Invoke({"switch", "off", "--store", store}).code, kExitOk);
  std::ifstream f(dir.path() / "store" / "control");
  std::string state;
  f >> state;
  EXPECT_EQ(state, "off");
  auto r = Invoke({"fuzz", "run", "--scenario", Fixture("shop.json"), "--app", "gateway", "--budget", "1000",
                "--store", store});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.Json()["stopped_by"], "user");
  EXPECT_EQ(r.Json()["iterations"], 0);
  EXPECT_EQ(Invoke({"switch", "sideways", "--store", store}).code, kExitUsage);
  EXPECT_EQ(Invoke({"switch", "on"}).code, kExitUsage);
}

TEST(Cli, IterateAndTaint) {
  auto it = Invoke({"iterate", "--old", Fixture("vault_v1.json"), "--new", Fixture("vault_v2.json"), "--budget",
                 "2000"});
  ASSERT_EQ(it.code, kExitOk) << it.err;
  EXPECT_TRUE(it.Json().contains("RI"));
  EXPECT_TRUE(it.Json().contains("effectiveness"));

  auto tv = Invoke({"taint", "verify", "--scenario", Fixture("shop.json"), "--candidates",
                 Fixture("shop_candidates.json"), "-k", "50"});
  ASSERT_EQ(tv.code, kExitOk) << tv.err;
  ASSERT_EQ(tv.Json().size(), 2u);
  for (const auto &e : tv.Json()) {
    const std::string v = e["result"]["verdict"];
    EXPECT_TRUE(v == "confirmed" || v == "uncertain");
  }
}

TEST(Cli, InterruptStopsGracefully) {
  std::atomic<bool> stop{true};
  std::ostringstream out, err;
  const int code = RunCli({"fuzz", "run", "--scenario", Fixture("shop.json"), "--app", "gateway",
                           "--budget", "100000", "--no-switch"},
                          out, err, &stop);
  EXPECT_EQ(code, kExitOk) << err.str();
  EXPECT_EQ(json::parse(out.str())["stopped_by"], "user");
}

}  // namespace
}  // namespace meshfuzz
