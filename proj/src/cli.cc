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

#include "meshfuzz/cli.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "meshfuzz/errors.h"
#include "meshfuzz/fuzz_engine.h"
#include "meshfuzz/mocking.h"
#include "meshfuzz/monitor.h"
#include "meshfuzz/scenario_file.h"
#include "meshfuzz/scenarios.h"
#include "meshfuzz/seed_store.h"

namespace meshfuzz {

using nlohmann::json;
namespace fs = std::filesystem;

std::optional<BudgetSpec> ParseBudget(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double scale = 0;
  switch (text.back()) {
    case 's': scale = 1; break;
    case 'm': scale = 60; break;
    case 'h': scale = 3600; break;
    default: break;
  }
  std::string_view digits = scale > 0 ? text.substr(0, text.size() - 1) : text;
  uint64_t value = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
    return std::nullopt;
  }
  BudgetSpec b;
  if (scale > 0) {
    b.iterations = std::numeric_limits<uint64_t>::max();
    b.seconds = static_cast<double>(value) * scale;
  } else {
    b.iterations = value;
  }
  return b;
}

std::string RenderReport(const json &r) {
  std::ostringstream o;
  if (r.contains("RI")) {
    o << "iteration test\n";
    o << "  changed blocks: " << r["diff"]["changed"].size()
      << ", deleted: " << r["diff"]["deleted"].size() << "\n";
    o << "  regression suite: " << r["suites"]["A"]["seeds"].size() << " seed(s) on "
      << r["suites"]["A"]["version"].get<std::string>() << ", "
      << r["suites"]["B"]["seeds"].size() << " on "
      << r["suites"]["B"]["version"].get<std::string>() << "\n";
    for (const auto &d : r["deltas"]) {
      o << "  delta " << d["seed_id"].get<std::string>() << ": "
        << d["old_outcome"].get<std::string>() << " -> " << d["new_outcome"].get<std::string>()
        << "\n";
    }
    o << "  #RI " << r["RI"] << ", #RT " << r["RT"] << ", effectiveness ";
    if (r["effectiveness"].is_null()) o << "n/a";
    else o << std::fixed << std::setprecision(4) << r["effectiveness"].get<double>();
    o << "\n  changed blocks reached: " << r["reached"].size() << "\n";
    if (r.contains("campaign") && r["campaign"].is_object()) o << RenderReport(r["campaign"]);
    return o.str();
  }
  const json &s = r.at("stats");
  o << "campaign on " << r.at("target").get<std::string>() << " (" << r["mode"].get<std::string>()
    << ", seed " << r["rng_seed"] << ")\n";
  o << "  iterations: " << r["iterations"] << ", stopped by " << r["stopped_by"].get<std::string>()
    << "\n";
  o << "  blocks covered: " << s["S_n"] << "/" << s["S_hat"] << ", distinct digests: "
    << r["distinct_digests"] << ", stored distinct: " << s["C"] << "\n";
  o << "  singletons f1=" << s["f1"] << ", doubletons f2=" << s["f2"] << "\n";
  o << "  admissions: " << r["admissions"].size() << ", replay divergences: " << r["divergences"]
    << "\n";
  for (const char *cat : {"Biz_Vul", "Sys_Vul"}) {
    const json &list = r["crashes"][cat];
    o << "  " << cat << ": " << list.size() << "\n";
    for (const auto &c : list) {
      o << "    " << c["kind"].get<std::string>() << " at " << c["at"].get<std::string>();
      if (!c["seed_id"].get<std::string>().empty()) o << " (" << c["seed_id"].get<std::string>() << ")";
      o << "\n";
    }
  }
  if (!r["switch"].empty()) {
    o << "  switch:\n";
    for (const auto &t : r["switch"]) {
      o << "    n=" << t["at_n"] << " " << t["state"].get<std::string>() << " ("
        << t["reason"].get<std::string>() << ")\n";
    }
  }
  if (!r["refreshes"].empty()) o << "  refreshes: " << r["refreshes"].size() << "\n";
  if (r.contains("measurement")) {
    const json &m = r["measurement"];
    o << "  throughput: " << std::fixed << std::setprecision(1)
      << m["throughput_per_s"].get<double>() << " items/s\n";
    for (const auto &[name, h] : m["stages"].items()) {
      o << "    " << name << ": mean " << std::setprecision(2) << h["mean_ms"].get<double>()
        << " ms, p90 " << h["p90_ms"].get<double>() << " ms\n";
    }
  }
  return o.str();
}

namespace {

std::unique_ptr<SeedStore> OpenStore(const std::string &dir) {
  if (!dir.empty() && fs::exists(fs::path(dir) / "index" / "digests.json")) {
    return SeedStore::Load(dir);
  }
  return std::make_unique<SeedStore>();
}

void Emit(const json &doc, const std::string &path, std::ostream &out) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StoreIoError("cannot write " + path);
  f << text;
}

json ReadJsonFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void ApplyEvents(Cluster &cluster, const Scenario &scenario) {
  for (const auto &e : scenario.events) {
    if (cluster.now_ms() < e.time_ms) cluster.Advance(e.time_ms - cluster.now_ms());
    cluster.Deploy(e.spec);
  }
}

struct FuzzOptions {
  std::string scenario, app, budget = "1000", mode = "sequential", strategy = "weighted";
  std::optional<uint64_t> seed;
  std::string store, out, control_file;
  double t1 = 0.01, t2 = 0.005;
  uint64_t m_star = 0, n_min = 200;
  double refresh_h = 12, cleanup_h = 24, ttl_days = 3;
  size_t queue_depth = 8, epoch = 64, collect_workers = 2;
  std::optional<uint64_t> step_budget;
  uint64_t stats_every = 0;
  bool no_switch = false, no_triggers = false, measure = false;
  std::vector<double> latency;
};

int CmdFuzzRun(const FuzzOptions &o, std::ostream &out, const std::atomic<bool> *interrupted) {
  const auto budget = ParseBudget(o.budget);
  if (!budget) throw ValidationError("bad --budget \"" + o.budget + "\"");
  const Scenario scenario = LoadScenarioFile(o.scenario);
  auto cluster = BuildCluster(scenario, o.seed);
  if (o.step_budget) cluster->set_step_budget(*o.step_budget);
  auto active = cluster->Active(o.app);
  if (!active) throw UnknownApp("\"" + o.app + "\" is not in the scenario");

  auto store = OpenStore(o.store);
  SwitchPolicy policy{o.t1, o.t2, o.m_star, o.n_min};
  Monitor monitor(o.app, active->BlockCount(), policy);
  if (store->size(o.app) == 0) AdmitCorpus(*cluster, *store, scenario.corpus, &monitor);

  CampaignConfig cc;
  cc.target_app = o.app;
  cc.rng_seed = o.seed.value_or(scenario.seed);
  cc.budget = budget->iterations;
  cc.wall_budget_s = budget->seconds;
  cc.mode = o.mode == "pipeline" ? CampaignMode::kPipeline : CampaignMode::kSequential;
  cc.strategy = o.strategy == "round_robin" ? SelectStrategy::kRoundRobin : SelectStrategy::kWeighted;
  cc.epoch_size = o.epoch;
  cc.queue_depth = o.queue_depth;
  cc.collect_workers = o.collect_workers;
  cc.measure = o.measure;
  for (size_t i = 0; i < o.latency.size() && i < kStageCount; ++i) cc.latency.ms[i] = o.latency[i];
  cc.switch_enabled = !o.no_switch;
  cc.stats_every = o.stats_every;
  cc.events = scenario.events;
  cc.triggers = !o.no_triggers;
  cc.trigger_config.refresh_interval_ms = static_cast<uint64_t>(o.refresh_h * kHourMs);
  cc.trigger_config.cleanup_interval_ms = static_cast<uint64_t>(o.cleanup_h * kHourMs);
  cc.trigger_config.ttl_ms = static_cast<uint64_t>(o.ttl_days * kDayMs);
  if (!o.control_file.empty()) cc.control_file = o.control_file;
  else if (!o.store.empty()) cc.control_file = fs::path(o.store) / "control";
  if (interrupted) cc.stop_requested = [interrupted] { return interrupted->load(); };

  CampaignResult result = RunCampaign(*cluster, *store, monitor, cc);
  if (!o.store.empty()) store->Save(o.store);
  Emit(result.report, o.out, out);
  return result.has_sys_vul() ? kExitFindings : kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err,
           const std::atomic<bool> *interrupted) {
  CLI::App app{"Coverage-guided fuzzing for simulated microservice clusters", "meshfuzz"};
  app.require_subcommand(1);
  int code = kExitOk;

  // fuzz run
  FuzzOptions fo;
  auto *fuzz = app.add_subcommand("fuzz", "Fuzzing campaigns");
  fuzz->require_subcommand(1);
  auto *run = fuzz->add_subcommand("run", "Run a campaign and print its JSON report");
  run->add_option("--scenario", fo.scenario, "Cluster scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--app", fo.app, "Target app")->required();
  run->add_option("--budget", fo.budget, "Iterations, or a duration such as 30s/5m/2h");
  run->add_option("--mode", fo.mode)->check(CLI::IsMember({"sequential", "pipeline"}));
  run->add_option("--strategy", fo.strategy)->check(CLI::IsMember({"weighted", "round_robin"}));
  run->add_option("--seed", fo.seed, "RNG seed (overrides the scenario)");
  run->add_option("--store", fo.store, "Seed store directory (loaded and saved)");
  run->add_option("--out", fo.out, "Write the report here instead of stdout");
  run->add_option("--control-file", fo.control_file, "Switch control file (default <store>/control)");
  run->add_option("--t1", fo.t1, "Discovery-rate threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("--t2", fo.t2, "Residual-coverage threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("--m-star", fo.m_star, "Extrapolation horizon (0 = n)");
  run->add_option("--n-min", fo.n_min, "Executions before the switch may stop");
  run->add_option("--refresh-hours", fo.refresh_h)->check(CLI::PositiveNumber);
  run->add_option("--cleanup-hours", fo.cleanup_h)->check(CLI::PositiveNumber);
  run->add_option("--ttl-days", fo.ttl_days)->check(CLI::PositiveNumber);
  run->add_option("--queue-depth", fo.queue_depth)->check(CLI::Range(size_t{1}, size_t{1} << 20));
  run->add_option("--epoch", fo.epoch, "Items issued between boundaries")->check(CLI::Range(size_t{1}, size_t{1} << 20));
  run->add_option("--collect-workers", fo.collect_workers)->check(CLI::Range(size_t{1}, size_t{64}));
  run->add_option("--step-budget", fo.step_budget)->check(CLI::PositiveNumber);
  run->add_option("--stats-every", fo.stats_every, "Stats snapshot every k executions");
  run->add_option("--latency-ms", fo.latency, "Injected per-stage delay: select mutate execute collect analyze")
      ->expected(kStageCount);
  run->add_flag("--no-switch", fo.no_switch, "Never stop on saturation");
  run->add_flag("--no-triggers", fo.no_triggers, "Disable refresh/cleanup timers");
  run->add_flag("--measure", fo.measure, "Add wall-clock stage timings to the report");
  run->callback([&] { code = CmdFuzzRun(fo, out, interrupted); });

  // replay
  std::string r_scenario, r_store, r_seed_id, r_out;
  std::optional<uint64_t> r_seed;
  bool r_real = false, r_events = false;
  auto *replay = app.add_subcommand("replay", "Execute one stored seed with its mocks");
  replay->add_option("--scenario", r_scenario)->required()->check(CLI::ExistingFile);
  replay->add_option("--store", r_store)->required()->check(CLI::ExistingDirectory);
  replay->add_option("--seed-id", r_seed_id)->required();
  replay->add_option("--seed", r_seed);
  replay->add_option("--out", r_out);
  replay->add_flag("--real", r_real, "Use real dependencies instead of the recorded mocks");
  replay->add_flag("--apply-events", r_events, "Apply the scenario's redeployments first");
  replay->callback([&] {
    const Scenario scenario = LoadScenarioFile(r_scenario);
    auto cluster = BuildCluster(scenario, r_seed);
    if (r_events) ApplyEvents(*cluster, scenario);
    auto store = SeedStore::Load(r_store);
    auto seed = store->Get(r_seed_id);
    if (!seed) throw ValidationError("no seed \"" + r_seed_id + "\"");
    SeedRun run = r_real ? RecordRun(*cluster, *seed)
                         : ReplayRun(*cluster, *seed, store->Mocks(r_seed_id).value_or(MockSet{}));
    Emit({{"seed_id", r_seed_id},
          {"mode", r_real ? "real" : "replay"},
          {"outcome", OutcomeToJson(run.outcome)},
          {"recorded_digest", DigestHex(seed->cover_digest)},
          {"digest", DigestHex(run.trace.cover_digest)},
          {"consistency", ConsistencyToJson(run.consistency)},
          {"trace", TraceToJson(run.trace)}},
         r_out, out);
  });

  // seedstore
  std::string s_store, s_app, s_scenario;
  std::vector<std::string> s_ids;
  std::optional<uint64_t> s_seed;
  bool s_events = false;
  auto *ss = app.add_subcommand("seedstore", "Inspect and maintain a seed store");
  ss->require_subcommand(1);
  auto *ls = ss->add_subcommand("ls", "List stored seeds");
  ls->add_option("--store", s_store)->required()->check(CLI::ExistingDirectory);
  ls->add_option("--app", s_app);
  ls->callback([&] {
    auto store = SeedStore::Load(s_store);
    for (const Seed &s : s_app.empty() ? store->AllSeeds() : store->Seeds(s_app)) {
      out << s.seed_id << "  " << s.app << ":" << s.handler << "  " << DigestHex(s.cover_digest)
          << "  " << SeedOriginName(s.origin) << "  v" << s.app_version_id << "  t="
          << s.created_at << "\n";
    }
  });
  auto *rm = ss->add_subcommand("rm", "Remove seeds");
  rm->add_option("--store", s_store)->required()->check(CLI::ExistingDirectory);
  rm->add_option("--seed-id", s_ids)->required();
  rm->callback([&] {
    auto store = SeedStore::Load(s_store);
    for (const auto &id : s_ids) {
      if (!store->Remove(id)) throw ValidationError("no seed \"" + id + "\"");
    }
    store->Save(s_store);
    out << "removed " << s_ids.size() << " seed(s)\n";
  });
  auto *refresh = ss->add_subcommand("refresh", "Re-record every seed of an app with real calls");
  refresh->add_option("--store", s_store)->required()->check(CLI::ExistingDirectory);
  refresh->add_option("--app", s_app)->required();
  refresh->add_option("--scenario", s_scenario)->required()->check(CLI::ExistingFile);
  refresh->add_option("--seed", s_seed);
  refresh->add_flag("--apply-events", s_events, "Apply the scenario's redeployments first");
  refresh->callback([&] {
    const Scenario scenario = LoadScenarioFile(s_scenario);
    auto cluster = BuildCluster(scenario, s_seed);
    if (s_events) ApplyEvents(*cluster, scenario);
    auto store = SeedStore::Load(s_store);
    RefreshReport report = store->RefreshAll(*cluster, s_app);
    store->Save(s_store);
    out << RefreshReportToJson(report).dump(2) << "\n";
  });

  // iterate
  std::string i_old, i_new, i_app, i_out, i_store, i_mode = "sequential";
  uint64_t i_budget = 1000;
  std::optional<uint64_t> i_seed;
  auto *iterate = app.add_subcommand("iterate", "Regression selection and directed fuzzing across versions");
  iterate->add_option("--old", i_old)->required()->check(CLI::ExistingFile);
  iterate->add_option("--new", i_new)->required()->check(CLI::ExistingFile);
  iterate->add_option("--budget", i_budget);
  iterate->add_option("--app", i_app, "Target app (default: first corpus entry)");
  iterate->add_option("--seed", i_seed);
  iterate->add_option("--store", i_store, "Seed store recorded on the old version");
  iterate->add_option("--mode", i_mode)->check(CLI::IsMember({"sequential", "pipeline"}));
  iterate->add_option("--out", i_out);
  iterate->callback([&] {
    const Scenario old_s = LoadScenarioFile(i_old);
    const Scenario new_s = LoadScenarioFile(i_new);
    auto cluster = BuildCluster(old_s, i_seed);
    auto store = OpenStore(i_store);
    if (store->size() == 0) AdmitCorpus(*cluster, *store, old_s.corpus);
    IterationConfig ic;
    ic.target_app = !i_app.empty()              ? i_app
                    : !old_s.corpus.empty()     ? old_s.corpus.front().app
                    : !old_s.apps.empty()       ? old_s.apps.front().app_id
                                                : "";
    ic.budget = i_budget;
    ic.rng_seed = i_seed.value_or(old_s.seed);
    ic.mode = i_mode == "pipeline" ? CampaignMode::kPipeline : CampaignMode::kSequential;
    IterationReport report = RunIterationTest(*cluster, *store, old_s.apps, new_s.apps, ic);
    Emit(report.ToJson(), i_out, out);
    bool sys = report.campaign.has_sys_vul();
    for (const auto &d : report.deltas) sys = sys || (d.crash && IsSysVul(*d.crash));
    code = sys ? kExitFindings : kExitOk;
  });

  // taint verify
  std::string t_scenario, t_candidates, t_store, t_out;
  size_t t_k = 100;
  std::optional<uint64_t> t_seed;
  auto *taint = app.add_subcommand("taint", "Taint relation checks");
  taint->require_subcommand(1);
  auto *verify = taint->add_subcommand("verify", "Verify <source, sink> candidates by mutation");
  verify->add_option("--scenario", t_scenario)->required()->check(CLI::ExistingFile);
  verify->add_option("--candidates", t_candidates)->required()->check(CLI::ExistingFile);
  verify->add_option("-k", t_k, "Mutants per candidate")->check(CLI::Range(size_t{1}, size_t{1} << 24));
  verify->add_option("--store", t_store);
  verify->add_option("--seed", t_seed);
  verify->add_option("--out", t_out);
  verify->callback([&] {
    const Scenario scenario = LoadScenarioFile(t_scenario);
    auto cluster = BuildCluster(scenario, t_seed);
    auto store = OpenStore(t_store);
    if (store->size() == 0) AdmitCorpus(*cluster, *store, scenario.corpus);
    json results = json::array();
    for (const auto &c : TaintCandidatesFromJson(ReadJsonFile(t_candidates))) {
      json entry = {{"app", c.app}, {"handler", c.handler}, {"param_index", c.param_index},
                    {"sink_id", c.sink_id}};
      try {
        entry["result"] = VerifyTaint(*cluster, *store, c, t_k, t_seed.value_or(scenario.seed)).ToJson();
      } catch (const NoReachingSeed &e) {
        entry["result"] = {{"verdict", "uncertain"}, {"error", e.what()}};
      }
      results.push_back(std::move(entry));
    }
    Emit(results, t_out, out);
  });

  // report
  std::string rep_in;
  auto *rep = app.add_subcommand("report", "Render a JSON report as text");
  rep->add_option("file", rep_in, "Campaign or iteration report")->required()->check(CLI::ExistingFile);
  rep->callback([&] { out << RenderReport(ReadJsonFile(rep_in)); });

  // switch on|off
  std::string sw_state, sw_store, sw_file;
  auto *sw = app.add_subcommand("switch", "Turn a running or future campaign on or off");
  sw->add_option("state", sw_state)->required()->check(CLI::IsMember({"on", "off"}));
  auto *sw_store_opt = sw->add_option("--store", sw_store, "Store whose control file to write");
  sw->add_option("--control-file", sw_file)->excludes(sw_store_opt);
  sw->callback([&] {
    fs::path path = !sw_file.empty() ? fs::path(sw_file) : fs::path(sw_store) / "control";
    if (sw_file.empty() && sw_store.empty()) throw CLI::RequiredError("--store or --control-file");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw StoreIoError("cannot write " + path.string());
    f << sw_state << "\n";
    out << "switch " << sw_state << " -> " << path.string() << "\n";
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return code;
}

}  // namespace meshfuzz
