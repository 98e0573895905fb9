// Copyright 2026 The evmpc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evmpc/experiments.hpp"
#include "json.hpp"

using namespace evmpc;
namespace fs = std::filesystem;

namespace {

Config small_config() {
  Config c = parse_config("");
  c.sim.n_chargers = 3;
  c.sim.n_evs = 6;
  c.sim.sim_steps = 48;
  c.sim.horizon_steps = 4;
  c.controller.node_limit = 40;
  return c;
}

ControllerConfig controller_for(const Config& c, ControllerKind kind) {
  ControllerConfig cc = controller_config(c);
  cc.kind = kind;
  return cc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("single runs are deterministic down to the artifact bytes") {
  const Config c = small_config();
  const Scenario sc = build_scenario(c, 5);
  const auto cc = controller_for(c, ControllerKind::EmpcV2g);
  const RunResult a = run_single(sc, cc, 5);
  const RunResult b = run_single(sc, cc, 5);
  const auto da = fresh_dir("evmpc_single_a");
  const auto db = fresh_dir("evmpc_single_b");
  const auto fa = write_single_artifacts(da, sc, a, false);
  const auto fb = write_single_artifacts(db, sc, b, false);
  REQUIRE(fa.size() == 4);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fs::exists(fa[i]));
    CHECK(slurp(fa[i]) == slurp(fb[i]));
  }
  CHECK(a.steps_run == c.sim.sim_steps);
  CHECK_FALSE(a.capped);
}

TEST_CASE("trace CSV carries one row per charger and step") {
  const Config c = small_config();
  const Scenario sc = build_scenario(c, 1);
  const RunResult r = run_single(sc, controller_for(c, ControllerKind::Afap), 1);
  std::ostringstream out;
  write_trace_csv(out, sc, r.trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "step,charger_id,ev_id,soc,p_charge_kw,p_discharge_kw,transformer_id,net_kw,limit_kw,"
        "overload,price_charge,price_discharge,cash_eur");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == c.sim.sim_steps * c.sim.n_chargers);
}

TEST_CASE("timing fields stay empty unless requested") {
  const Config c = small_config();
  const Scenario sc = build_scenario(c, 2);
  const RunResult r = run_single(sc, controller_for(c, ControllerKind::EmpcG2v), 2);
  std::ostringstream off, on;
  write_log_csv(off, r.trace.log, false);
  write_log_csv(on, r.trace.log, true);
  std::istringstream in(off.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "step,status,objective,nodes,solve_ms,slack_used,total_flex_kw");
  std::getline(in, row);
  CHECK(row.find(",,") != std::string::npos);
  CHECK(off.str() != on.str());

  const auto j = nlohmann::json::parse(run_summary_json(r.stats, false));
  CHECK(j["mean_solve_ms"].is_null());
  CHECK(j["profit_eur"].is_number());
  CHECK(nlohmann::json::parse(run_summary_json(r.stats, true))["mean_solve_ms"].is_number());
}

TEST_CASE("batches pair seeds across controllers and are worker-count invariant") {
  BatchSpec spec;
  spec.config = small_config();
  spec.controllers = {ControllerKind::Afap, ControllerKind::EmpcG2v};
  spec.seeds = {0, 1, 2};
  spec.workers = 1;
  const BatchResult one = run_batch(spec);
  spec.workers = 3;
  const BatchResult three = run_batch(spec);
  REQUIRE(one.cells.size() == 6);
  CHECK(one.cells[0].kind == ControllerKind::Afap);
  CHECK(one.cells[1].kind == ControllerKind::EmpcG2v);
  CHECK(one.cells[1].seed == 0);
  CHECK(one.cells[2].seed == 1);
  REQUIRE(one.per_controller.size() == 2);
  CHECK(one.per_controller[0].n == 3);
  std::ostringstream a, b;
  write_runs_csv(a, one, false);
  write_runs_csv(b, three, false);
  CHECK(a.str() == b.str());
  std::ostringstream t;
  write_batch_csv(t, one, false);
  CHECK(t.str().rfind("algorithm,n,std_undefined,profit_eur_mean,profit_eur_std", 0) == 0);

  const auto d1 = fresh_dir("evmpc_batch_a");
  const auto d2 = fresh_dir("evmpc_batch_b");
  const auto f1 = write_batch_artifacts(d1, one, false);
  const auto f2 = write_batch_artifacts(d2, three, false);
  for (std::size_t i = 0; i < f1.size(); ++i) CHECK(slurp(f1[i]) == slurp(f2[i]));
}

TEST_CASE("an empty seed list or controller list is rejected") {
  BatchSpec spec;
  spec.config = small_config();
  CHECK_THROWS(run_batch(spec));
  spec.seeds = {0};
  spec.controllers.clear();
  CHECK_THROWS(run_batch(spec));
}

TEST_CASE("m-sweep leaves G2V runs untouched and validates m") {
  BatchSpec spec;
  spec.config = small_config();
  spec.controllers = {ControllerKind::Afap, ControllerKind::EmpcG2v, ControllerKind::EmpcV2g};
  spec.seeds = {3, 4};
  const SweepResult r = run_m_sweep(spec, {0.8, 1.2});
  REQUIRE(r.batches.size() == 2);
  for (std::size_t i = 0; i < r.batches[0].cells.size(); ++i) {
    const auto& a = r.batches[0].cells[i];
    const auto& b = r.batches[1].cells[i];
    if (is_v2g(a.kind)) continue;
    CHECK(a.stats.profit_eur == b.stats.profit_eur);
    CHECK(a.stats.energy_charged_kwh == b.stats.energy_charged_kwh);
  }
  const auto d = fresh_dir("evmpc_sweep");
  write_sweep_artifacts(d, r, false);
  CHECK(fs::exists(d / "sweep_profits.csv"));
  CHECK(fs::exists(d / "m_0.8" / "batch.csv"));
  CHECK_THROWS_AS(run_m_sweep(spec, {0.0}), ConfigError);
  CHECK_THROWS_AS(run_m_sweep(spec, {2.5}), ConfigError);
}

TEST_CASE("bench covers every controller, EVSE count and horizon") {
  BenchSpec spec;
  spec.config = small_config();
  spec.controllers = {ControllerKind::Afap, ControllerKind::EmpcV2g};
  spec.config.sim.sim_steps = 96;
  spec.evse_counts = {2, 4};
  spec.horizons = {2, 3};
  const auto cells = run_bench(spec);
  REQUIRE(cells.size() == 8);
  for (const auto& c : cells) {
    CHECK_MESSAGE(c.error.empty(), c.error);
    CHECK(c.steps_timed > 0);
    CHECK(c.mean_step_ms >= 0.0);
    CHECK(c.max_step_ms >= c.mean_step_ms);
  }
  std::ostringstream out;
  write_bench_csv(out, cells);
  CHECK(out.str().find("empc_v2g") != std::string::npos);
}

TEST_CASE("run summary JSON carries every RunStats field") {
  const Config c = small_config();
  const Scenario sc = build_scenario(c, 0);
  const RunResult r = run_single(sc, controller_for(c, ControllerKind::EmpcV2g), 0);
  const auto j = nlohmann::json::parse(run_summary_json(r.stats, true));
  for (const char* key :
       {"controller", "seed", "discharge_multiplier", "profit_eur", "energy_charged_kwh",
        "energy_discharged_kwh", "sum_q_lost", "sum_d_cal", "sum_d_cyc", "overload_steps",
        "departures", "departure_misses", "dr_steps", "dr_violations", "flex_offered_kwh",
        "slack_steps", "fallback_steps", "solves", "total_nodes", "mean_solve_ms", "max_solve_ms"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["overload_steps"].is_number_integer());
  CHECK(j["controller"] == "empc_v2g");
  CHECK(r.stats.solves > 0);
}

TEST_CASE("afap needs no solves and charges energy") {
  const Config c = small_config();
  const Scenario sc = build_scenario(c, 0);
  const RunResult r = run_single(sc, controller_for(c, ControllerKind::Afap), 0);
  CHECK(r.stats.solves == 0);
  CHECK(r.stats.energy_charged_kwh > 0.0);
}

TEST_CASE("with a zero discharge price eMPC V2G never discharges") {
  Config c = small_config();
  c.sim.discharge_multiplier = 0.0;
  for (std::uint64_t seed : {6, 7}) {
    const Scenario sc = build_scenario(c, seed);
    const RunResult r = run_single(sc, controller_for(c, ControllerKind::EmpcV2g), seed);
    CHECK(r.stats.energy_discharged_kwh == 0.0);
  }
}
