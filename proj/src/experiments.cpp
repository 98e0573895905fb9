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

#include "evmpc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace evmpc {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Runs task(0..n-1) on a fixed-size pool; results are written by index so the
// outcome does not depend on the worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& task) {
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

bool is_timing_metric(const std::string& name) {
  return name == "mean_solve_ms" || name == "max_solve_ms";
}

Json stats_json(const RunStats& s, bool timing) {
  Json j;
  j["controller"] = s.controller;
  j["seed"] = s.seed;
  j["discharge_multiplier"] = s.discharge_multiplier;
  j["profit_eur"] = s.profit_eur;
  j["energy_charged_kwh"] = s.energy_charged_kwh;
  j["energy_discharged_kwh"] = s.energy_discharged_kwh;
  j["sum_q_lost"] = s.sum_q_lost;
  j["sum_d_cal"] = s.sum_d_cal;
  j["sum_d_cyc"] = s.sum_d_cyc;
  j["overload_steps"] = s.overload_steps;
  j["departures"] = s.departures;
  j["departure_misses"] = s.departure_misses;
  j["dr_steps"] = s.dr_steps;
  j["dr_violations"] = s.dr_violations;
  j["flex_offered_kwh"] = s.flex_offered_kwh;
  j["slack_steps"] = s.slack_steps;
  j["fallback_steps"] = s.fallback_steps;
  j["solves"] = s.solves;
  j["total_nodes"] = s.total_nodes;
  j["mean_solve_ms"] = timing ? Json(s.mean_solve_ms) : Json(nullptr);
  j["max_solve_ms"] = timing ? Json(s.max_solve_ms) : Json(nullptr);
  return j;
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::function<void(std::ostream&)>& body) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

}  // namespace

std::vector<ControllerKind> all_controllers() {
  return {ControllerKind::Afap, ControllerKind::OcmfG2v, ControllerKind::OcmfV2g,
          ControllerKind::EmpcG2v, ControllerKind::EmpcV2g};
}

std::vector<double> default_m_values() { return {0.8, 0.9, 1.0, 1.1, 1.2}; }

std::vector<int> default_evse_counts() {
  std::vector<int> v;
  for (int n = 5; n <= 60; n += 5) v.push_back(n);
  return v;
}

RunResult run_single(const Scenario& scenario, const ControllerConfig& controller,
                     std::uint64_t seed, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  Environment env(scenario, seed, controller.horizon);
  Controller ctl(controller);
  while (!env.done()) {
    const ActionPlan plan = ctl.act(env.state(), scenario, env.forecasts());
    result.trace.steps.push_back(env.step(plan.actions));
    ++result.steps_run;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > options.time_cap_s && !env.done()) {
      result.capped = true;
      break;
    }
  }
  result.trace.log = ctl.log();
  result.trace.departures = env.departures();
  const double days = scenario.sim.sim_steps * scenario.sim.delta_t_h() / 24.0;
  result.trace.degradation = run_degradation(env.ev_traces(), scenario.sim.delta_t_h(), days);
  result.stats = summarize(scenario, result.trace);
  result.stats.controller = to_string(controller.kind);
  result.stats.seed = seed;
  return result;
}

BatchResult run_batch(const BatchSpec& spec) {
  if (spec.seeds.empty()) throw std::invalid_argument("batch: empty seed list");
  if (spec.controllers.empty()) throw std::invalid_argument("batch: no controllers");
  validate(spec.config);
  const int C = static_cast<int>(spec.controllers.size());
  const int S = static_cast<int>(spec.seeds.size());
  BatchResult result;
  result.cells.resize(static_cast<std::size_t>(C) * S);
  parallel_for(C * S, spec.workers, [&](int idx) {
    const int s = idx / C;
    const int c = idx % C;
    BatchCell& cell = result.cells[idx];
    cell.kind = spec.controllers[c];
    cell.seed = spec.seeds[s];
    cell.stats.controller = to_string(cell.kind);
    cell.stats.seed = cell.seed;
    try {
      const Scenario sc = build_scenario(spec.config, cell.seed);
      ControllerConfig cc = controller_config(spec.config);
      cc.kind = cell.kind;
      cell.stats = run_single(sc, cc, cell.seed, spec.options).stats;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  for (int c = 0; c < C; ++c) {
    std::vector<RunStats> runs;
    for (int s = 0; s < S; ++s) {
      const auto& cell = result.cells[static_cast<std::size_t>(s) * C + c];
      if (cell.error.empty()) runs.push_back(cell.stats);
    }
    if (runs.empty()) {
      BatchStats empty;
      empty.controller = to_string(spec.controllers[c]);
      result.per_controller.push_back(empty);
    } else {
      result.per_controller.push_back(batch(runs));
    }
  }
  return result;
}

SweepResult run_m_sweep(const BatchSpec& spec, const std::vector<double>& m_values) {
  SweepResult out;
  for (double m : m_values) {
    if (!(m > 0.0 && m <= 2.0)) {
      throw ConfigError("simulation.discharge_multiplier", "sweep value must be in (0, 2]");
    }
  }
  out.m_values = m_values;
  for (double m : m_values) {
    BatchSpec s = spec;
    s.config.sim.discharge_multiplier = m;
    out.batches.push_back(run_batch(s));
  }
  return out;
}

std::vector<BenchCell> run_bench(const BenchSpec& spec) {
  struct Job {
    int evse;
    int horizon;
    ControllerKind kind;
  };
  std::vector<Job> jobs;
  for (int n : spec.evse_counts) {
    for (int h : spec.horizons) {
      for (auto k : spec.controllers) jobs.push_back({n, h, k});
    }
  }
  std::vector<BenchCell> cells(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), spec.workers, [&](int idx) {
    const Job& job = jobs[idx];
    BenchCell& cell = cells[idx];
    cell.kind = job.kind;
    cell.evse = job.evse;
    cell.horizon = job.horizon;
    try {
      Config cfg = spec.config;
      cfg.sim.n_chargers = job.evse;
      cfg.sim.n_transformers = std::min(spec.transformers, job.evse);
      cfg.sim.n_evs = static_cast<int>(std::lround(2.5 * job.evse));
      cfg.sim.horizon_steps = job.horizon;
      cfg.controller.kind = job.kind;
      validate(cfg);
      const Scenario sc = build_scenario(cfg, spec.seed);
      RunOptions opts;
      opts.timing = true;
      opts.time_cap_s = spec.cell_time_cap_s;
      const RunResult r = run_single(sc, controller_config(cfg), spec.seed, opts);
      double total = 0.0;
      for (const auto& l : r.trace.log) {
        if (l.status == "idle") continue;
        ++cell.steps_timed;
        total += l.solve_ms;
        cell.max_step_ms = std::max(cell.max_step_ms, l.solve_ms);
      }
      cell.mean_step_ms = cell.steps_timed > 0 ? total / cell.steps_timed : 0.0;
      cell.capped = r.capped;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

void write_trace_csv(std::ostream& out, const Scenario& sc, const RunTrace& trace) {
  out << "step,charger_id,ev_id,soc,p_charge_kw,p_discharge_kw,transformer_id,net_kw,limit_kw,"
         "overload,price_charge,price_discharge,cash_eur\n";
  const double dt = sc.sim.delta_t_h();
  std::vector<int> transformer_of(sc.chargers.size(), 0);
  for (std::size_t g = 0; g < sc.transformers.size(); ++g) {
    for (int i : sc.transformers[g].charger_ids) transformer_of[i] = static_cast<int>(g);
  }
  for (const auto& r : trace.steps) {
    const double pic = sc.prices.charge[r.step];
    const double pid = sc.prices.discharge[r.step];
    for (std::size_t i = 0; i < r.p_charge_kw.size(); ++i) {
      const int g = transformer_of[i];
      const double cash = dt * (pid * r.p_discharge_kw[i] - pic * r.p_charge_kw[i]);
      out << r.step << ',' << i << ',' << r.ev_id[i] << ',' << num(r.soc_after[i]) << ','
          << num(r.p_charge_kw[i]) << ',' << num(r.p_discharge_kw[i]) << ',' << g << ','
          << num(r.net_kw[g]) << ',' << num(r.limit_kw[g]) << ',' << (r.overload[g] ? 1 : 0)
          << ',' << num(pic) << ',' << num(pid) << ',' << num(cash) << '\n';
    }
  }
}

void write_log_csv(std::ostream& out, const std::vector<StepLog>& log, bool timing) {
  out << "step,status,objective,nodes,solve_ms,slack_used,total_flex_kw\n";
  for (const auto& l : log) {
    out << l.step << ',' << l.status << ',' << num(l.objective) << ',' << l.nodes << ','
        << (timing ? num(l.solve_ms) : std::string()) << ',' << (l.slack_used ? 1 : 0) << ','
        << num(l.total_flex_kw) << '\n';
  }
}

void write_degradation_csv(std::ostream& out, const FleetDegradation& d) {
  out << "ev_id,d_cal,d_cyc,q_lost,energy_throughput_kwh,mean_soc\n";
  for (const auto& e : d.per_ev) {
    out << e.ev_id << ',' << num(e.d_cal) << ',' << num(e.d_cyc) << ',' << num(e.q_lost) << ','
        << num(e.energy_throughput_kwh) << ',' << num(e.mean_soc) << '\n';
  }
}

std::string run_summary_json(const RunStats& stats, bool timing) {
  return stats_json(stats, timing).dump(2) + "\n";
}

void write_runs_csv(std::ostream& out, const BatchResult& result, bool timing) {
  out << "controller,seed";
  const auto names = metric_values(RunStats{});
  for (const auto& n : names) out << ',' << n.first;
  out << ",error\n";
  for (const auto& cell : result.cells) {
    out << to_string(cell.kind) << ',' << cell.seed;
    for (const auto& [name, value] : metric_values(cell.stats)) {
      out << ',';
      if (cell.error.empty() && (timing || !is_timing_metric(name))) out << num(value);
    }
    std::string err = cell.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << err << '\n';
  }
}

void write_batch_csv(std::ostream& out, const BatchResult& result, bool timing) {
  out << "algorithm,n,std_undefined";
  const auto names = metric_values(RunStats{});
  for (const auto& n : names) out << ',' << n.first << "_mean," << n.first << "_std";
  out << '\n';
  for (const auto& b : result.per_controller) {
    out << b.controller << ',' << b.n << ',' << (b.std_undefined ? 1 : 0);
    for (const auto& n : names) {
      if (b.n == 0 || (!timing && is_timing_metric(n.first))) {
        out << ",,";
        continue;
      }
      const auto& m = b.metric(n.first);
      out << ',' << num(m.mean) << ',' << num(m.std);
    }
    out << '\n';
  }
}

std::string batch_summary_json(const BatchResult& result, bool timing) {
  Json root;
  Json runs = Json::array();
  for (const auto& cell : result.cells) {
    Json j = stats_json(cell.stats, timing);
    j["error"] = cell.error.empty() ? Json(nullptr) : Json(cell.error);
    runs.push_back(j);
  }
  root["runs"] = runs;
  Json batches = Json::array();
  for (const auto& b : result.per_controller) {
    Json j;
    j["controller"] = b.controller;
    j["n"] = b.n;
    j["std_undefined"] = b.std_undefined;
    Json metrics;
    for (const auto& m : b.metrics) {
      if (!timing && is_timing_metric(m.name)) {
        metrics[m.name] = {{"mean", nullptr}, {"std", nullptr}};
      } else {
        metrics[m.name] = {{"mean", m.mean}, {"std", m.std}};
      }
    }
    j["metrics"] = metrics;
    batches.push_back(j);
  }
  root["batch"] = batches;
  return root.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "m,controller,seed,profit_eur,energy_charged_kwh,energy_discharged_kwh\n";
  for (std::size_t k = 0; k < result.m_values.size(); ++k) {
    for (const auto& cell : result.batches[k].cells) {
      if (!cell.error.empty()) continue;
      out << num(result.m_values[k]) << ',' << to_string(cell.kind) << ',' << cell.seed << ','
          << num(cell.stats.profit_eur) << ',' << num(cell.stats.energy_charged_kwh) << ','
          << num(cell.stats.energy_discharged_kwh) << '\n';
    }
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "m,controller,n,profit_eur_mean,profit_eur_std\n";
  for (std::size_t k = 0; k < result.m_values.size(); ++k) {
    for (const auto& b : result.batches[k].per_controller) {
      out << num(result.m_values[k]) << ',' << b.controller << ',' << b.n;
      if (b.n > 0) {
        const auto& m = b.metric("profit_eur");
        out << ',' << num(m.mean) << ',' << num(m.std) << '\n';
      } else {
        out << ",,\n";
      }
    }
  }
}

void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells) {
  out << "controller,evse,horizon,steps_timed,mean_step_ms,max_step_ms,capped,error\n";
  for (const auto& c : cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << to_string(c.kind) << ',' << c.evse << ',' << c.horizon << ',' << c.steps_timed << ','
        << num(c.mean_step_ms) << ',' << num(c.max_step_ms) << ',' << (c.capped ? 1 : 0) << ','
        << err << '\n';
  }
}

std::vector<std::filesystem::path> write_single_artifacts(const std::filesystem::path& dir,
                                                          const Scenario& scenario,
                                                          const RunResult& result, bool timing) {
  return {
      write_file(dir, "trace.csv", [&](std::ostream& o) { write_trace_csv(o, scenario, result.trace); }),
      write_file(dir, "controller_log.csv",
                 [&](std::ostream& o) { write_log_csv(o, result.trace.log, timing); }),
      write_file(dir, "degradation.csv",
                 [&](std::ostream& o) { write_degradation_csv(o, result.trace.degradation); }),
      write_file(dir, "summary.json",
                 [&](std::ostream& o) { o << run_summary_json(result.stats, timing); }),
  };
}

std::vector<std::filesystem::path> write_batch_artifacts(const std::filesystem::path& dir,
                                                         const BatchResult& result, bool timing) {
  return {
      write_file(dir, "runs.csv", [&](std::ostream& o) { write_runs_csv(o, result, timing); }),
      write_file(dir, "batch.csv", [&](std::ostream& o) { write_batch_csv(o, result, timing); }),
      write_file(dir, "summary.json",
                 [&](std::ostream& o) { o << batch_summary_json(result, timing); }),
  };
}

std::vector<std::filesystem::path> write_sweep_artifacts(const std::filesystem::path& dir,
                                                         const SweepResult& result, bool timing) {
  std::vector<std::filesystem::path> files{
      write_file(dir, "sweep_profits.csv", [&](std::ostream& o) { write_sweep_csv(o, result); }),
      write_file(dir, "sweep_summary.csv",
                 [&](std::ostream& o) { write_sweep_summary_csv(o, result); }),
  };
  for (std::size_t k = 0; k < result.m_values.size(); ++k) {
    const auto sub = dir / ("m_" + num(result.m_values[k]));
    for (auto& f : write_batch_artifacts(sub, result.batches[k], timing)) files.push_back(f);
  }
  return files;
}

std::vector<std::filesystem::path> write_bench_artifacts(const std::filesystem::path& dir,
                                                         const std::vector<BenchCell>& cells) {
  return {write_file(dir, "bench.csv", [&](std::ostream& o) { write_bench_csv(o, cells); })};
}

}  // namespace evmpc
