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

#include "evmpc/evmpc.h"

#include <cmath>
#include <filesystem>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "evmpc/experiments.hpp"

struct evmpc_config {
  evmpc::Config config;
};

struct evmpc_run {
  evmpc::Scenario scenario;
  evmpc::RunResult result;
  bool timing = false;
};

struct evmpc_batch {
  evmpc::BatchResult result;
  std::vector<evmpc::ControllerKind> controllers;
  bool timing = false;
};

struct evmpc_sweep {
  evmpc::SweepResult result;
  std::vector<evmpc_batch> batches;
  bool timing = false;
};

struct evmpc_bench {
  std::vector<evmpc::BenchCell> cells;
};

namespace {

thread_local std::string last_error;

evmpc_status fail(evmpc_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <typename F>
evmpc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return EVMPC_OK;
  } catch (const evmpc::ConfigError& e) {
    return fail(EVMPC_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(EVMPC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(EVMPC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EVMPC_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(EVMPC_ERR_RUNTIME, e.what());
  }
}

bool valid_kind(int k) { return k >= EVMPC_AFAP && k <= EVMPC_OCMF_V2G; }

evmpc::ControllerKind to_kind(evmpc_controller c) {
  if (!valid_kind(c)) throw std::invalid_argument("unknown controller id " + std::to_string(c));
  return static_cast<evmpc::ControllerKind>(c);
}

std::vector<evmpc::ControllerKind> to_kinds(const evmpc_controller* list, size_t n) {
  if (list == nullptr) return evmpc::all_controllers();
  if (n == 0) throw std::invalid_argument("controller list is empty");
  std::vector<evmpc::ControllerKind> out;
  for (size_t i = 0; i < n; ++i) out.push_back(to_kind(list[i]));
  return out;
}

std::vector<std::uint64_t> seed_range(uint64_t first, uint64_t last) {
  if (last < first) throw std::invalid_argument("seed range is empty");
  std::vector<std::uint64_t> seeds;
  for (uint64_t s = first;; ++s) {
    seeds.push_back(s);
    if (s == last) break;
  }
  return seeds;
}

void fill_stats(const evmpc::RunStats& s, evmpc::ControllerKind kind, bool failed, evmpc_run_stats* out) {
  *out = evmpc_run_stats{};
  out->controller = static_cast<int>(kind);
  out->seed = s.seed;
  out->discharge_multiplier = s.discharge_multiplier;
  out->profit_eur = s.profit_eur;
  out->energy_charged_kwh = s.energy_charged_kwh;
  out->energy_discharged_kwh = s.energy_discharged_kwh;
  out->sum_q_lost = s.sum_q_lost;
  out->sum_d_cal = s.sum_d_cal;
  out->sum_d_cyc = s.sum_d_cyc;
  out->overload_steps = s.overload_steps;
  out->departures = s.departures;
  out->departure_misses = s.departure_misses;
  out->dr_steps = s.dr_steps;
  out->dr_violations = s.dr_violations;
  out->flex_offered_kwh = s.flex_offered_kwh;
  out->solves = s.solves;
  out->slack_steps = s.slack_steps;
  out->fallback_steps = s.fallback_steps;
  out->total_nodes = s.total_nodes;
  out->mean_solve_ms = s.mean_solve_ms;
  out->max_solve_ms = s.max_solve_ms;
  out->failed = failed ? 1 : 0;
}

template <typename T>
void require_ptr(const T* p, const char* name) {
  if (p == nullptr) throw std::invalid_argument(std::string(name) + " is NULL");
}

evmpc::BatchSpec batch_spec(const evmpc_config* config, const evmpc_controller* controllers,
                            size_t n_controllers, uint64_t first_seed, uint64_t last_seed,
                            int workers, int timing) {
  require_ptr(config, "config");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  evmpc::BatchSpec spec;
  spec.config = config->config;
  spec.controllers = to_kinds(controllers, n_controllers);
  spec.seeds = seed_range(first_seed, last_seed);
  spec.workers = workers;
  spec.options.timing = timing != 0;
  return spec;
}

}  // namespace

extern "C" {

const char* evmpc_version(void) { return "0.1.0"; }

const char* evmpc_status_string(evmpc_status status) {
  switch (status) {
    case EVMPC_OK:
      return "ok";
    case EVMPC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case EVMPC_ERR_CONFIG:
      return "configuration error";
    case EVMPC_ERR_IO:
      return "i/o error";
    case EVMPC_ERR_RUNTIME:
      return "runtime error";
  }
  return "unknown status";
}

const char* evmpc_last_error(void) { return last_error.c_str(); }

evmpc_status evmpc_controller_from_name(const char* name, evmpc_controller* out) {
  return guarded([&] {
    require_ptr(name, "name");
    require_ptr(out, "out");
    *out = static_cast<evmpc_controller>(evmpc::parse_controller_kind(name));
  });
}

const char* evmpc_controller_name(evmpc_controller controller) {
  static const char* const names[] = {"afap", "empc_g2v", "empc_v2g", "ocmf_g2v", "ocmf_v2g"};
  return valid_kind(controller) ? names[controller] : "";
}

size_t evmpc_metric_count(void) { return evmpc::metric_values(evmpc::RunStats{}).size(); }

const char* evmpc_metric_name(size_t index) {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& m : evmpc::metric_values(evmpc::RunStats{})) v.push_back(m.first);
    return v;
  }();
  return index < names.size() ? names[index].c_str() : "";
}

evmpc_status evmpc_config_load(const char* path, evmpc_config** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = nullptr;
    auto c = std::make_unique<evmpc_config>();
    c->config = (path == nullptr || *path == '\0') ? evmpc::parse_config("") : evmpc::load_config(path);
    *out = c.release();
  });
}

evmpc_status evmpc_config_parse(const char* yaml_text, evmpc_config** out) {
  return guarded([&] {
    require_ptr(yaml_text, "yaml_text");
    require_ptr(out, "out");
    *out = nullptr;
    auto c = std::make_unique<evmpc_config>();
    c->config = evmpc::parse_config(yaml_text);
    *out = c.release();
  });
}

void evmpc_config_free(evmpc_config* config) { delete config; }

evmpc_status evmpc_config_set_controller(evmpc_config* config, evmpc_controller controller) {
  return guarded([&] {
    require_ptr(config, "config");
    config->config.controller.kind = to_kind(controller);
  });
}

evmpc_status evmpc_config_set_horizon(evmpc_config* config, int steps) {
  return guarded([&] {
    require_ptr(config, "config");
    evmpc::Config c = config->config;
    c.sim.horizon_steps = steps;
    evmpc::validate(c);
    config->config = c;
  });
}

evmpc_status evmpc_config_set_discharge_multiplier(evmpc_config* config, double m) {
  return guarded([&] {
    require_ptr(config, "config");
    evmpc::Config c = config->config;
    c.sim.discharge_multiplier = m;
    evmpc::validate(c);
    config->config = c;
  });
}

evmpc_status evmpc_config_set_chargers(evmpc_config* config, int chargers) {
  return guarded([&] {
    require_ptr(config, "config");
    evmpc::Config c = config->config;
    c.sim.n_chargers = chargers;
    c.sim.n_evs = static_cast<int>(std::lround(2.5 * chargers));
    evmpc::validate(c);
    config->config = c;
  });
}

evmpc_status evmpc_config_set_node_limit(evmpc_config* config, long nodes) {
  return guarded([&] {
    require_ptr(config, "config");
    evmpc::Config c = config->config;
    c.controller.node_limit = nodes;
    evmpc::validate(c);
    config->config = c;
  });
}

evmpc_status evmpc_run_single(const evmpc_config* config, uint64_t seed, int timing, evmpc_run** out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(out, "out");
    *out = nullptr;
    auto r = std::make_unique<evmpc_run>();
    r->scenario = evmpc::build_scenario(config->config, seed);
    evmpc::RunOptions opts;
    opts.timing = timing != 0;
    r->timing = opts.timing;
    r->result = evmpc::run_single(r->scenario, evmpc::controller_config(config->config), seed, opts);
    *out = r.release();
  });
}

evmpc_status evmpc_run_get_stats(const evmpc_run* run, evmpc_run_stats* out) {
  return guarded([&] {
    require_ptr(run, "run");
    require_ptr(out, "out");
    fill_stats(run->result.stats, evmpc::parse_controller_kind(run->result.stats.controller), false, out);
  });
}

evmpc_status evmpc_run_write(const evmpc_run* run, const char* dir) {
  return guarded([&] {
    require_ptr(run, "run");
    require_ptr(dir, "dir");
    evmpc::write_single_artifacts(dir, run->scenario, run->result, run->timing);
  });
}

void evmpc_run_free(evmpc_run* run) { delete run; }

evmpc_status evmpc_batch_run(const evmpc_config* config, const evmpc_controller* controllers,
                             size_t n_controllers, uint64_t first_seed, uint64_t last_seed, int workers,
                             int timing, evmpc_batch** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = nullptr;
    const auto spec =
        batch_spec(config, controllers, n_controllers, first_seed, last_seed, workers, timing);
    auto b = std::make_unique<evmpc_batch>();
    b->result = evmpc::run_batch(spec);
    b->controllers = spec.controllers;
    b->timing = spec.options.timing;
    *out = b.release();
  });
}

size_t evmpc_batch_cell_count(const evmpc_batch* batch) {
  return batch == nullptr ? 0 : batch->result.cells.size();
}

evmpc_status evmpc_batch_cell(const evmpc_batch* batch, size_t index, evmpc_run_stats* out) {
  return guarded([&] {
    require_ptr(batch, "batch");
    require_ptr(out, "out");
    if (index >= batch->result.cells.size()) throw std::invalid_argument("cell index out of range");
    const auto& cell = batch->result.cells[index];
    fill_stats(cell.stats, cell.kind, !cell.error.empty(), out);
    out->seed = cell.seed;
  });
}

const char* evmpc_batch_cell_error(const evmpc_batch* batch, size_t index) {
  if (batch == nullptr || index >= batch->result.cells.size()) return "";
  return batch->result.cells[index].error.c_str();
}

evmpc_status evmpc_batch_metric(const evmpc_batch* batch, evmpc_controller controller,
                                const char* metric, double* mean, double* std, int* n) {
  return guarded([&] {
    require_ptr(batch, "batch");
    require_ptr(metric, "metric");
    const auto kind = to_kind(controller);
    for (std::size_t c = 0; c < batch->controllers.size(); ++c) {
      if (batch->controllers[c] != kind) continue;
      const auto& stats = batch->result.per_controller[c];
      if (n != nullptr) *n = stats.n;
      if (stats.n == 0) throw std::runtime_error("no successful runs for " + evmpc::to_string(kind));
      const auto& m = stats.metric(metric);
      if (mean != nullptr) *mean = m.mean;
      if (std != nullptr) *std = m.std;
      return;
    }
    throw std::invalid_argument("controller not part of this batch: " + evmpc::to_string(kind));
  });
}

evmpc_status evmpc_batch_write(const evmpc_batch* batch, const char* dir) {
  return guarded([&] {
    require_ptr(batch, "batch");
    require_ptr(dir, "dir");
    evmpc::write_batch_artifacts(dir, batch->result, batch->timing);
  });
}

void evmpc_batch_free(evmpc_batch* batch) { delete batch; }

evmpc_status evmpc_sweep_run(const evmpc_config* config, const evmpc_controller* controllers,
                             size_t n_controllers, uint64_t first_seed, uint64_t last_seed,
                             const double* m_values, size_t n_m, int workers, int timing,
                             evmpc_sweep** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = nullptr;
    const auto spec =
        batch_spec(config, controllers, n_controllers, first_seed, last_seed, workers, timing);
    std::vector<double> ms = evmpc::default_m_values();
    if (m_values != nullptr) {
      if (n_m == 0) throw std::invalid_argument("m list is empty");
      ms.assign(m_values, m_values + n_m);
    }
    auto s = std::make_unique<evmpc_sweep>();
    s->result = evmpc::run_m_sweep(spec, ms);
    s->timing = spec.options.timing;
    for (const auto& b : s->result.batches) {
      evmpc_batch view;
      view.result = b;
      view.controllers = spec.controllers;
      view.timing = s->timing;
      s->batches.push_back(std::move(view));
    }
    *out = s.release();
  });
}

size_t evmpc_sweep_size(const evmpc_sweep* sweep) {
  return sweep == nullptr ? 0 : sweep->result.m_values.size();
}

double evmpc_sweep_m(const evmpc_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->result.m_values.size()) return 0.0;
  return sweep->result.m_values[index];
}

const evmpc_batch* evmpc_sweep_batch(const evmpc_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->batches.size()) return nullptr;
  return &sweep->batches[index];
}

evmpc_status evmpc_sweep_write(const evmpc_sweep* sweep, const char* dir) {
  return guarded([&] {
    require_ptr(sweep, "sweep");
    require_ptr(dir, "dir");
    evmpc::write_sweep_artifacts(dir, sweep->result, sweep->timing);
  });
}

void evmpc_sweep_free(evmpc_sweep* sweep) { delete sweep; }

evmpc_status evmpc_bench_run(const evmpc_config* config, const evmpc_controller* controllers,
                             size_t n_controllers, const int* evse_counts, size_t n_evse,
                             const int* horizons, size_t n_horizons, uint64_t seed,
                             double cell_time_cap_s, int workers, evmpc_bench** out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(out, "out");
    *out = nullptr;
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (!(cell_time_cap_s > 0.0)) throw std::invalid_argument("cell time cap must be > 0");
    evmpc::BenchSpec spec;
    spec.config = config->config;
    spec.controllers = to_kinds(controllers, n_controllers);
    spec.evse_counts = evmpc::default_evse_counts();
    if (evse_counts != nullptr) spec.evse_counts.assign(evse_counts, evse_counts + n_evse);
    if (horizons != nullptr) spec.horizons.assign(horizons, horizons + n_horizons);
    if (spec.evse_counts.empty() || spec.horizons.empty()) {
      throw std::invalid_argument("bench needs at least one EVSE count and one horizon");
    }
    spec.seed = seed;
    spec.cell_time_cap_s = cell_time_cap_s;
    spec.workers = workers;
    auto b = std::make_unique<evmpc_bench>();
    b->cells = evmpc::run_bench(spec);
    *out = b.release();
  });
}

size_t evmpc_bench_cell_count(const evmpc_bench* bench) {
  return bench == nullptr ? 0 : bench->cells.size();
}

evmpc_status evmpc_bench_get_cell(const evmpc_bench* bench, size_t index, evmpc_bench_cell* out) {
  return guarded([&] {
    require_ptr(bench, "bench");
    require_ptr(out, "out");
    if (index >= bench->cells.size()) throw std::invalid_argument("cell index out of range");
    const auto& c = bench->cells[index];
    out->controller = static_cast<int>(c.kind);
    out->evse = c.evse;
    out->horizon = c.horizon;
    out->steps_timed = c.steps_timed;
    out->mean_step_ms = c.mean_step_ms;
    out->max_step_ms = c.max_step_ms;
    out->capped = c.capped ? 1 : 0;
    out->failed = c.error.empty() ? 0 : 1;
  });
}

evmpc_status evmpc_bench_write(const evmpc_bench* bench, const char* dir) {
  return guarded([&] {
    require_ptr(bench, "bench");
    require_ptr(dir, "dir");
    evmpc::write_bench_artifacts(dir, bench->cells);
  });
}

void evmpc_bench_free(evmpc_bench* bench) { delete bench; }

}  // extern "C"
