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

#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evmpc/evmpc.h"

namespace {

struct Options {
  std::string config;
  std::string mode = "single";
  std::string controller;
  std::optional<int> horizon;
  std::string seeds;
  std::vector<double> m_values;
  std::vector<int> evse_counts;
  std::vector<int> horizons;
  std::optional<long> node_limit;
  std::optional<int> chargers;
  std::string out = "out";
  int workers = 1;
  double cell_cap_s = 120.0;
  bool timing = false;
};

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

SeedRange parse_seeds(const std::string& text, SeedRange fallback) {
  if (text.empty()) return fallback;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    const auto first = std::stoull(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const auto last = std::stoull(b, &used);
    if (used != b.size()) throw std::invalid_argument(text);
    if (last < first) throw std::invalid_argument(text);
    return {first, last};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--seeds", "expected N or A..B with A <= B, got '" + text + "'");
  }
}

int report(evmpc_status s, const char* what) {
  std::fprintf(stderr, "evmpc: %s failed: %s: %s\n", what, evmpc_status_string(s), evmpc_last_error());
  return 1;
}

// Owns one C handle and releases it with the matching free function.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using ConfigHandle = Handle<evmpc_config, evmpc_config_free>;
using RunHandle = Handle<evmpc_run, evmpc_run_free>;
using BatchHandle = Handle<evmpc_batch, evmpc_batch_free>;
using SweepHandle = Handle<evmpc_sweep, evmpc_sweep_free>;
using BenchHandle = Handle<evmpc_bench, evmpc_bench_free>;

std::vector<evmpc_controller> all_controllers() {
  return {EVMPC_AFAP, EVMPC_OCMF_G2V, EVMPC_OCMF_V2G, EVMPC_EMPC_G2V, EVMPC_EMPC_V2G};
}

void print_batch(const evmpc_batch* batch, const std::vector<evmpc_controller>& controllers) {
  std::printf("%-10s %4s %18s %16s %16s %9s %7s\n", "algorithm", "n", "profit_eur", "charged_kwh",
              "discharged_kwh", "overloads", "misses");
  for (auto c : controllers) {
    double pm = 0, ps = 0, cm = 0, cs = 0, dm = 0, ds = 0, om = 0, mm = 0;
    int n = 0;
    if (evmpc_batch_metric(batch, c, "profit_eur", &pm, &ps, &n) != EVMPC_OK) {
      std::printf("%-10s %4d (no successful runs)\n", evmpc_controller_name(c), n);
      continue;
    }
    evmpc_batch_metric(batch, c, "energy_charged_kwh", &cm, &cs, nullptr);
    evmpc_batch_metric(batch, c, "energy_discharged_kwh", &dm, &ds, nullptr);
    evmpc_batch_metric(batch, c, "overload_steps", &om, nullptr, nullptr);
    evmpc_batch_metric(batch, c, "departure_misses", &mm, nullptr, nullptr);
    std::printf("%-10s %4d %9.2f ±%7.2f %8.1f ±%6.1f %8.1f ±%6.1f %9.2f %7.2f\n",
                evmpc_controller_name(c), n, pm, ps, cm, cs, dm, ds, om, mm);
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < evmpc_batch_cell_count(batch); ++i) {
    if (*evmpc_batch_cell_error(batch, i) != '\0') ++failed;
  }
  if (failed > 0) std::printf("%zu run(s) failed; see runs.csv\n", failed);
}

int run(const Options& o, const std::vector<evmpc_controller>& controllers) {
  ConfigHandle config;
  if (auto s = evmpc_config_load(o.config.c_str(), &config.ptr); s != EVMPC_OK) {
    return report(s, "loading the configuration");
  }
  if (o.horizon) {
    if (auto s = evmpc_config_set_horizon(config.ptr, *o.horizon); s != EVMPC_OK) return report(s, "--horizon");
  }
  if (o.node_limit) {
    if (auto s = evmpc_config_set_node_limit(config.ptr, *o.node_limit); s != EVMPC_OK) {
      return report(s, "--node-limit");
    }
  }
  if (o.chargers) {
    if (auto s = evmpc_config_set_chargers(config.ptr, *o.chargers); s != EVMPC_OK) return report(s, "--chargers");
  }
  const evmpc_controller* list = controllers.empty() ? nullptr : controllers.data();
  const std::size_t n_list = controllers.size();
  const int timing = o.timing ? 1 : 0;

  if (o.mode == "single") {
    const auto seeds = parse_seeds(o.seeds, {0, 0});
    if (seeds.first != seeds.last) throw CLI::ValidationError("--seeds", "single mode takes one seed");
    if (!controllers.empty()) evmpc_config_set_controller(config.ptr, controllers.front());
    RunHandle r;
    if (auto s = evmpc_run_single(config.ptr, seeds.first, timing, &r.ptr); s != EVMPC_OK) {
      return report(s, "the run");
    }
    if (auto s = evmpc_run_write(r.ptr, o.out.c_str()); s != EVMPC_OK) return report(s, "writing artifacts");
    evmpc_run_stats st;
    evmpc_run_get_stats(r.ptr, &st);
    std::printf("controller %s seed %llu\n", evmpc_controller_name(static_cast<evmpc_controller>(st.controller)),
                static_cast<unsigned long long>(st.seed));
    std::printf("profit_eur %.4f\ncharged_kwh %.3f\ndischarged_kwh %.3f\n", st.profit_eur,
                st.energy_charged_kwh, st.energy_discharged_kwh);
    std::printf("overload_steps %d\ndeparture_misses %d/%d\nsolves %d\n", st.overload_steps,
                st.departure_misses, st.departures, st.solves);
    std::printf("artifacts in %s\n", o.out.c_str());
    return 0;
  }
  if (o.mode == "batch") {
    const auto seeds = parse_seeds(o.seeds, {0, 49});
    BatchHandle b;
    if (auto s = evmpc_batch_run(config.ptr, list, n_list, seeds.first, seeds.last, o.workers, timing, &b.ptr);
        s != EVMPC_OK) {
      return report(s, "the batch");
    }
    if (auto s = evmpc_batch_write(b.ptr, o.out.c_str()); s != EVMPC_OK) return report(s, "writing artifacts");
    print_batch(b.ptr, controllers.empty() ? all_controllers() : controllers);
    std::printf("artifacts in %s\n", o.out.c_str());
    return 0;
  }
  if (o.mode == "m-sweep") {
    const auto seeds = parse_seeds(o.seeds, {0, 49});
    SweepHandle sw;
    const double* ms = o.m_values.empty() ? nullptr : o.m_values.data();
    if (auto s = evmpc_sweep_run(config.ptr, list, n_list, seeds.first, seeds.last, ms, o.m_values.size(),
                                 o.workers, timing, &sw.ptr);
        s != EVMPC_OK) {
      return report(s, "the sweep");
    }
    if (auto s = evmpc_sweep_write(sw.ptr, o.out.c_str()); s != EVMPC_OK) return report(s, "writing artifacts");
    for (std::size_t k = 0; k < evmpc_sweep_size(sw.ptr); ++k) {
      std::printf("m = %g\n", evmpc_sweep_m(sw.ptr, k));
      print_batch(evmpc_sweep_batch(sw.ptr, k), controllers.empty() ? all_controllers() : controllers);
    }
    std::printf("artifacts in %s\n", o.out.c_str());
    return 0;
  }
  // bench
  const auto seeds = parse_seeds(o.seeds, {0, 0});
  BenchHandle bench;
  const int* evse = o.evse_counts.empty() ? nullptr : o.evse_counts.data();
  const int* hz = o.horizons.empty() ? nullptr : o.horizons.data();
  if (auto s = evmpc_bench_run(config.ptr, list, n_list, evse, o.evse_counts.size(), hz, o.horizons.size(),
                               seeds.first, o.cell_cap_s, o.workers, &bench.ptr);
      s != EVMPC_OK) {
    return report(s, "the bench");
  }
  if (auto s = evmpc_bench_write(bench.ptr, o.out.c_str()); s != EVMPC_OK) return report(s, "writing artifacts");
  std::printf("%-10s %5s %3s %12s %12s %s\n", "algorithm", "evse", "H", "mean_ms", "max_ms", "flags");
  for (std::size_t i = 0; i < evmpc_bench_cell_count(bench.ptr); ++i) {
    evmpc_bench_cell c;
    evmpc_bench_get_cell(bench.ptr, i, &c);
    std::printf("%-10s %5d %3d %12.3f %12.3f %s%s\n",
                evmpc_controller_name(static_cast<evmpc_controller>(c.controller)), c.evse, c.horizon,
                c.mean_step_ms, c.max_step_ms, c.capped ? "capped " : "", c.failed ? "failed" : "");
  }
  std::printf("artifacts in %s\n", o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging pool simulator with receding-horizon controllers"};
  Options o;
  std::vector<std::string> controller_names;
  const std::vector<std::string> known{"afap", "empc_g2v", "empc_v2g", "ocmf_g2v", "ocmf_v2g"};
  app.add_option("--config", o.config, "YAML configuration file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--mode", o.mode, "Experiment to run")
      ->check(CLI::IsMember({"single", "batch", "m-sweep", "bench"}));
  app.add_option("--controller", controller_names,
                 "Controller(s); single mode takes one, others default to all five")
      ->check(CLI::IsMember(known))
      ->delimiter(',');
  app.add_option("--horizon", o.horizon, "Control horizon in steps")->check(CLI::PositiveNumber);
  app.add_option("--seeds", o.seeds, "Seed N or inclusive range A..B");
  app.add_option("--m", o.m_values, "Comma-separated discharge multipliers for m-sweep")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 2.0));
  app.add_option("--evse", o.evse_counts, "Comma-separated EVSE counts for bench")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--horizons", o.horizons, "Comma-separated horizons for bench")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--cell-cap", o.cell_cap_s, "Wall-clock cap per bench cell in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--node-limit", o.node_limit, "Branch-and-bound node limit per step")
      ->check(CLI::PositiveNumber);
  app.add_option("--chargers", o.chargers, "Number of chargers")->check(CLI::NonNegativeNumber);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--timing", o.timing, "Record wall-clock solve times in the artifacts");
  try {
    app.parse(argc, argv);
    if (o.mode == "single" && controller_names.size() > 1) {
      throw CLI::ValidationError("--controller", "single mode takes one controller");
    }
    std::vector<evmpc_controller> controllers;
    for (const auto& name : controller_names) {
      evmpc_controller c;
      if (evmpc_controller_from_name(name.c_str(), &c) != EVMPC_OK) {
        throw CLI::ValidationError("--controller", evmpc_last_error());
      }
      controllers.push_back(c);
    }
    return run(o, controllers);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
}
