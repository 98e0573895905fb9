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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "evmpc/controllers.hpp"
#include "evmpc/metrics.hpp"
#include "evmpc/scenario.hpp"

namespace evmpc {

struct RunOptions {
  // Wall-clock figures only appear in artifacts when set.
  bool timing = false;
  // Stops the simulation early once exceeded; the run is then marked capped.
  double time_cap_s = std::numeric_limits<double>::infinity();
};

struct RunResult {
  RunStats stats;
  RunTrace trace;
  bool capped = false;
  int steps_run = 0;
};

RunResult run_single(const Scenario& scenario, const ControllerConfig& controller,
                     std::uint64_t seed, const RunOptions& options = {});

std::vector<ControllerKind> all_controllers();

struct BatchSpec {
  Config config;
  std::vector<ControllerKind> controllers = all_controllers();
  std::vector<std::uint64_t> seeds;
  int workers = 1;
  RunOptions options;
};

struct BatchCell {
  ControllerKind kind = ControllerKind::Afap;
  std::uint64_t seed = 0;
  RunStats stats;
  std::string error;
};

struct BatchResult {
  std::vector<BatchCell> cells;  // seed-major, controllers in spec order
  std::vector<BatchStats> per_controller;
};

/// Runs every controller on the same scenario for each seed.
BatchResult run_batch(const BatchSpec& spec);

struct SweepResult {
  std::vector<double> m_values;
  std::vector<BatchResult> batches;
};

std::vector<double> default_m_values();
SweepResult run_m_sweep(const BatchSpec& spec, const std::vector<double>& m_values);

struct BenchSpec {
  Config config;
  std::vector<ControllerKind> controllers = all_controllers();
  std::vector<int> evse_counts;
  std::vector<int> horizons{10, 30};
  int transformers = 3;
  std::uint64_t seed = 0;
  double cell_time_cap_s = 120.0;
  int workers = 1;
};

struct BenchCell {
  ControllerKind kind = ControllerKind::Afap;
  int evse = 0;
  int horizon = 0;
  int steps_timed = 0;
  double mean_step_ms = 0.0;
  double max_step_ms = 0.0;
  bool capped = false;
  std::string error;
};

std::vector<int> default_evse_counts();
std::vector<BenchCell> run_bench(const BenchSpec& spec);

void write_trace_csv(std::ostream& out, const Scenario& scenario, const RunTrace& trace);
void write_log_csv(std::ostream& out, const std::vector<StepLog>& log, bool timing);
void write_degradation_csv(std::ostream& out, const FleetDegradation& degradation);
std::string run_summary_json(const RunStats& stats, bool timing);
void write_runs_csv(std::ostream& out, const BatchResult& result, bool timing);
void write_batch_csv(std::ostream& out, const BatchResult& result, bool timing);
std::string batch_summary_json(const BatchResult& result, bool timing);
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);
void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells);

/// Artifact bundles; return the list of files written.
std::vector<std::filesystem::path> write_single_artifacts(const std::filesystem::path& dir,
                                                          const Scenario& scenario,
                                                          const RunResult& result, bool timing);
std::vector<std::filesystem::path> write_batch_artifacts(const std::filesystem::path& dir,
                                                         const BatchResult& result, bool timing);
std::vector<std::filesystem::path> write_sweep_artifacts(const std::filesystem::path& dir,
                                                         const SweepResult& result, bool timing);
std::vector<std::filesystem::path> write_bench_artifacts(const std::filesystem::path& dir,
                                                         const std::vector<BenchCell>& cells);

}  // namespace evmpc
