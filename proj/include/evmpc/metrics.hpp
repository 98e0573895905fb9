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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evmpc/controllers.hpp"
#include "evmpc/degradation.hpp"
#include "evmpc/scenario.hpp"
#include "evmpc/simengine.hpp"

namespace evmpc {

struct RunStats {
  std::string controller;
  std::uint64_t seed = 0;
  double discharge_multiplier = 0.0;
  double profit_eur = 0.0;
  double energy_charged_kwh = 0.0;
  double energy_discharged_kwh = 0.0;
  double sum_q_lost = 0.0;
  double sum_d_cal = 0.0;
  double sum_d_cyc = 0.0;
  int overload_steps = 0;
  int departures = 0;
  int departure_misses = 0;
  int dr_steps = 0;
  int dr_violations = 0;
  double flex_offered_kwh = 0.0;
  int solves = 0;
  int slack_steps = 0;
  int fallback_steps = 0;
  long total_nodes = 0;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
};

/// Everything a finished run leaves behind.
struct RunTrace {
  std::vector<StepRecord> steps;
  std::vector<StepLog> log;
  std::vector<DepartureRecord> departures;
  FleetDegradation degradation;
};

RunStats summarize(const Scenario& scenario, const RunTrace& trace);

/// Named numeric fields of a RunStats, in a fixed order.
std::vector<std::pair<std::string, double>> metric_values(const RunStats& stats);

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
};

struct BatchStats {
  std::string controller;
  int n = 0;
  // Set when n == 1 and the standard deviations are reported as 0.
  bool std_undefined = false;
  std::vector<MetricSummary> metrics;
  std::vector<RunStats> runs;

  const MetricSummary& metric(const std::string& name) const;
};

/// Sample mean and (n-1) standard deviation of every metric. Throws on an
/// empty batch.
BatchStats batch(std::span<const RunStats> runs);

}  // namespace evmpc
