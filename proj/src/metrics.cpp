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

#include "evmpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evmpc {

RunStats summarize(const Scenario& scenario, const RunTrace& trace) {
  RunStats s;
  const double dt = scenario.sim.delta_t_h();
  s.discharge_multiplier = scenario.sim.discharge_multiplier;
  for (const auto& r : trace.steps) {
    double pc = 0.0, pd = 0.0;
    for (double v : r.p_charge_kw) pc += v;
    for (double v : r.p_discharge_kw) pd += v;
    s.energy_charged_kwh += pc * dt;
    s.energy_discharged_kwh += pd * dt;
    s.profit_eur += dt * (scenario.prices.discharge[r.step] * pd - scenario.prices.charge[r.step] * pc);
    for (std::size_t g = 0; g < r.overload.size(); ++g) {
      if (r.overload[g]) ++s.overload_steps;
      if (r.dr_active[g]) {
        ++s.dr_steps;
        if (r.overload[g]) ++s.dr_violations;
      }
    }
  }
  s.departures = static_cast<int>(trace.departures.size());
  for (const auto& d : trace.departures) {
    if (!d.met) ++s.departure_misses;
  }
  s.sum_d_cal = trace.degradation.sum_d_cal;
  s.sum_d_cyc = trace.degradation.sum_d_cyc;
  s.sum_q_lost = trace.degradation.sum_q_lost;
  double total_ms = 0.0;
  for (const auto& l : trace.log) {
    s.flex_offered_kwh += l.total_flex_kw * dt;
    s.total_nodes += l.nodes;
    if (l.slack_used) ++s.slack_steps;
    if (l.status == "fallback") ++s.fallback_steps;
    if (l.status == "afap" || l.status == "idle") continue;
    ++s.solves;
    total_ms += l.solve_ms;
    s.max_solve_ms = std::max(s.max_solve_ms, l.solve_ms);
  }
  s.mean_solve_ms = s.solves > 0 ? total_ms / s.solves : 0.0;
  return s;
}

std::vector<std::pair<std::string, double>> metric_values(const RunStats& s) {
  return {
      {"profit_eur", s.profit_eur},
      {"energy_charged_kwh", s.energy_charged_kwh},
      {"energy_discharged_kwh", s.energy_discharged_kwh},
      {"sum_q_lost", s.sum_q_lost},
      {"sum_d_cal", s.sum_d_cal},
      {"sum_d_cyc", s.sum_d_cyc},
      {"overload_steps", static_cast<double>(s.overload_steps)},
      {"departures", static_cast<double>(s.departures)},
      {"departure_misses", static_cast<double>(s.departure_misses)},
      {"dr_steps", static_cast<double>(s.dr_steps)},
      {"dr_violations", static_cast<double>(s.dr_violations)},
      {"flex_offered_kwh", s.flex_offered_kwh},
      {"slack_steps", static_cast<double>(s.slack_steps)},
      {"fallback_steps", static_cast<double>(s.fallback_steps)},
      {"mean_solve_ms", s.mean_solve_ms},
      {"max_solve_ms", s.max_solve_ms},
  };
}

const MetricSummary& BatchStats::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw std::out_of_range("unknown metric: " + name);
}

BatchStats batch(std::span<const RunStats> runs) {
  if (runs.empty()) throw std::invalid_argument("batch: no runs");
  BatchStats b;
  b.controller = runs.front().controller;
  b.n = static_cast<int>(runs.size());
  b.std_undefined = b.n == 1;
  b.runs.assign(runs.begin(), runs.end());
  const auto names = metric_values(runs.front());
  for (std::size_t m = 0; m < names.size(); ++m) {
    double sum = 0.0;
    for (const auto& r : runs) sum += metric_values(r)[m].second;
    const double mean = sum / b.n;
    double sq = 0.0;
    for (const auto& r : runs) {
      const double d = metric_values(r)[m].second - mean;
      sq += d * d;
    }
    const double sd = b.n > 1 ? std::sqrt(sq / (b.n - 1)) : 0.0;
    b.metrics.push_back(MetricSummary{names[m].first, mean, sd});
  }
  return b;
}

}  // namespace evmpc
