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

#include "evmpc/degradation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evmpc {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double calendar_loss(std::span<const double> soc_trace, double duration_days,
                     const DegradationParams& p) {
  if (soc_trace.empty()) throw std::invalid_argument("calendar_loss: empty SoC trace");
  if (!(duration_days > 0.0)) throw std::invalid_argument("calendar_loss: duration must be > 0");
  const double theta_k = p.theta_c + 273.15;
  return 0.75 * (p.eps0 * mean_of(soc_trace) - p.eps1) * std::exp(-p.eps2 / theta_k) *
         duration_days / std::pow(p.t_tot_days, 0.25);
}

double cyclic_loss(std::span<const double> soc_trace, std::span<const double> power_trace_kw,
                   double delta_t_h, double duration_days, const DegradationParams& p) {
  if (soc_trace.size() != power_trace_kw.size()) {
    throw std::invalid_argument("cyclic_loss: SoC and power traces differ in length");
  }
  if (!(delta_t_h > 0.0)) throw std::invalid_argument("cyclic_loss: delta_t must be > 0");
  if (!(duration_days > 0.0)) throw std::invalid_argument("cyclic_loss: duration must be > 0");
  if (soc_trace.empty()) return 0.0;
  const double mean = mean_of(soc_trace);
  const double dt_days = delta_t_h / 24.0;
  double deviation = 0.0;
  double throughput = 0.0;
  for (std::size_t k = 0; k < soc_trace.size(); ++k) {
    deviation += std::abs(mean - soc_trace[k]) * dt_days;
    throughput += std::abs(power_trace_kw[k]) * delta_t_h;
  }
  return (p.zeta0 + p.zeta1 * deviation / duration_days) * throughput / std::sqrt(p.q_acc_kwh);
}

FleetDegradation run_degradation(std::span<const EvTrace> traces, double delta_t_h,
                                 double duration_days, const DegradationParams& params) {
  FleetDegradation f;
  for (const auto& t : traces) {
    if (t.soc.empty()) continue;
    DegradationResult r;
    r.ev_id = t.ev_id;
    r.mean_soc = mean_of(t.soc);
    r.d_cal = calendar_loss(t.soc, duration_days, params);
    r.d_cyc = cyclic_loss(t.soc, t.net_power_kw, delta_t_h, duration_days, params);
    r.q_lost = r.d_cal + r.d_cyc;
    for (double pw : t.net_power_kw) r.energy_throughput_kwh += std::abs(pw) * delta_t_h;
    f.sum_d_cal += r.d_cal;
    f.sum_d_cyc += r.d_cyc;
    f.sum_q_lost += r.q_lost;
    f.per_ev.push_back(r);
  }
  return f;
}

}  // namespace evmpc
