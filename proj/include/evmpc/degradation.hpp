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

#include <span>
#include <vector>

#include "evmpc/simengine.hpp"

namespace evmpc {

struct DegradationParams {
  double eps0 = 6.23e6;
  double eps1 = 1.38e6;
  double eps2 = 6976.0;
  double theta_c = 28.0;
  double zeta0 = 4.02e-4;
  double zeta1 = 2.04e-3;
  double t_tot_days = 730.0;
  double q_acc_kwh = 11160.0;
};

struct DegradationResult {
  int ev_id = 0;
  double d_cal = 0.0;
  double d_cyc = 0.0;
  double q_lost = 0.0;
  double energy_throughput_kwh = 0.0;
  double mean_soc = 0.0;
};

struct FleetDegradation {
  std::vector<DegradationResult> per_ev;
  double sum_d_cal = 0.0;
  double sum_d_cyc = 0.0;
  double sum_q_lost = 0.0;
};

/// Calendar capacity loss over `duration_days`; temperature enters in kelvin.
/// Throws std::invalid_argument on an empty trace or non-positive duration.
double calendar_loss(std::span<const double> soc_trace, double duration_days,
                     const DegradationParams& params = {});

/// Cyclic capacity loss. The SoC deviation term integrates over time in days;
/// throughput is sum |P| * delta_t_h in kWh.
double cyclic_loss(std::span<const double> soc_trace, std::span<const double> power_trace_kw,
                   double delta_t_h, double duration_days, const DegradationParams& params = {});

/// Applies both losses to each EV trace that has at least one connected step.
FleetDegradation run_degradation(std::span<const EvTrace> traces, double delta_t_h,
                                 double duration_days, const DegradationParams& params = {});

}  // namespace evmpc
