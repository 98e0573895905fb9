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

#include <Eigen/Dense>

#include "evmpc/scenario.hpp"
#include "evmpc/simengine.hpp"

namespace evmpc {

/// Snapshot of the pool over steps k..k+H-1 as seen by a controller at step k.
/// Row h of a state quantity refers to the SoC after step k+h has been applied.
struct HorizonView {
  int step = 0;
  int horizon = 0;
  double delta_t_h = 0.25;
  Eigen::MatrixXd xi;           // I x H availability
  Eigen::MatrixXd b_charge;     // I x H
  Eigen::MatrixXd b_discharge;  // I x H
  Eigen::VectorXd x0;           // measured SoC, 0 for empty chargers
  std::vector<int> session;     // index into Scenario::sessions, -1 when empty
  std::vector<EvSession> ev;    // copy of the connected session, default when empty
  std::vector<double> p_max_charge;
  std::vector<double> p_max_discharge;
  std::vector<int> min_current;
  std::vector<int> max_current;
  std::vector<TransformerForecast> forecasts;  // H entries per series
  std::vector<double> limit_kw;
  std::vector<std::vector<int>> transformer_chargers;
  PriceSchedule prices;  // H entries per series

  int chargers() const { return static_cast<int>(x0.size()); }
  bool connected(int i) const { return session[i] >= 0; }
  bool any_connected() const;
};

/// X = A_stack * x0 + G_stack * P with X stacked by step then charger and P
/// stacked per step as [P^c_0..P^c_{I-1}, P^d_0..P^d_{I-1}].
struct LiftedModel {
  Eigen::MatrixXd A_stack;
  Eigen::MatrixXd G_stack;
  Eigen::VectorXd x0;
  int chargers = 0;
  int horizon = 0;

  int state_row(int h, int i) const { return h * chargers + i; }
  int charge_col(int h, int i) const { return 2 * chargers * h + i; }
  int discharge_col(int h, int i) const { return 2 * chargers * h + chargers + i; }
  Eigen::VectorXd predict(const Eigen::VectorXd& p) const { return A_stack * x0 + G_stack * p; }
};

/// Per-charger slice of the lifted model: x_h = a(h) x0 + sum_t gc(h,t) P^c_t + gd(h,t) P^d_t.
struct ChargerLift {
  Eigen::VectorXd a;
  Eigen::MatrixXd g_charge;
  Eigen::MatrixXd g_discharge;
};

struct DepartureBound {
  int charger = 0;
  int row = 0;
  double min_soc = 0.0;
  double max_soc = 1.0;
  bool terminal = false;
};

HorizonView build_horizon_view(const PoolState& state, const Scenario& scenario,
                               std::span<const TransformerForecast> forecasts, int horizon);

ChargerLift lift_charger(const HorizonView& view, int charger);
LiftedModel lift(const HorizonView& view, const Eigen::VectorXd& x0);
inline LiftedModel lift(const HorizonView& view) { return lift(view, view.x0); }

/// I x H lower bounds on the predicted SoC rows.
Eigen::MatrixXd soc_lower_bounds(const HorizonView& view, const Eigen::VectorXd& x0);

std::vector<DepartureBound> departure_constraints(const HorizonView& view);

/// First horizon row at which charger i can no longer offer flexibility:
/// from there on it must charge at full power to reach its departure target,
/// or the row produces the departure state. H when flexibility is never cut.
std::vector<int> must_charge_rows(const HorizonView& view);

}  // namespace evmpc
