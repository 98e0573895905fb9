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

#include "evmpc/scenario.hpp"

namespace evmpc {

struct ChargerState {
  bool connected = false;
  int session = -1;  // index into Scenario::sessions
  double soc = 0.0;
};

struct PoolState {
  int step = 0;
  std::vector<ChargerState> chargers;
};

/// Forecast of one transformer over steps k..k+H-1. Lead 0 holds measured
/// values; later leads are noisy. DR reductions appear only once announced.
struct TransformerForecast {
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
  std::vector<double> dr_reduction_kw;
};

struct StepRecord {
  int step = 0;
  std::vector<double> p_charge_kw;
  std::vector<double> p_discharge_kw;
  std::vector<int> ev_id;          // -1 when the charger is empty
  std::vector<double> soc_after;   // SoC after the step, 0 when empty
  std::vector<double> net_kw;      // per transformer, chargers + load - pv
  std::vector<double> limit_kw;    // per transformer, after DR
  std::vector<bool> overload;      // per transformer
  std::vector<bool> dr_active;     // per transformer
  double cash_eur = 0.0;
  std::vector<int> arrivals;       // session ids connecting at step + 1
  std::vector<int> departures;     // session ids leaving at step + 1
};

struct DepartureRecord {
  int ev_id = 0;
  int charger_id = 0;
  int step = 0;
  double soc = 0.0;
  double required = 0.0;
  bool met = false;
};

/// Post-step SoC and applied net power for each step the EV was connected.
struct EvTrace {
  int ev_id = 0;
  std::vector<double> soc;
  std::vector<double> net_power_kw;
};

enum class Direction { Charge, Discharge };

/// Nearest level of {0} U {rated * n / max_current : n = min_current..max_current},
/// ties towards the lower level. Throws std::invalid_argument on negative input.
double quantize_power(double requested_kw, const ChargerSpec& charger, Direction direction);
/// Same level set with an explicit rating.
double quantize_power(double requested_kw, double rated_kw, int min_current, int max_current);
/// Largest level not above `limit_kw`.
double floor_level(double limit_kw, double rated_kw, int min_current, int max_current);

/// Noisy forecast of `actual[k..k+H-1]`: every value is drawn from
/// N(mean_frac * a, std_frac * a) and truncated at zero. Steps past the end of
/// the series are zero.
std::vector<double> forecast_series(std::span<const double> actual, int k, int H, Rng& rng,
                                    double mean_frac = 1.0, double std_frac = 0.05);

/// Lowest SoC discharging may reach: the measured SoC when it is already below
/// the configured floor, otherwise the floor.
double soc_floor_bound(double soc, double soc_floor);

class Environment {
 public:
  /// `forecast_horizon` fixes how many leads are drawn each step, so the
  /// random stream is identical for every controller.
  Environment(const Scenario& scenario, std::uint64_t seed, int forecast_horizon);

  const PoolState& reset();
  /// Applies one action vector in [-1, 1]^I and advances to the next step.
  StepRecord step(std::span<const double> actions);

  const Scenario& scenario() const { return *scenario_; }
  const PoolState& state() const { return state_; }
  bool done() const { return state_.step >= scenario_->sim.sim_steps; }
  int forecast_horizon() const { return forecast_horizon_; }
  const std::vector<TransformerForecast>& forecasts() const { return forecasts_; }

  const std::vector<DepartureRecord>& departures() const { return departures_; }
  /// Per-session traces indexed by session id.
  const std::vector<EvTrace>& ev_traces() const { return traces_; }

 private:
  void connect_arrivals(int k, std::vector<int>* arrived);
  void draw_forecasts();

  const Scenario* scenario_;
  std::uint64_t seed_;
  int forecast_horizon_;
  Rng forecast_rng_;
  PoolState state_;
  std::vector<TransformerForecast> forecasts_;
  std::vector<DepartureRecord> departures_;
  std::vector<EvTrace> traces_;
};

}  // namespace evmpc
