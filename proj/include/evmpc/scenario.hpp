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
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace evmpc {

using Rng = std::mt19937_64;

/// Independent deterministic stream derived from a run seed and a stream tag.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Normal(mean, sd) restricted to [lo, hi] by rejection. Throws
/// std::runtime_error when no sample lands inside after `max_tries` draws.
double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi,
                               int max_tries = 10000);

/// Invalid or inconsistent configuration value. `field()` is the dotted key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SimConfig {
  double delta_t_min = 15.0;
  int horizon_steps = 10;
  int sim_steps = 96;
  int n_chargers = 10;
  int n_transformers = 1;
  int n_evs = 25;
  double discharge_multiplier = 1.2;
  std::uint64_t seed = 0;
  std::string ev_scenario_name = "residential";

  double delta_t_h() const { return delta_t_min / 60.0; }
};

struct ChargerSpec {
  int id = 0;
  int transformer_id = 0;
  double max_charge_kw = 22.0;
  double max_discharge_kw = 22.0;
  double voltage_v = 230.0;
  int phases = 3;
  int min_current_a = 6;
  int max_current_a = 32;
};

struct EvSession {
  int id = 0;
  int charger_id = 0;
  int arrival_step = 0;
  int departure_step = 1;
  double soc_arrival = 0.5;
  double soc_required_min = 0.8;
  double soc_required_max = 1.0;
  double capacity_kwh = 50.0;
  double soc_floor = 0.1;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double max_charge_kw = 22.0;
  double max_discharge_kw = 22.0;
};

struct DrEvent {
  int start_step = 0;
  int duration_steps = 4;
  double capacity_reduction = 0.2;
  int notice_steps = 1;

  bool active_at(int k) const { return k >= start_step && k < start_step + duration_steps; }
  bool announced_at(int k) const { return k >= start_step - notice_steps; }
};

struct TransformerSpec {
  int id = 0;
  double power_limit_kw = 400.0;
  std::vector<int> charger_ids;
  std::vector<double> inflexible_load_kw;
  std::vector<double> pv_generation_kw;
  std::vector<DrEvent> dr_events;

  /// Actual DR reduction at step k (kW).
  double dr_reduction_kw(int k) const;
  /// Reduction at step `target` as known at step `now` (announced events only).
  double announced_reduction_kw(int now, int target) const;
};

struct PriceSchedule {
  std::vector<double> charge;
  std::vector<double> discharge;
  std::vector<double> flex_charge;
  std::vector<double> flex_discharge;
};

struct Range {
  double mean = 0.0;
  double std = 1.0;
  double min = 0.0;
  double max = 1.0;
};

struct EvParams {
  double capacity_kwh = 50.0;
  double max_charge_kw = 22.0;
  double max_discharge_kw = 22.0;
  double soc_floor = 0.1;
  double soc_required_min = 0.8;
  double soc_required_max = 1.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double min_connection_h = 3.0;
  Range arrival_h{11.0, 5.0, 0.0, 21.0};
  Range duration_h{5.5, 2.0, 3.0, 10.0};
  Range soc_arrival{0.4, 0.2, 0.05, 0.7};
  int max_placement_tries = 10000;
};

struct SeriesParams {
  double multiplier = 1.0;
  double forecast_mean = 1.0;
  double forecast_std = 0.05;
  double noise = 0.03;
  std::string csv;
};

struct DrParams {
  int events = 1;
  double duration_h = 1.0;
  double notice_min = 15.0;
  double capacity_reduction = 0.2;
  double start_mean_h = 18.0;
  double start_std_h = 1.0;
};

struct TransformerParams {
  double power_limit_kw = 400.0;
  SeriesParams inflexible_load{1.0, 1.0, 0.05, 0.03, {}};
  SeriesParams pv{3.0, 1.0, 0.05, 0.03, {}};
  DrParams demand_response;
};

struct PriceParams {
  double base_eur_per_kwh = 0.20;
  double peak_amplitude = 1.0;
  double midday_dip = 1.0;
  double noise = 0.15;
  double floor_eur_per_kwh = 0.01;
  double flex_charge_fraction = 0.5;
  double flex_discharge_fraction = 0.5;
  std::string csv;
};

enum class ControllerKind { Afap, EmpcG2v, EmpcV2g, OcmfG2v, OcmfV2g };

std::string to_string(ControllerKind kind);
/// Accepts the canonical names (afap, empc_g2v, ...). Throws ConfigError.
ControllerKind parse_controller_kind(const std::string& name);
bool is_v2g(ControllerKind kind);
bool is_ocmf(ControllerKind kind);

struct ControllerParams {
  ControllerKind kind = ControllerKind::EmpcV2g;
  long node_limit = 200;
  double time_limit_s = 10.0;
  int heuristic_frequency = 10;
  // Penalty in EUR per unit of SoC shortfall; 0 selects an automatic value.
  double slack_penalty = 0.0;
  bool warm_start = true;
};

struct Config {
  SimConfig sim;
  ChargerSpec charger;
  EvParams ev;
  TransformerParams transformer;
  PriceParams prices;
  ControllerParams controller;
};

/// Fully generated, immutable inputs of one simulation.
struct Scenario {
  SimConfig sim;
  std::vector<ChargerSpec> chargers;
  std::vector<EvSession> sessions;
  std::vector<TransformerSpec> transformers;
  PriceSchedule prices;
  TransformerParams transformer_params;
};

/// Parses YAML text. Absent keys keep their defaults; unknown keys and invalid
/// values raise ConfigError naming the field; syntax errors report the line.
Config parse_config(const std::string& yaml_text);
Config load_config(const std::string& path);
Config config_from_yaml(const YAML::Node& root);
void validate(const Config& config);

/// Applies "section.key=value" overrides on top of YAML text and reparses.
std::string apply_overrides(const std::string& yaml_text,
                            const std::vector<std::string>& assignments);

std::vector<EvSession> generate_sessions(Rng& rng, const Config& config);
std::vector<double> generate_load_series(Rng& rng, const Config& config);
std::vector<double> generate_pv_series(Rng& rng, const Config& config);
std::vector<DrEvent> generate_dr_events(Rng& rng, const Config& config);
std::vector<double> generate_charge_prices(Rng& rng, const Config& config);
PriceSchedule build_price_schedule(std::vector<double> charge_prices, const Config& config);

/// Headered two-column CSV (step, value). Throws ConfigError on malformed input
/// or when the row count differs from `expected_rows`.
std::vector<double> read_series_csv(const std::string& path, int expected_rows,
                                    const std::string& field);

/// Builds every series and session for one seed. The scenario depends only on
/// the configuration and the seed, never on the controller.
Scenario build_scenario(const Config& config, std::uint64_t seed);

/// Checks every type invariant of a generated scenario; throws ConfigError.
void validate(const Scenario& scenario);

}  // namespace evmpc
