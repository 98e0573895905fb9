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

#include "evmpc/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evmpc {

namespace {

constexpr std::uint64_t kForecastStream = 6;
constexpr double kOverloadTol = 1e-9;

}  // namespace

double quantize_power(double requested_kw, double rated_kw, int min_current, int max_current) {
  if (requested_kw < 0.0 || std::isnan(requested_kw)) {
    throw std::invalid_argument("quantize_power: negative request");
  }
  if (requested_kw == 0.0 || rated_kw <= 0.0) return 0.0;
  const double unit = rated_kw / max_current;
  double best = 0.0;
  double best_dist = requested_kw;
  const int n = static_cast<int>(std::floor(requested_kw / unit));
  for (int c : {n, n + 1, min_current, max_current}) {
    if (c < min_current || c > max_current) continue;
    const double level = unit * c;
    const double dist = std::abs(level - requested_kw);
    if (dist < best_dist || (dist == best_dist && level < best)) {
      best = level;
      best_dist = dist;
    }
  }
  return best;
}

double quantize_power(double requested_kw, const ChargerSpec& charger, Direction direction) {
  const double rated =
      direction == Direction::Charge ? charger.max_charge_kw : charger.max_discharge_kw;
  return quantize_power(requested_kw, rated, charger.min_current_a, charger.max_current_a);
}

double floor_level(double limit_kw, double rated_kw, int min_current, int max_current) {
  if (!(limit_kw > 0.0) || rated_kw <= 0.0) return 0.0;
  const double unit = rated_kw / max_current;
  int n = static_cast<int>(std::floor(limit_kw / unit + 1e-12));
  n = std::min(n, max_current);
  if (n < min_current) return 0.0;
  return std::min(unit * n, limit_kw);
}

std::vector<double> forecast_series(std::span<const double> actual, int k, int H, Rng& rng,
                                    double mean_frac, double std_frac) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> out(std::max(H, 0), 0.0);
  for (int h = 0; h < H; ++h) {
    const double z = n(rng);
    const int t = k + h;
    if (t < 0 || t >= static_cast<int>(actual.size())) continue;
    const double a = actual[t];
    out[h] = std::max(0.0, mean_frac * a + std_frac * a * z);
  }
  return out;
}

double soc_floor_bound(double soc, double soc_floor) {
  return soc < soc_floor ? soc : soc_floor;
}

Environment::Environment(const Scenario& scenario, std::uint64_t seed, int forecast_horizon)
    : scenario_(&scenario),
      seed_(seed),
      forecast_horizon_(std::max(1, forecast_horizon)),
      forecast_rng_(make_stream(seed, kForecastStream)) {
  reset();
}

const PoolState& Environment::reset() {
  forecast_rng_ = make_stream(seed_, kForecastStream);
  state_ = PoolState{};
  state_.chargers.assign(scenario_->chargers.size(), ChargerState{});
  departures_.clear();
  traces_.assign(scenario_->sessions.size(), EvTrace{});
  for (std::size_t j = 0; j < traces_.size(); ++j) traces_[j].ev_id = scenario_->sessions[j].id;
  connect_arrivals(0, nullptr);
  draw_forecasts();
  return state_;
}

void Environment::connect_arrivals(int k, std::vector<int>* arrived) {
  for (std::size_t j = 0; j < scenario_->sessions.size(); ++j) {
    const auto& s = scenario_->sessions[j];
    if (s.arrival_step != k) continue;
    auto& c = state_.chargers[s.charger_id];
    c.connected = true;
    c.session = static_cast<int>(j);
    c.soc = s.soc_arrival;
    if (arrived) arrived->push_back(s.id);
  }
}

void Environment::draw_forecasts() {
  const int k = state_.step;
  const int H = forecast_horizon_;
  const auto& params = scenario_->transformer_params;
  forecasts_.assign(scenario_->transformers.size(), TransformerForecast{});
  for (std::size_t g = 0; g < scenario_->transformers.size(); ++g) {
    const auto& t = scenario_->transformers[g];
    auto& f = forecasts_[g];
    f.load_kw = forecast_series(t.inflexible_load_kw, k, H, forecast_rng_,
                                params.inflexible_load.forecast_mean,
                                params.inflexible_load.forecast_std);
    f.pv_kw = forecast_series(t.pv_generation_kw, k, H, forecast_rng_, params.pv.forecast_mean,
                              params.pv.forecast_std);
    const int K = scenario_->sim.sim_steps;
    if (k < K) {
      f.load_kw[0] = t.inflexible_load_kw[k];
      f.pv_kw[0] = t.pv_generation_kw[k];
    }
    f.dr_reduction_kw.assign(H, 0.0);
    for (int h = 0; h < H && k + h < K; ++h) {
      f.dr_reduction_kw[h] = t.announced_reduction_kw(k, k + h);
    }
  }
}

StepRecord Environment::step(std::span<const double> actions) {
  const auto& sc = *scenario_;
  const int I = static_cast<int>(sc.chargers.size());
  if (static_cast<int>(actions.size()) != I) {
    throw std::invalid_argument("step: expected " + std::to_string(I) + " actions, got " +
                                std::to_string(actions.size()));
  }
  if (done()) throw std::logic_error("step: simulation already finished");
  const int k = state_.step;
  const double dt = sc.sim.delta_t_h();

  StepRecord rec;
  rec.step = k;
  rec.p_charge_kw.assign(I, 0.0);
  rec.p_discharge_kw.assign(I, 0.0);
  rec.ev_id.assign(I, -1);
  rec.soc_after.assign(I, 0.0);

  for (int i = 0; i < I; ++i) {
    auto& c = state_.chargers[i];
    if (!c.connected) continue;
    const double a = actions[i];
    if (!std::isfinite(a)) throw std::invalid_argument("step: non-finite action");
    const auto& s = sc.sessions[c.session];
    const auto& spec = sc.chargers[i];
    const double act = std::clamp(a, -1.0, 1.0);
    double pc = 0.0, pd = 0.0;
    if (act > 0.0) {
      pc = quantize_power(act * s.max_charge_kw, s.max_charge_kw, spec.min_current_a,
                          spec.max_current_a);
      const double cap = (1.0 - c.soc) * s.capacity_kwh / (dt * s.eta_charge);
      if (pc > cap) pc = floor_level(cap, s.max_charge_kw, spec.min_current_a, spec.max_current_a);
    } else if (act < 0.0) {
      pd = quantize_power(-act * s.max_discharge_kw, s.max_discharge_kw, spec.min_current_a,
                          spec.max_current_a);
      const double lb = soc_floor_bound(c.soc, s.soc_floor);
      const double cap = std::max(0.0, c.soc - lb) * s.capacity_kwh * s.eta_discharge / dt;
      if (pd > cap) {
        pd = floor_level(cap, s.max_discharge_kw, spec.min_current_a, spec.max_current_a);
      }
    }
    c.soc += dt / s.capacity_kwh * (s.eta_charge * pc - pd / s.eta_discharge);
    c.soc = std::clamp(c.soc, 0.0, 1.0);
    rec.p_charge_kw[i] = pc;
    rec.p_discharge_kw[i] = pd;
    rec.ev_id[i] = s.id;
    rec.soc_after[i] = c.soc;
    auto& tr = traces_[c.session];
    tr.soc.push_back(c.soc);
    tr.net_power_kw.push_back(pc - pd);
    rec.cash_eur += dt * (sc.prices.discharge[k] * pd - sc.prices.charge[k] * pc);
  }

  const int G = static_cast<int>(sc.transformers.size());
  rec.net_kw.assign(G, 0.0);
  rec.limit_kw.assign(G, 0.0);
  rec.overload.assign(G, false);
  rec.dr_active.assign(G, false);
  for (int g = 0; g < G; ++g) {
    const auto& t = sc.transformers[g];
    double net = t.inflexible_load_kw[k] - t.pv_generation_kw[k];
    for (int i : t.charger_ids) net += rec.p_charge_kw[i] - rec.p_discharge_kw[i];
    const double dr = t.dr_reduction_kw(k);
    rec.net_kw[g] = net;
    rec.limit_kw[g] = t.power_limit_kw - dr;
    rec.overload[g] = net > rec.limit_kw[g] + kOverloadTol;
    rec.dr_active[g] = dr > 0.0;
  }

  const int next = k + 1;
  for (int i = 0; i < I; ++i) {
    auto& c = state_.chargers[i];
    if (!c.connected) continue;
    const auto& s = sc.sessions[c.session];
    if (s.departure_step != next) continue;
    DepartureRecord d;
    d.ev_id = s.id;
    d.charger_id = i;
    d.step = next;
    d.soc = c.soc;
    d.required = s.soc_required_min;
    d.met = c.soc >= s.soc_required_min - 1e-3;
    departures_.push_back(d);
    rec.departures.push_back(s.id);
    c = ChargerState{};
  }
  state_.step = next;
  connect_arrivals(next, &rec.arrivals);
  draw_forecasts();
  return rec;
}

}  // namespace evmpc
