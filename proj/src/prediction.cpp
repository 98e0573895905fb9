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

#include "evmpc/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evmpc {

namespace {

std::vector<double> slice(const std::vector<double>& series, int k, int H) {
  std::vector<double> out(H, 0.0);
  if (series.empty()) return out;
  for (int h = 0; h < H; ++h) {
    const int t = std::min(k + h, static_cast<int>(series.size()) - 1);
    out[h] = series[std::max(t, 0)];
  }
  return out;
}

std::vector<double> padded(const std::vector<double>& v, int H) {
  std::vector<double> out(H, 0.0);
  for (int h = 0; h < H && h < static_cast<int>(v.size()); ++h) out[h] = v[h];
  return out;
}

double max_step_gain(const HorizonView& view, int i) {
  const auto& s = view.ev[i];
  return view.delta_t_h * s.eta_charge * view.p_max_charge[i] / s.capacity_kwh;
}

}  // namespace

bool HorizonView::any_connected() const {
  return std::any_of(session.begin(), session.end(), [](int s) { return s >= 0; });
}

HorizonView build_horizon_view(const PoolState& state, const Scenario& scenario,
                               std::span<const TransformerForecast> forecasts, int horizon) {
  if (horizon < 1) throw std::invalid_argument("build_horizon_view: horizon must be >= 1");
  const int I = static_cast<int>(scenario.chargers.size());
  const int H = horizon;
  const int k = state.step;
  HorizonView v;
  v.step = k;
  v.horizon = H;
  v.delta_t_h = scenario.sim.delta_t_h();
  v.xi = Eigen::MatrixXd::Zero(I, H);
  v.b_charge = Eigen::MatrixXd::Zero(I, H);
  v.b_discharge = Eigen::MatrixXd::Zero(I, H);
  v.x0 = Eigen::VectorXd::Zero(I);
  v.session.assign(I, -1);
  v.ev.assign(I, EvSession{});
  v.p_max_charge.assign(I, 0.0);
  v.p_max_discharge.assign(I, 0.0);
  v.min_current.assign(I, 6);
  v.max_current.assign(I, 32);

  for (int i = 0; i < I; ++i) {
    const auto& spec = scenario.chargers[i];
    v.min_current[i] = spec.min_current_a;
    v.max_current[i] = spec.max_current_a;
    const auto& c = state.chargers[i];
    if (!c.connected || c.session < 0) continue;
    const auto& s = scenario.sessions[c.session];
    v.session[i] = c.session;
    v.ev[i] = s;
    v.x0(i) = c.soc;
    v.p_max_charge[i] = std::min(spec.max_charge_kw, s.max_charge_kw);
    v.p_max_discharge[i] = std::min(spec.max_discharge_kw, s.max_discharge_kw);
    for (int h = 0; h < H; ++h) {
      if (k + h >= s.departure_step) break;
      v.xi(i, h) = 1.0;
      v.b_charge(i, h) = v.delta_t_h * s.eta_charge / s.capacity_kwh;
      v.b_discharge(i, h) = v.delta_t_h / (s.capacity_kwh * s.eta_discharge);
    }
  }

  const int G = static_cast<int>(scenario.transformers.size());
  v.forecasts.resize(G);
  v.limit_kw.resize(G);
  v.transformer_chargers.resize(G);
  for (int g = 0; g < G; ++g) {
    const auto& t = scenario.transformers[g];
    v.limit_kw[g] = t.power_limit_kw;
    v.transformer_chargers[g] = t.charger_ids;
    if (g < static_cast<int>(forecasts.size())) {
      v.forecasts[g].load_kw = padded(forecasts[g].load_kw, H);
      v.forecasts[g].pv_kw = padded(forecasts[g].pv_kw, H);
      v.forecasts[g].dr_reduction_kw = padded(forecasts[g].dr_reduction_kw, H);
    } else {
      v.forecasts[g].load_kw.assign(H, 0.0);
      v.forecasts[g].pv_kw.assign(H, 0.0);
      v.forecasts[g].dr_reduction_kw.assign(H, 0.0);
    }
  }
  v.prices.charge = slice(scenario.prices.charge, k, H);
  v.prices.discharge = slice(scenario.prices.discharge, k, H);
  v.prices.flex_charge = slice(scenario.prices.flex_charge, k, H);
  v.prices.flex_discharge = slice(scenario.prices.flex_discharge, k, H);
  return v;
}

ChargerLift lift_charger(const HorizonView& view, int i) {
  const int H = view.horizon;
  ChargerLift l;
  l.a = Eigen::VectorXd::Zero(H);
  l.g_charge = Eigen::MatrixXd::Zero(H, H);
  l.g_discharge = Eigen::MatrixXd::Zero(H, H);
  double carry = 1.0;
  for (int h = 0; h < H; ++h) {
    const double xi = view.xi(i, h);
    carry *= xi;
    l.a(h) = carry;
    for (int t = 0; t < h; ++t) {
      l.g_charge(h, t) = xi * l.g_charge(h - 1, t);
      l.g_discharge(h, t) = xi * l.g_discharge(h - 1, t);
    }
    l.g_charge(h, h) = view.b_charge(i, h);
    l.g_discharge(h, h) = -view.b_discharge(i, h);
  }
  return l;
}

LiftedModel lift(const HorizonView& view, const Eigen::VectorXd& x0) {
  const int I = view.chargers();
  const int H = view.horizon;
  if (x0.size() != I) throw std::invalid_argument("lift: state size mismatch");
  LiftedModel m;
  m.chargers = I;
  m.horizon = H;
  m.x0 = x0;
  m.A_stack = Eigen::MatrixXd::Zero(H * I, I);
  m.G_stack = Eigen::MatrixXd::Zero(H * I, 2 * H * I);
  for (int i = 0; i < I; ++i) {
    const ChargerLift l = lift_charger(view, i);
    for (int h = 0; h < H; ++h) {
      m.A_stack(m.state_row(h, i), i) = l.a(h);
      for (int t = 0; t <= h; ++t) {
        m.G_stack(m.state_row(h, i), m.charge_col(t, i)) = l.g_charge(h, t);
        m.G_stack(m.state_row(h, i), m.discharge_col(t, i)) = l.g_discharge(h, t);
      }
    }
  }
  return m;
}

Eigen::MatrixXd soc_lower_bounds(const HorizonView& view, const Eigen::VectorXd& x0) {
  const int I = view.chargers();
  const int H = view.horizon;
  Eigen::MatrixXd lb = Eigen::MatrixXd::Zero(I, H);
  for (int i = 0; i < I; ++i) {
    if (!view.connected(i)) continue;
    const double bound = soc_floor_bound(x0(i), view.ev[i].soc_floor);
    for (int h = 0; h < H; ++h) {
      if (view.xi(i, h) > 0.0) lb(i, h) = bound;
    }
  }
  return lb;
}

std::vector<DepartureBound> departure_constraints(const HorizonView& view) {
  std::vector<DepartureBound> out;
  const int H = view.horizon;
  const int k = view.step;
  for (int i = 0; i < view.chargers(); ++i) {
    if (!view.connected(i)) continue;
    const auto& s = view.ev[i];
    const int d = s.departure_step;
    DepartureBound b;
    b.charger = i;
    if (d <= k + H) {
      b.row = d - k - 1;
      if (b.row < 0) continue;
      b.min_soc = s.soc_required_min;
      b.max_soc = s.soc_required_max;
    } else {
      b.row = H - 1;
      b.terminal = true;
      const double floor = soc_floor_bound(view.x0(i), s.soc_floor);
      b.min_soc = std::max(floor, s.soc_required_min - (d - k - H) * max_step_gain(view, i));
      b.max_soc = 1.0;
    }
    out.push_back(b);
  }
  return out;
}

std::vector<int> must_charge_rows(const HorizonView& view) {
  const int H = view.horizon;
  const int k = view.step;
  std::vector<int> rows(view.chargers(), H);
  for (int i = 0; i < view.chargers(); ++i) {
    if (!view.connected(i)) continue;
    const auto& s = view.ev[i];
    const double gain = max_step_gain(view, i);
    const double need = std::max(0.0, s.soc_required_min - view.x0(i));
    const int steps = gain > 0.0 ? static_cast<int>(std::ceil(need / gain - 1e-9)) : 0;
    const int boundary = s.departure_step - steps;
    int row = std::min(boundary - k, s.departure_step - k - 1);
    rows[i] = std::clamp(row, 0, H);
  }
  return rows;
}

}  // namespace evmpc
