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

#include "evmpc/controllers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace evmpc {

namespace {

constexpr double kTinyKw = 1e-6;
constexpr double kLevelTol = 1e-6;
constexpr double kTransformerPenaltyFactor = 100.0;
// EUR per kW of discharge; breaks ties in favour of not cycling energy for free.
constexpr double kDischargeTieBreak = 1e-6;

// Discharge prices are bounded by twice the charge price; leaving them out
// keeps G2V problems independent of the discharge multiplier.
double max_price(const HorizonView& v) {
  double m = 1e-3;
  for (const auto* s : {&v.prices.charge, &v.prices.flex_charge, &v.prices.flex_discharge}) {
    for (double p : *s) m = std::max(m, std::abs(p));
  }
  return 2.0 * m;
}

double charge_unit_kw(const HorizonView& v, int i) {
  return v.p_max_charge[i] / v.max_current[i];
}

double discharge_unit_kw(const HorizonView& v, int i) {
  return v.p_max_discharge[i] / v.max_current[i];
}

// SoC gained per charging level unit over one step.
double charge_unit_soc(const HorizonView& v, int i) {
  const auto& s = v.ev[i];
  return charge_unit_kw(v, i) * v.delta_t_h * s.eta_charge / s.capacity_kwh;
}

int units_to_target(const HorizonView& v, int i) {
  const double need = v.ev[i].soc_required_min - v.x0(i);
  const double u = charge_unit_soc(v, i);
  if (need <= 0.0 || u <= 0.0) return 0;
  return static_cast<int>(std::ceil(need / u - kLevelTol));
}

int units_to_full(const HorizonView& v, int i) {
  const double u = charge_unit_soc(v, i);
  if (u <= 0.0) return 0;
  return static_cast<int>(std::floor((1.0 - v.x0(i)) / u + kLevelTol));
}

// Avoids leaving a remainder below the minimum level, which could never be
// delivered exactly afterwards.
int settle_remainder(int n, int remaining, int n_min, int n_max) {
  if (n > 0 && remaining > n && remaining - n < n_min) {
    return remaining <= n_max ? remaining : remaining - n_min;
  }
  return n;
}

int finish_charge_level(const HorizonView& v, int i, int n) {
  if (n > 0 && n < v.min_current[i]) n = v.min_current[i];
  n = std::min(n, units_to_full(v, i));
  return n < v.min_current[i] ? 0 : n;
}

ControllerProblem build(const HorizonView& v, bool v2g, bool ocmf, const BuildOptions& o) {
  const int I = v.chargers();
  const int H = v.horizon;
  const double dt = v.delta_t_h;
  ControllerProblem cp;
  cp.v2g = v2g;
  cp.ocmf = ocmf;
  cp.pc = Eigen::MatrixXi::Constant(I, H, -1);
  cp.pd = Eigen::MatrixXi::Constant(I, H, -1);
  cp.z = Eigen::MatrixXi::Constant(I, H, -1);
  cp.fc = Eigen::MatrixXi::Constant(I, H, -1);
  cp.fd = Eigen::MatrixXi::Constant(I, H, -1);
  auto& p = cp.problem;
  const std::vector<int> flex_until = ocmf ? must_charge_rows(v) : std::vector<int>(I, 0);
  const double penalty = o.slack_penalty > 0.0 ? o.slack_penalty : default_slack_penalty(v);

  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < I; ++i) {
      if (v.xi(i, h) <= 0.0) continue;
      const double pc_max = v.p_max_charge[i];
      const double pd_max = v.p_max_discharge[i];
      const int pc = p.add_variable(0.0, pc_max, dt * v.prices.charge[h]);
      cp.pc(i, h) = pc;
      const bool flex = ocmf && h < flex_until[i];
      int fc = -1;
      if (flex) {
        fc = p.add_variable(0.0, pc_max, -dt * v.prices.flex_charge[h]);
        cp.fc(i, h) = fc;
        p.add_constraint({{fc, 1.0}, {pc, -1.0}}, opt::Sense::LessEqual, 0.0);
      }
      if (!v2g) {
        if (flex) p.add_constraint({{pc, 1.0}, {fc, 1.0}}, opt::Sense::LessEqual, pc_max);
        continue;
      }
      const int pd = p.add_variable(0.0, pd_max, -dt * v.prices.discharge[h] + kDischargeTieBreak);
      const int z = p.add_variable(0.0, 1.0, 0.0, true);
      cp.pd(i, h) = pd;
      cp.z(i, h) = z;
      std::vector<opt::Term> charge_side{{pc, 1.0}, {z, -pc_max}};
      std::vector<opt::Term> discharge_side{{pd, 1.0}, {z, pd_max}};
      if (flex) {
        const int fd = p.add_variable(0.0, pd_max, -dt * v.prices.flex_discharge[h]);
        cp.fd(i, h) = fd;
        p.add_constraint({{fd, 1.0}, {pd, -1.0}}, opt::Sense::LessEqual, 0.0);
        charge_side.push_back({fc, 1.0});
        discharge_side.push_back({fd, 1.0});
      }
      p.add_constraint(std::move(charge_side), opt::Sense::LessEqual, 0.0);
      p.add_constraint(std::move(discharge_side), opt::Sense::LessEqual, pd_max);
    }
  }

  const Eigen::MatrixXd lb = soc_lower_bounds(v, v.x0);
  std::map<std::pair<int, int>, DepartureBound> dep;
  for (const auto& b : departure_constraints(v)) dep[{b.charger, b.row}] = b;
  for (int i = 0; i < I; ++i) {
    if (!v.connected(i)) continue;
    const ChargerLift l = lift_charger(v, i);
    const auto& s = v.ev[i];
    // Rows are scaled from SoC to kW so that coefficients are of order one.
    const double scale = s.capacity_kwh / dt;
    for (int h = 0; h < H; ++h) {
      if (v.xi(i, h) <= 0.0) continue;
      std::vector<opt::Term> terms;
      for (int t = 0; t <= h; ++t) {
        if (cp.pc(i, t) >= 0) terms.push_back({cp.pc(i, t), l.g_charge(h, t) * scale});
        if (cp.pd(i, t) >= 0) terms.push_back({cp.pd(i, t), l.g_discharge(h, t) * scale});
      }
      double lo = lb(i, h);
      double hi = 1.0;
      const auto it = dep.find({i, h});
      const bool departure = it != dep.end();
      if (departure) {
        lo = std::max(lo, it->second.min_soc);
        hi = std::min(hi, it->second.max_soc);
        if (o.with_slack) {
          const int sv = p.add_variable(0.0, opt::kInf, penalty);
          cp.slack_vars.push_back(sv);
          terms.push_back({sv, scale});
        }
      }
      const double base = l.a(h) * v.x0(i);
      p.add_range(std::move(terms), (lo - base) * scale, (hi - base) * scale);
    }
  }

  double e_min = opt::kInf;
  for (int i = 0; i < I; ++i) {
    if (v.connected(i)) e_min = std::min(e_min, v.ev[i].capacity_kwh);
  }
  // Per kW of excess; far above the cost of the same power as departure shortfall.
  const double transformer_penalty =
      std::isfinite(e_min) ? kTransformerPenaltyFactor * penalty * dt / e_min : 0.0;
  for (std::size_t g = 0; g < v.transformer_chargers.size(); ++g) {
    const auto& f = v.forecasts[g];
    for (int h = 0; h < H; ++h) {
      std::vector<opt::Term> terms;
      for (int i : v.transformer_chargers[g]) {
        if (cp.pc(i, h) >= 0) terms.push_back({cp.pc(i, h), 1.0});
        if (cp.pd(i, h) >= 0) terms.push_back({cp.pd(i, h), -1.0});
      }
      if (terms.empty()) continue;
      if (o.with_slack) {
        const int sv = p.add_variable(0.0, opt::kInf, transformer_penalty);
        cp.slack_vars.push_back(sv);
        terms.push_back({sv, -1.0});
      }
      double rhs = v.limit_kw[g] - f.dr_reduction_kw[h] - f.load_kw[h] + f.pv_kw[h];
      // Without discharge the pool cannot offset a forecast above the limit.
      if (!v2g) rhs = std::max(rhs, 0.0);
      p.add_constraint(std::move(terms), opt::Sense::LessEqual, rhs);
    }
  }
  return cp;
}

}  // namespace

ControllerConfig controller_config(const Config& config) {
  ControllerConfig c;
  c.kind = config.controller.kind;
  c.horizon = config.sim.horizon_steps;
  c.node_limit = config.controller.node_limit;
  c.time_limit_s = config.controller.time_limit_s;
  c.heuristic_frequency = config.controller.heuristic_frequency;
  c.slack_penalty = config.controller.slack_penalty;
  c.warm_start = config.controller.warm_start;
  return c;
}

double default_slack_penalty(const HorizonView& view) {
  double e_max = 1.0;
  for (int i = 0; i < view.chargers(); ++i) {
    if (view.connected(i)) e_max = std::max(e_max, view.ev[i].capacity_kwh);
  }
  return 100.0 * max_price(view) * e_max / view.delta_t_h;
}

ControllerProblem build_empc(const HorizonView& view, bool v2g, const BuildOptions& options) {
  return build(view, v2g, false, options);
}

ControllerProblem build_ocmf(const HorizonView& view, bool v2g, const BuildOptions& options) {
  return build(view, v2g, true, options);
}

std::vector<int> afap_levels(const HorizonView& view) {
  std::vector<int> levels(view.chargers(), 0);
  for (int i = 0; i < view.chargers(); ++i) {
    if (!view.connected(i)) continue;
    const int remaining = units_to_target(view, i);
    if (remaining <= 0) continue;
    int n = std::min(view.max_current[i], remaining);
    n = settle_remainder(n, remaining, view.min_current[i], view.max_current[i]);
    levels[i] = finish_charge_level(view, i, n);
  }
  return levels;
}

std::vector<int> snap_levels(const HorizonView& view, std::span<const double> p_charge,
                             std::span<const double> p_discharge, bool v2g) {
  std::vector<int> levels(view.chargers(), 0);
  for (int i = 0; i < view.chargers(); ++i) {
    if (!view.connected(i)) continue;
    const int n_min = view.min_current[i];
    const int n_max = view.max_current[i];
    const double pc = p_charge[i];
    const double pd = p_discharge[i];
    if (pc >= pd && pc > kTinyKw) {
      const int remaining = units_to_target(view, i);
      int n = std::min(n_max, static_cast<int>(std::ceil(pc / charge_unit_kw(view, i) - kLevelTol)));
      if (!v2g) n = std::min(n, remaining);
      if (n > 0) n = std::max(n, n_min);
      n = settle_remainder(n, remaining, n_min, n_max);
      levels[i] = finish_charge_level(view, i, n);
    } else if (v2g && pd > kTinyKw) {
      int n = std::min(n_max, static_cast<int>(std::floor(pd / discharge_unit_kw(view, i) + kLevelTol)));
      levels[i] = n < n_min ? 0 : -n;
    }
  }
  return levels;
}

void enforce_headroom(const HorizonView& view, std::vector<int>& levels) {
  // Steps an EV could still wait before it must charge at full power.
  auto laxity = [&](int i) {
    const int needed = (units_to_target(view, i) + view.max_current[i] - 1) / view.max_current[i];
    return view.ev[i].departure_step - view.step - needed;
  };
  for (std::size_t g = 0; g < view.transformer_chargers.size(); ++g) {
    const auto& f = view.forecasts[g];
    const double limit = view.limit_kw[g] - f.dr_reduction_kw[0];
    const auto& ids = view.transformer_chargers[g];
    for (;;) {
      double net = f.load_kw[0] - f.pv_kw[0];
      int pick = -1;
      for (int i : ids) {
        if (levels[i] > 0) {
          net += levels[i] * charge_unit_kw(view, i);
          if (pick < 0) {
            pick = i;
            continue;
          }
          const int a = laxity(i), b = laxity(pick);
          if (a > b || (a == b && levels[i] * charge_unit_kw(view, i) >
                                      levels[pick] * charge_unit_kw(view, pick))) {
            pick = i;
          }
        } else if (levels[i] < 0) {
          net += levels[i] * discharge_unit_kw(view, i);
        }
      }
      if (net <= limit + 1e-9 || pick < 0) break;
      const int n_min = view.min_current[pick];
      const int remaining = units_to_target(view, pick);
      int n = levels[pick] - 1;
      if (remaining > n && remaining - n < n_min) n = remaining - n_min;
      levels[pick] = n < n_min ? 0 : n;
    }
  }
}

std::vector<double> levels_to_actions(const HorizonView& view, std::span<const int> levels) {
  std::vector<double> a(view.chargers(), 0.0);
  for (int i = 0; i < view.chargers(); ++i) {
    a[i] = static_cast<double>(levels[i]) / view.max_current[i];
  }
  return a;
}

Controller::Controller(ControllerConfig config) : config_(config) {
  if (config_.horizon < 1) throw std::invalid_argument("controller horizon must be >= 1");
}

void Controller::reset() {
  log_.clear();
  prev_step_ = -1;
  prev_session_.clear();
  prev_plan_ = ActionPlan{};
}

ActionPlan Controller::act(const PoolState& state, const Scenario& scenario,
                           std::span<const TransformerForecast> forecasts) {
  const auto t0 = std::chrono::steady_clock::now();
  const HorizonView view = build_horizon_view(state, scenario, forecasts, config_.horizon);
  ActionPlan plan;
  std::vector<int> levels;
  if (config_.kind == ControllerKind::Afap) {
    plan.status = "afap";
    levels = afap_levels(view);
  } else if (!view.any_connected()) {
    plan.status = "idle";
    levels.assign(view.chargers(), 0);
  } else {
    plan = plan_mpc(view);
    if (plan.fallback) {
      levels = afap_levels(view);
    } else {
      std::vector<double> pc(view.chargers()), pd(view.chargers());
      for (int i = 0; i < view.chargers(); ++i) {
        pc[i] = plan.p_charge(i, 0);
        pd[i] = plan.p_discharge(i, 0);
      }
      levels = snap_levels(view, pc, pd, is_v2g(config_.kind));
      enforce_headroom(view, levels);
    }
  }
  plan.actions = levels_to_actions(view, levels);
  plan.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  log_.push_back(StepLog{view.step, plan.status, plan.objective, plan.nodes, plan.solve_ms,
                         plan.slack_used, plan.total_flex_kw});
  remember(view, plan);
  return plan;
}

ActionPlan Controller::plan_mpc(const HorizonView& view) {
  const bool v2g = is_v2g(config_.kind);
  const bool ocmf = is_ocmf(config_.kind);
  BuildOptions bo;
  bo.slack_penalty = config_.slack_penalty;
  opt::SolveOptions so;
  so.node_limit = config_.node_limit;
  so.time_limit_s = config_.time_limit_s;
  so.heuristic_frequency = config_.heuristic_frequency;

  auto solve = [&](ControllerProblem& cp) {
    if (cp.problem.has_binaries()) {
      if (config_.warm_start) cp.problem.set_warm_start(warm_start(view, cp));
      return opt::solve_milp(cp.problem, so);
    }
    return opt::solve_lp(cp.problem, so);
  };

  ActionPlan plan;
  ControllerProblem cp = build(view, v2g, ocmf, bo);
  opt::MilpSolution sol = solve(cp);
  plan.nodes = sol.node_count;
  if (sol.status == opt::SolveStatus::Infeasible) {
    bo.with_slack = true;
    cp = build(view, v2g, ocmf, bo);
    sol = solve(cp);
    plan.nodes += sol.node_count;
    plan.slack_used = true;
  }
  plan.status = std::string(opt::to_string(sol.status));
  if (!sol.has_solution()) {
    plan.fallback = true;
    plan.status = "fallback";
    return plan;
  }
  plan.solved = true;
  plan.objective = sol.objective;
  const int I = view.chargers();
  const int H = view.horizon;
  plan.p_charge = Eigen::MatrixXd::Zero(I, H);
  plan.p_discharge = Eigen::MatrixXd::Zero(I, H);
  plan.f_charge = Eigen::MatrixXd::Zero(I, H);
  plan.f_discharge = Eigen::MatrixXd::Zero(I, H);
  auto value = [&](int var) { return var >= 0 ? std::max(0.0, sol.values[var]) : 0.0; };
  for (int i = 0; i < I; ++i) {
    for (int h = 0; h < H; ++h) {
      plan.p_charge(i, h) = value(cp.pc(i, h));
      plan.p_discharge(i, h) = value(cp.pd(i, h));
      plan.f_charge(i, h) = value(cp.fc(i, h));
      plan.f_discharge(i, h) = value(cp.fd(i, h));
    }
    plan.total_flex_kw += plan.f_charge(i, 0) + plan.f_discharge(i, 0);
  }
  if (plan.slack_used) {
    double slack = 0.0;
    for (int sv : cp.slack_vars) slack += value(sv);
    plan.slack_used = slack > 1e-7;
  }
  return plan;
}

std::vector<double> Controller::warm_start(const HorizonView& view,
                                           const ControllerProblem& cp) const {
  std::vector<double> x(cp.problem.n_vars(), 0.0);
  const bool shifted = prev_plan_.solved && prev_step_ == view.step - 1;
  const int H = view.horizon;
  for (int i = 0; i < view.chargers(); ++i) {
    const bool same = shifted && i < static_cast<int>(prev_session_.size()) &&
                      prev_session_[i] == view.session[i] && view.session[i] >= 0;
    for (int h = 0; h < H; ++h) {
      double pc = 0.0, pd = 0.0, fc = 0.0, fd = 0.0;
      if (same && h + 1 < prev_plan_.p_charge.cols()) {
        pc = prev_plan_.p_charge(i, h + 1);
        pd = prev_plan_.p_discharge(i, h + 1);
        fc = prev_plan_.f_charge(i, h + 1);
        fd = prev_plan_.f_discharge(i, h + 1);
      }
      if (cp.pc(i, h) >= 0) x[cp.pc(i, h)] = pc;
      if (cp.pd(i, h) >= 0) x[cp.pd(i, h)] = pd;
      if (cp.fc(i, h) >= 0) x[cp.fc(i, h)] = fc;
      if (cp.fd(i, h) >= 0) x[cp.fd(i, h)] = fd;
      if (cp.z(i, h) >= 0) x[cp.z(i, h)] = pd > pc ? 0.0 : 1.0;
    }
  }
  return x;
}

void Controller::remember(const HorizonView& view, const ActionPlan& plan) {
  prev_step_ = view.step;
  prev_session_ = view.session;
  prev_plan_ = plan;
}

}  // namespace evmpc
