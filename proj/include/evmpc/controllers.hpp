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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evmpc/optimizer.hpp"
#include "evmpc/prediction.hpp"
#include "evmpc/scenario.hpp"
#include "evmpc/simengine.hpp"

namespace evmpc {

struct ControllerConfig {
  ControllerKind kind = ControllerKind::EmpcV2g;
  int horizon = 10;
  long node_limit = 200;
  double time_limit_s = 10.0;
  int heuristic_frequency = 10;
  double slack_penalty = 0.0;  // EUR per unit of SoC shortfall, 0 = automatic
  bool warm_start = true;
};

ControllerConfig controller_config(const Config& config);

struct BuildOptions {
  bool with_slack = false;
  double slack_penalty = 0.0;
};

/// Optimization problem for one controller step together with the variable
/// index of every planned quantity (-1 where it does not exist).
struct ControllerProblem {
  opt::MilpProblem problem;
  Eigen::MatrixXi pc;
  Eigen::MatrixXi pd;
  Eigen::MatrixXi z;
  Eigen::MatrixXi fc;
  Eigen::MatrixXi fd;
  std::vector<int> slack_vars;
  bool v2g = false;
  bool ocmf = false;
};

ControllerProblem build_empc(const HorizonView& view, bool v2g, const BuildOptions& options = {});
ControllerProblem build_ocmf(const HorizonView& view, bool v2g, const BuildOptions& options = {});

/// Automatic departure-slack penalty for a view, in EUR per unit of SoC.
double default_slack_penalty(const HorizonView& view);

/// Pilot levels (0 or min..max current steps) for each charger at step k.
/// Positive levels charge and negative levels discharge.
std::vector<int> afap_levels(const HorizonView& view);

/// Rounds planned first-step powers onto the pilot grid without undershooting
/// the plan's charging or overshooting its discharging; G2V charging stops at
/// the departure target.
std::vector<int> snap_levels(const HorizonView& view, std::span<const double> p_charge,
                             std::span<const double> p_discharge, bool v2g);

/// Lowers the largest charging levels until every transformer respects its
/// measured headroom at step k.
void enforce_headroom(const HorizonView& view, std::vector<int>& levels);

std::vector<double> levels_to_actions(const HorizonView& view, std::span<const int> levels);

struct ActionPlan {
  std::vector<double> actions;
  Eigen::MatrixXd p_charge;
  Eigen::MatrixXd p_discharge;
  Eigen::MatrixXd f_charge;
  Eigen::MatrixXd f_discharge;
  std::string status;  // solver status, "afap", "idle" or "fallback"
  bool solved = false;
  bool slack_used = false;
  bool fallback = false;
  double objective = 0.0;
  long nodes = 0;
  double solve_ms = 0.0;
  double total_flex_kw = 0.0;
};

struct StepLog {
  int step = 0;
  std::string status;
  double objective = 0.0;
  long nodes = 0;
  double solve_ms = 0.0;
  bool slack_used = false;
  double total_flex_kw = 0.0;
};

class Controller {
 public:
  explicit Controller(ControllerConfig config);

  ActionPlan act(const PoolState& state, const Scenario& scenario,
                 std::span<const TransformerForecast> forecasts);

  const ControllerConfig& config() const { return config_; }
  const std::vector<StepLog>& log() const { return log_; }
  void reset();

 private:
  ActionPlan plan_mpc(const HorizonView& view);
  std::vector<double> warm_start(const HorizonView& view, const ControllerProblem& cp) const;
  void remember(const HorizonView& view, const ActionPlan& plan);

  ControllerConfig config_;
  std::vector<StepLog> log_;
  int prev_step_ = -1;
  std::vector<int> prev_session_;
  ActionPlan prev_plan_;
};

}  // namespace evmpc
