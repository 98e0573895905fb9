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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "evmpc/optimizer.hpp"
#include "simplex.hpp"

namespace evmpc::opt {

namespace {

using detail::BoundedSimplex;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool too_large(const MilpProblem& p, const SolveOptions& o) {
  const long long m = p.n_rows();
  const long long cols = static_cast<long long>(p.n_vars()) + m;
  return m * cols > o.max_tableau_entries;
}

// Re-runs an LP from the slack basis with the bounds currently held by `from`.
// Used when a warm-started tableau has drifted too far.
BoundedSimplex fresh_copy(const MilpProblem& p, const BoundedSimplex& from) {
  BoundedSimplex s(p);
  for (int j = 0; j < p.n_vars(); ++j) {
    if (s.var_lo(j) != from.var_lo(j) || s.var_hi(j) != from.var_hi(j)) {
      s.set_var_bounds(j, from.var_lo(j), from.var_hi(j));
    }
  }
  return s;
}

void clamp_to_bounds(const MilpProblem& p, std::vector<double>& x) {
  for (int j = 0; j < p.n_vars(); ++j) {
    x[j] = std::clamp(x[j], p.variable(j).lo, p.variable(j).hi);
  }
}

struct Node {
  double bound;
  long seq;
  std::shared_ptr<const BoundedSimplex> parent;
  int var;
  double value;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& p, const SolveOptions& o) : p_(p), o_(o) {
    for (int j = 0; j < p.n_vars(); ++j) {
      if (p.variable(j).binary) binaries_.push_back(j);
    }
  }

  MilpSolution run() {
    const auto t0 = Clock::now();
    MilpSolution sol;

    auto root = std::make_shared<BoundedSimplex>(p_);
    const auto r = root->solve();
    iterations_ += root->iterations();
    node_count_ = 1;
    if (r == BoundedSimplex::Result::Infeasible) {
      sol.status = SolveStatus::Infeasible;
      return finish(sol, t0);
    }
    if (r == BoundedSimplex::Result::Unbounded) {
      sol.status = SolveStatus::Unbounded;
      return finish(sol, t0);
    }
    if (r != BoundedSimplex::Result::Optimal) {
      sol.status = SolveStatus::NumericalError;
      return finish(sol, t0);
    }

    if (!p_.warm_start().empty()) {
      auto ws = p_.warm_start();
      for (int j : binaries_) ws[j] = std::round(ws[j]);
      offer(ws);
      fix_and_offer(*root, ws);
    }

    const double root_bound = root->objective();
    explore(root, root_bound, /*run_heuristic=*/true);

    while (!queue_.empty()) {
      if (prunable(queue_.top().bound)) {
        queue_ = {};
        break;
      }
      if (node_count_ >= o_.node_limit) {
        sol.status = SolveStatus::NodeLimit;
        break;
      }
      if (seconds_since(t0) >= o_.time_limit_s) {
        sol.status = SolveStatus::TimeLimit;
        break;
      }
      Node node = queue_.top();
      queue_.pop();
      auto child = std::make_shared<BoundedSimplex>(*node.parent);
      child->reset_iterations();
      node.parent.reset();
      child->set_var_bounds(node.var, node.value, node.value);
      ++node_count_;
      auto cr = child->solve();
      iterations_ += child->iterations();
      if (cr == BoundedSimplex::Result::IterationLimit) {
        auto redo = std::make_shared<BoundedSimplex>(fresh_copy(p_, *child));
        cr = redo->solve();
        iterations_ += redo->iterations();
        child = redo;
      }
      if (cr != BoundedSimplex::Result::Optimal) continue;
      const double obj = child->objective();
      if (prunable(obj)) continue;
      const bool heuristic =
          o_.heuristic_frequency > 0 && node_count_ % o_.heuristic_frequency == 0;
      explore(child, obj, heuristic);
    }

    if (queue_.empty() && sol.status != SolveStatus::NodeLimit &&
        sol.status != SolveStatus::TimeLimit) {
      sol.status = incumbent_.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
    }
    if (sol.status == SolveStatus::Optimal) {
      sol.best_bound = incumbent_obj_;
    } else if (!queue_.empty()) {
      sol.best_bound = std::min(queue_.top().bound, incumbent_obj_);
    } else {
      sol.best_bound = incumbent_obj_;
    }
    if (!incumbent_.empty()) {
      sol.values = incumbent_;
      sol.objective = incumbent_obj_;
      sol.mip_gap = sol.status == SolveStatus::Optimal
                        ? 0.0
                        : std::max(0.0, incumbent_obj_ - sol.best_bound) /
                              std::max(1e-10, std::abs(incumbent_obj_));
    }
    return finish(sol, t0);
  }

 private:
  bool prunable(double bound) const {
    if (incumbent_.empty()) return false;
    return bound >= incumbent_obj_ - 1e-9 * std::max(1.0, std::abs(incumbent_obj_));
  }

  MilpSolution finish(MilpSolution& sol, Clock::time_point t0) const {
    sol.node_count = node_count_;
    sol.lp_iterations = iterations_;
    sol.solve_time_s = seconds_since(t0);
    return sol;
  }

  void offer(std::vector<double> x) {
    clamp_to_bounds(p_, x);
    if (p_.max_integrality_violation(x) > o_.integrality_tol) return;
    if (p_.max_violation(x) > o_.feasibility_tol) return;
    const double obj = p_.objective_value(x);
    if (incumbent_.empty() || obj < incumbent_obj_ - 1e-12 * std::max(1.0, std::abs(obj))) {
      incumbent_ = std::move(x);
      incumbent_obj_ = obj;
    }
  }

  // Fixes every binary to its rounded value and re-optimises the continuous
  // part; yields a feasible point whenever the rounding admits one.
  void fix_and_offer(const BoundedSimplex& from, const std::vector<double>& x) {
    BoundedSimplex s(from);
    s.reset_iterations();
    for (int j : binaries_) {
      const double v = x[j] >= 0.5 ? 1.0 : 0.0;
      s.set_var_bounds(j, v, v);
    }
    auto r = s.solve();
    iterations_ += s.iterations();
    if (r != BoundedSimplex::Result::Optimal) return;
    auto y = s.primal();
    for (int j : binaries_) y[j] = std::round(y[j]);
    clamp_to_bounds(p_, y);
    if (p_.max_violation(y) > o_.feasibility_tol) {
      BoundedSimplex clean = fresh_copy(p_, s);
      if (clean.solve() != BoundedSimplex::Result::Optimal) return;
      iterations_ += clean.iterations();
      y = clean.primal();
      for (int j : binaries_) y[j] = std::round(y[j]);
    }
    offer(std::move(y));
  }

  void explore(const std::shared_ptr<BoundedSimplex>& s, double bound, bool run_heuristic) {
    const auto x = s->primal();
    int branch = -1;
    double best_frac = o_.integrality_tol;
    for (int j : binaries_) {
      const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      fix_and_offer(*s, x);
      return;
    }
    if (run_heuristic) fix_and_offer(*s, x);
    if (prunable(bound)) return;
    std::shared_ptr<const BoundedSimplex> parent = s;
    // The child on the rounding side of the fractional value is explored first
    // among equal bounds.
    const double first = x[branch] >= 0.5 ? 1.0 : 0.0;
    queue_.push(Node{bound, seq_++, parent, branch, first});
    queue_.push(Node{bound, seq_++, parent, branch, 1.0 - first});
  }

  const MilpProblem& p_;
  const SolveOptions& o_;
  std::vector<int> binaries_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  long node_count_ = 0;
  long iterations_ = 0;
  long seq_ = 0;
};

}  // namespace

MilpSolution solve_lp(const MilpProblem& problem, const SolveOptions& options) {
  const auto t0 = Clock::now();
  problem.validate();
  MilpSolution sol;
  if (too_large(problem, options)) {
    sol.status = SolveStatus::SizeLimit;
    return sol;
  }
  BoundedSimplex s(problem);
  const auto r = s.solve();
  sol.lp_iterations = s.iterations();
  sol.node_count = 1;
  switch (r) {
    case BoundedSimplex::Result::Infeasible: sol.status = SolveStatus::Infeasible; break;
    case BoundedSimplex::Result::Unbounded: sol.status = SolveStatus::Unbounded; break;
    case BoundedSimplex::Result::IterationLimit: sol.status = SolveStatus::NumericalError; break;
    case BoundedSimplex::Result::Optimal: {
      auto x = s.primal();
      clamp_to_bounds(problem, x);
      if (problem.max_violation(x) > options.feasibility_tol) {
        sol.status = SolveStatus::NumericalError;
        break;
      }
      sol.status = SolveStatus::Optimal;
      sol.objective = problem.objective_value(x);
      sol.best_bound = sol.objective;
      sol.mip_gap = 0.0;
      sol.values = std::move(x);
      sol.row_duals = s.row_duals();
      sol.reduced_costs = s.reduced_costs();
      break;
    }
  }
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

MilpSolution solve_milp(const MilpProblem& problem, const SolveOptions& options) {
  if (!problem.has_binaries()) return solve_lp(problem, options);
  problem.validate();
  if (too_large(problem, options)) {
    MilpSolution sol;
    sol.status = SolveStatus::SizeLimit;
    return sol;
  }
  return BranchAndBound(problem, options).run();
}

}  // namespace evmpc::opt
