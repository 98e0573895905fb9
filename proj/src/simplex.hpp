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
#include <vector>

#include "evmpc/optimizer.hpp"

namespace evmpc::opt::detail {

// Primal simplex on a dense tableau with bounded structural and logical
// variables. Row i of the problem becomes a_i x - s_i = 0 with the logical s_i
// carrying the row bounds, so the slack basis is always available as a start.
// Infeasible starts are repaired by a composite phase 1 that minimises the sum
// of bound violations of basic variables.
//
// The object is copyable: branch-and-bound children copy their parent's final
// tableau, tighten one bound and re-run from that basis.
class BoundedSimplex {
 public:
  enum class Result { Optimal, Infeasible, Unbounded, IterationLimit };

  BoundedSimplex(const MilpProblem& problem, double primal_tol = 1e-9);

  Result solve();

  void set_var_bounds(int j, double lo, double hi);
  double var_lo(int j) const { return lo_[j]; }
  double var_hi(int j) const { return hi_[j]; }

  std::vector<double> primal() const;
  double objective() const;
  // Valid after Result::Optimal.
  std::vector<double> row_duals() const;
  std::vector<double> reduced_costs() const;

  long iterations() const { return iterations_; }
  void reset_iterations() { iterations_ = 0; }
  int rows() const { return m_; }
  int structurals() const { return n_; }

 private:
  enum class State : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * total_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * total_ + j]; }

  bool is_fixed(int j) const { return hi_[j] - lo_[j] <= 1e-12; }
  void recompute_basics();
  bool phase1_costs();
  void phase2_costs();
  int choose_entering() const;
  // Returns false when the ray is unbounded.
  bool iterate(int q, bool phase1);
  void pivot(int r, int q);

  int m_ = 0;
  int n_ = 0;
  int total_ = 0;
  double primal_tol_;
  double dual_tol_ = 1e-9;
  double pivot_tol_ = 1e-9;
  std::vector<double> tab_;
  std::vector<double> lo_, hi_, cost_, x_, d_;
  std::vector<int> basis_;
  std::vector<State> state_;
  std::vector<int> scratch_;
  long iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
  bool unbounded_in_phase1_ = false;
};

}  // namespace evmpc::opt::detail
