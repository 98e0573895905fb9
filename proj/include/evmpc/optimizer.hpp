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

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evmpc::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Term {
  int var;
  double coeff;
};

/// A constraint row lo <= sum(coeff * x[var]) <= hi. One-sided rows carry an
/// infinite bound on the open side.
struct Row {
  std::vector<Term> terms;
  double lo = -kInf;
  double hi = kInf;
  std::string name;

  Sense sense() const;
};

struct Variable {
  double lo = 0.0;
  double hi = kInf;
  double cost = 0.0;
  bool binary = false;
  std::string name;
};

/// Minimization problem with box-bounded variables, sparse rows and an
/// optional binary mask. Immutable once handed to a solver.
class MilpProblem {
 public:
  int add_variable(double lo, double hi, double cost, bool binary = false,
                   std::string name = {});
  int add_constraint(std::vector<Term> terms, Sense sense, double rhs,
                     std::string name = {});
  int add_range(std::vector<Term> terms, double lo, double hi,
                std::string name = {});

  void set_bounds(int var, double lo, double hi);
  void set_cost(int var, double cost);
  void set_warm_start(std::vector<double> values);

  int n_vars() const { return static_cast<int>(vars_.size()); }
  int n_rows() const { return static_cast<int>(rows_.size()); }
  int n_binaries() const;
  bool has_binaries() const { return n_binaries() > 0; }

  const Variable& variable(int j) const { return vars_[j]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const Row& row(int i) const { return rows_[i]; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& warm_start() const { return warm_start_; }

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;

  double objective_value(std::span<const double> x) const;
  /// Largest violation over variable bounds and rows.
  double max_violation(std::span<const double> x) const;
  double max_integrality_violation(std::span<const double> x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<double> warm_start_;
};

enum class SolveStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NodeLimit,
  TimeLimit,
  NumericalError,
  SizeLimit,
};

std::string_view to_string(SolveStatus status);

struct SolveOptions {
  long node_limit = 100000;
  double time_limit_s = kInf;
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  // Dense tableau guard: rows * (vars + rows) above this is refused.
  long long max_tableau_entries = 30'000'000;
  // Run the rounding heuristic every this many nodes (0 = root only).
  int heuristic_frequency = 10;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::NumericalError;
  std::vector<double> values;
  double objective = kInf;
  double best_bound = -kInf;
  double mip_gap = kInf;
  long node_count = 0;
  long lp_iterations = 0;
  double solve_time_s = 0.0;
  // Filled for pure LPs solved to optimality.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;

  bool has_solution() const { return !values.empty(); }
};

MilpSolution solve_lp(const MilpProblem& problem, const SolveOptions& options = {});
MilpSolution solve_milp(const MilpProblem& problem, const SolveOptions& options = {});

/// CPLEX-style LP text, for cross-checking with external solvers. Ranged rows
/// are emitted as two one-sided rows.
void write_lp_format(const MilpProblem& problem, std::ostream& out);

}  // namespace evmpc::opt
