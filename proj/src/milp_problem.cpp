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
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "evmpc/optimizer.hpp"

namespace evmpc::opt {

Sense Row::sense() const {
  if (lo == hi) return Sense::Equal;
  if (std::isinf(lo)) return Sense::LessEqual;
  return Sense::GreaterEqual;
}

int MilpProblem::add_variable(double lo, double hi, double cost, bool binary,
                              std::string name) {
  vars_.push_back(Variable{lo, hi, cost, binary, std::move(name)});
  return n_vars() - 1;
}

int MilpProblem::add_constraint(std::vector<Term> terms, Sense sense, double rhs,
                                std::string name) {
  Row row{std::move(terms), -kInf, kInf, std::move(name)};
  switch (sense) {
    case Sense::LessEqual: row.hi = rhs; break;
    case Sense::GreaterEqual: row.lo = rhs; break;
    case Sense::Equal: row.lo = row.hi = rhs; break;
  }
  rows_.push_back(std::move(row));
  return n_rows() - 1;
}

int MilpProblem::add_range(std::vector<Term> terms, double lo, double hi,
                           std::string name) {
  rows_.push_back(Row{std::move(terms), lo, hi, std::move(name)});
  return n_rows() - 1;
}

void MilpProblem::set_bounds(int var, double lo, double hi) {
  vars_.at(var).lo = lo;
  vars_.at(var).hi = hi;
}

void MilpProblem::set_cost(int var, double cost) { vars_.at(var).cost = cost; }

void MilpProblem::set_warm_start(std::vector<double> values) {
  warm_start_ = std::move(values);
}

int MilpProblem::n_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                        [](const Variable& v) { return v.binary; }));
}

void MilpProblem::validate() const {
  for (int j = 0; j < n_vars(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lo) || std::isnan(v.hi) || std::isnan(v.cost) || std::isinf(v.cost)) {
      throw std::invalid_argument("variable " + std::to_string(j) + " has NaN data");
    }
    if (v.lo > v.hi) {
      throw std::invalid_argument("variable " + std::to_string(j) + " has lo > hi");
    }
    if (v.binary && (v.lo < 0.0 || v.hi > 1.0)) {
      throw std::invalid_argument("binary variable " + std::to_string(j) +
                                  " has bounds outside [0, 1]");
    }
  }
  for (int i = 0; i < n_rows(); ++i) {
    const auto& r = rows_[i];
    if (r.lo > r.hi || std::isnan(r.lo) || std::isnan(r.hi)) {
      throw std::invalid_argument("row " + std::to_string(i) + " has inconsistent bounds");
    }
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= n_vars()) {
        throw std::invalid_argument("row " + std::to_string(i) + " references variable " +
                                    std::to_string(t.var) + " out of range");
      }
      if (!std::isfinite(t.coeff)) {
        throw std::invalid_argument("row " + std::to_string(i) + " has a non-finite coefficient");
      }
    }
  }
  if (!warm_start_.empty() && static_cast<int>(warm_start_.size()) != n_vars()) {
    throw std::invalid_argument("warm start length does not match variable count");
  }
}

double MilpProblem::objective_value(std::span<const double> x) const {
  double obj = 0.0;
  for (int j = 0; j < n_vars(); ++j) obj += vars_[j].cost * x[j];
  return obj;
}

double MilpProblem::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < n_vars(); ++j) {
    worst = std::max({worst, vars_[j].lo - x[j], x[j] - vars_[j].hi});
  }
  for (const auto& r : rows_) {
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coeff * x[t.var];
    worst = std::max({worst, r.lo - act, act - r.hi});
  }
  return worst;
}

double MilpProblem::max_integrality_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < n_vars(); ++j) {
    if (vars_[j].binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  return worst;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NumericalError: return "numerical_error";
    case SolveStatus::SizeLimit: return "size_limit";
  }
  return "unknown";
}

namespace {

std::string var_name(const MilpProblem& p, int j) {
  const auto& n = p.variable(j).name;
  return n.empty() ? "x" + std::to_string(j) : n;
}

void write_expr(std::ostream& out, const MilpProblem& p, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coeff == 0.0) continue;
    if (t.coeff < 0.0) {
      out << (first ? "- " : " - ") << -t.coeff << ' ';
    } else {
      out << (first ? "" : " + ") << t.coeff << ' ';
    }
    out << var_name(p, t.var);
    first = false;
  }
  if (first) out << "0 " << var_name(p, 0);
}

}  // namespace

void write_lp_format(const MilpProblem& p, std::ostream& out) {
  auto old_precision = out.precision(17);
  out << "\\ evmpc problem: " << p.n_vars() << " variables, " << p.n_rows() << " rows\n";
  out << "Minimize\n obj: ";
  std::vector<Term> obj;
  for (int j = 0; j < p.n_vars(); ++j) {
    if (p.variable(j).cost != 0.0) obj.push_back({j, p.variable(j).cost});
  }
  if (obj.empty() && p.n_vars() > 0) obj.push_back({0, 0.0});
  write_expr(out, p, obj);
  out << "\nSubject To\n";
  for (int i = 0; i < p.n_rows(); ++i) {
    const auto& r = p.row(i);
    const std::string base = r.name.empty() ? "r" + std::to_string(i) : r.name;
    if (r.lo == r.hi) {
      out << ' ' << base << ": ";
      write_expr(out, p, r.terms);
      out << " = " << r.lo << '\n';
      continue;
    }
    if (std::isfinite(r.lo)) {
      out << ' ' << base << (std::isfinite(r.hi) ? "_lo" : "") << ": ";
      write_expr(out, p, r.terms);
      out << " >= " << r.lo << '\n';
    }
    if (std::isfinite(r.hi)) {
      out << ' ' << base << (std::isfinite(r.lo) ? "_hi" : "") << ": ";
      write_expr(out, p, r.terms);
      out << " <= " << r.hi << '\n';
    }
  }
  out << "Bounds\n";
  for (int j = 0; j < p.n_vars(); ++j) {
    const auto& v = p.variable(j);
    if (v.binary && v.lo == 0.0 && v.hi == 1.0) continue;
    out << ' ';
    if (std::isinf(v.lo) && std::isinf(v.hi)) {
      out << var_name(p, j) << " free\n";
    } else {
      if (std::isinf(v.lo)) out << "-inf"; else out << v.lo;
      out << " <= " << var_name(p, j) << " <= ";
      if (std::isinf(v.hi)) out << "+inf"; else out << v.hi;
      out << '\n';
    }
  }
  if (p.has_binaries()) {
    out << "Binaries\n";
    for (int j = 0; j < p.n_vars(); ++j) {
      if (p.variable(j).binary) out << ' ' << var_name(p, j) << '\n';
    }
  }
  out << "End\n";
  out.precision(old_precision);
}

}  // namespace evmpc::opt
