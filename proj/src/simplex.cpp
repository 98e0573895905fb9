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

#include "simplex.hpp"

#include <algorithm>
#include <cmath>

namespace evmpc::opt::detail {

namespace {
constexpr int kDegenerateRunBeforeBland = 50;
constexpr double kDropTol = 1e-14;
}  // namespace

BoundedSimplex::BoundedSimplex(const MilpProblem& problem, double primal_tol)
    : m_(problem.n_rows()),
      n_(problem.n_vars()),
      total_(problem.n_vars() + problem.n_rows()),
      primal_tol_(primal_tol) {
  tab_.assign(static_cast<std::size_t>(m_) * total_, 0.0);
  lo_.resize(total_);
  hi_.resize(total_);
  cost_.assign(total_, 0.0);
  x_.assign(total_, 0.0);
  d_.assign(total_, 0.0);
  state_.resize(total_);
  basis_.resize(m_);

  for (int j = 0; j < n_; ++j) {
    const auto& v = problem.variable(j);
    lo_[j] = v.lo;
    hi_[j] = v.hi;
    cost_[j] = v.cost;
    if (std::isfinite(v.lo)) {
      state_[j] = State::AtLower;
      x_[j] = v.lo;
    } else if (std::isfinite(v.hi)) {
      state_[j] = State::AtUpper;
      x_[j] = v.hi;
    } else {
      state_[j] = State::FreeZero;
      x_[j] = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    const auto& row = problem.row(i);
    for (const auto& t : row.terms) at(i, t.var) -= t.coeff;
    at(i, n_ + i) = 1.0;
    lo_[n_ + i] = row.lo;
    hi_[n_ + i] = row.hi;
    basis_[i] = n_ + i;
    state_[n_ + i] = State::Basic;
  }
  recompute_basics();
}

void BoundedSimplex::recompute_basics() {
  for (int j = 0; j < total_; ++j) {
    switch (state_[j]) {
      case State::AtLower: x_[j] = lo_[j]; break;
      case State::AtUpper: x_[j] = hi_[j]; break;
      case State::FreeZero: x_[j] = 0.0; break;
      case State::Basic: break;
    }
  }
  for (int i = 0; i < m_; ++i) {
    double s = 0.0;
    const double* row = &tab_[static_cast<std::size_t>(i) * total_];
    for (int j = 0; j < total_; ++j) {
      if (row[j] != 0.0 && state_[j] != State::Basic) s += row[j] * x_[j];
    }
    x_[basis_[i]] = -s;
  }
}

bool BoundedSimplex::phase1_costs() {
  bool any = false;
  for (int i = 0; i < m_ && !any; ++i) {
    const int b = basis_[i];
    any = x_[b] < lo_[b] - primal_tol_ || x_[b] > hi_[b] + primal_tol_;
  }
  if (!any) return false;
  std::fill(d_.begin(), d_.end(), 0.0);
  for (int i = 0; i < m_; ++i) {
    const int b = basis_[i];
    double w = 0.0;
    if (x_[b] < lo_[b] - primal_tol_) {
      w = -1.0;
    } else if (x_[b] > hi_[b] + primal_tol_) {
      w = 1.0;
    } else {
      continue;
    }
    const double* row = &tab_[static_cast<std::size_t>(i) * total_];
    for (int j = 0; j < total_; ++j) {
      if (row[j] != 0.0) d_[j] -= w * row[j];
    }
  }
  return any;
}

void BoundedSimplex::phase2_costs() {
  d_ = cost_;
  for (int i = 0; i < m_; ++i) {
    const double cb = cost_[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &tab_[static_cast<std::size_t>(i) * total_];
    for (int j = 0; j < total_; ++j) {
      if (row[j] != 0.0) d_[j] -= cb * row[j];
    }
  }
  for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

int BoundedSimplex::choose_entering() const {
  int best = -1;
  double best_score = dual_tol_;
  for (int j = 0; j < total_; ++j) {
    const State s = state_[j];
    if (s == State::Basic || is_fixed(j)) continue;
    const double dj = d_[j];
    double score = 0.0;
    if (s == State::AtLower) {
      score = -dj;
    } else if (s == State::AtUpper) {
      score = dj;
    } else {
      score = std::abs(dj);
    }
    if (score <= dual_tol_) continue;
    if (bland_) return j;
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

bool BoundedSimplex::iterate(int q, bool phase1) {
  int dir = 1;
  switch (state_[q]) {
    case State::AtLower: dir = 1; break;
    case State::AtUpper: dir = -1; break;
    default: dir = d_[q] < 0.0 ? 1 : -1; break;
  }

  double best_lim = (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) ? hi_[q] - lo_[q] : kInf;
  int leave = -1;
  bool leave_to_upper = false;
  double best_abs = 0.0;

  for (int i = 0; i < m_; ++i) {
    const double a = at(i, q);
    if (std::abs(a) <= pivot_tol_) continue;
    const double rate = -a * dir;
    const int b = basis_[i];
    const double v = x_[b];
    const bool below = v < lo_[b] - primal_tol_;
    const bool above = v > hi_[b] + primal_tol_;
    double lim = kInf;
    bool to_upper = false;
    if (rate > 0.0) {
      if (phase1 && below) {
        lim = (lo_[b] - v) / rate;
      } else if (phase1 && above) {
        continue;
      } else if (std::isfinite(hi_[b])) {
        lim = (hi_[b] - v) / rate;
        to_upper = true;
      } else {
        continue;
      }
    } else {
      if (phase1 && above) {
        lim = (v - hi_[b]) / (-rate);
        to_upper = true;
      } else if (phase1 && below) {
        continue;
      } else if (std::isfinite(lo_[b])) {
        lim = (v - lo_[b]) / (-rate);
      } else {
        continue;
      }
    }
    lim = std::max(lim, 0.0);
    bool better = false;
    if (lim < best_lim - 1e-12) {
      better = true;
    } else if (leave >= 0 && lim <= best_lim + 1e-12) {
      better = bland_ ? b < basis_[leave] : std::abs(a) > best_abs;
    }
    if (better) {
      best_lim = std::min(lim, best_lim);
      leave = i;
      leave_to_upper = to_upper;
      best_abs = std::abs(a);
    }
  }

  if (!std::isfinite(best_lim)) {
    if (phase1) unbounded_in_phase1_ = true;
    return false;
  }

  ++iterations_;
  const double step = best_lim;
  if (step > 0.0) {
    x_[q] += dir * step;
    for (int i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) x_[basis_[i]] -= a * dir * step;
    }
  }
  if (step <= 1e-12) {
    if (++degenerate_run_ > kDegenerateRunBeforeBland) bland_ = true;
  } else {
    degenerate_run_ = 0;
    bland_ = false;
  }

  if (leave < 0) {
    state_[q] = dir > 0 ? State::AtUpper : State::AtLower;
    x_[q] = dir > 0 ? hi_[q] : lo_[q];
    return true;
  }
  const int b = basis_[leave];
  pivot(leave, q);
  state_[b] = leave_to_upper ? State::AtUpper : State::AtLower;
  x_[b] = leave_to_upper ? hi_[b] : lo_[b];
  return true;
}

void BoundedSimplex::pivot(int r, int q) {
  double* prow = &tab_[static_cast<std::size_t>(r) * total_];
  const double inv = 1.0 / prow[q];
  scratch_.clear();
  for (int j = 0; j < total_; ++j) {
    if (prow[j] == 0.0) continue;
    double v = prow[j] * inv;
    if (std::abs(v) < kDropTol) v = 0.0;
    prow[j] = v;
    if (v != 0.0) scratch_.push_back(j);
  }
  prow[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tab_[static_cast<std::size_t>(i) * total_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (int j : scratch_) row[j] -= f * prow[j];
    row[q] = 0.0;
  }
  const double fd = d_[q];
  if (fd != 0.0) {
    for (int j : scratch_) d_[j] -= fd * prow[j];
  }
  d_[q] = 0.0;
  basis_[r] = q;
  state_[q] = State::Basic;
}

BoundedSimplex::Result BoundedSimplex::solve() {
  recompute_basics();
  unbounded_in_phase1_ = false;
  const long max_iter = std::max<long>(20000, 40L * (m_ + total_));
  bool phase2_ready = false;
  for (long it = 0; it < max_iter; ++it) {
    if (it > 0 && it % 500 == 0) {
      recompute_basics();
      phase2_ready = false;
    }
    if (phase1_costs()) {
      phase2_ready = false;
      const int q = choose_entering();
      if (q < 0) return Result::Infeasible;
      if (!iterate(q, true)) return Result::IterationLimit;
      continue;
    }
    if (!phase2_ready) {
      phase2_costs();
      phase2_ready = true;
    }
    const int q = choose_entering();
    if (q < 0) return Result::Optimal;
    if (!iterate(q, false)) return Result::Unbounded;
  }
  return Result::IterationLimit;
}

void BoundedSimplex::set_var_bounds(int j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  if (state_[j] == State::Basic) return;
  double target = 0.0;
  if (std::isfinite(lo) && (state_[j] != State::AtUpper || !std::isfinite(hi))) {
    state_[j] = State::AtLower;
    target = lo;
  } else if (std::isfinite(hi)) {
    state_[j] = State::AtUpper;
    target = hi;
  } else {
    state_[j] = State::FreeZero;
  }
  const double delta = target - x_[j];
  if (delta == 0.0) return;
  x_[j] = target;
  for (int i = 0; i < m_; ++i) {
    const double a = at(i, j);
    if (a != 0.0) x_[basis_[i]] -= a * delta;
  }
}

std::vector<double> BoundedSimplex::primal() const {
  return std::vector<double>(x_.begin(), x_.begin() + n_);
}

double BoundedSimplex::objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

std::vector<double> BoundedSimplex::row_duals() const {
  return std::vector<double>(d_.begin() + n_, d_.end());
}

std::vector<double> BoundedSimplex::reduced_costs() const {
  return std::vector<double>(d_.begin(), d_.begin() + n_);
}

}  // namespace evmpc::opt::detail
