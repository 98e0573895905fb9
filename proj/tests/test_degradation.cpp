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

#include <cmath>
#include <vector>

#include "degradation_reference.hpp"
#include "doctest.h"
#include "evmpc/degradation.hpp"

using namespace evmpc;
using namespace evmpc::testing;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace

TEST_CASE("calendar loss matches direct evaluation") {
  const std::vector<double> half{0.5, 0.5, 0.5};
  CHECK(rel_close(calendar_loss(half, 1.0), kCalMean05, 1e-12));
  const std::vector<double> mixed{0.7, 0.9};
  CHECK(rel_close(calendar_loss(mixed, 1.0), kCalMean08, 1e-12));
}

TEST_CASE("calendar loss vanishes at the zero of the linear factor") {
  DegradationParams p;
  p.eps0 = 4.0;
  p.eps1 = 1.0;
  const std::vector<double> soc{0.25};
  CHECK(calendar_loss(soc, 1.0, p) == 0.0);
  const std::vector<double> defaults{DegradationParams{}.eps1 / DegradationParams{}.eps0};
  CHECK(std::abs(calendar_loss(defaults, 1.0)) < 1e-20);
}

TEST_CASE("calendar loss is linear in duration and monotone in mean SoC") {
  const std::vector<double> soc{0.5};
  CHECK(rel_close(calendar_loss(soc, 2.0), 2.0 * calendar_loss(soc, 1.0), 1e-14));
  double prev = calendar_loss(std::vector<double>{0.23}, 1.0);
  for (double m = 0.3; m <= 1.0; m += 0.1) {
    const double cur = calendar_loss(std::vector<double>{m}, 1.0);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK_THROWS_AS(calendar_loss(std::vector<double>{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(calendar_loss(soc, 0.0), std::invalid_argument);
}

TEST_CASE("cyclic loss matches direct evaluation") {
  const std::vector<double> soc{0.4, 0.6};
  const std::vector<double> power{22.0, -22.0};
  CHECK(rel_close(cyclic_loss(soc, power, 0.25, 1.0), kCycTwoStep, 1e-12));
}

TEST_CASE("cyclic loss zero and constant-SoC cases") {
  const std::vector<double> soc{0.4, 0.6, 0.5};
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(cyclic_loss(soc, zero, 0.25, 1.0) == 0.0);

  // 35 kWh of throughput at constant SoC: 4 steps of 35 kW over 0.25 h.
  const std::vector<double> flat(4, 0.6);
  const std::vector<double> p(4, 35.0);
  CHECK(rel_close(cyclic_loss(flat, p, 0.25, 1.0), kCycConstant35, 1e-12));
  CHECK_THROWS_AS(cyclic_loss(flat, zero, 0.25, 1.0), std::invalid_argument);
}

TEST_CASE("cyclic loss is monotone in throughput") {
  const std::vector<double> soc{0.3, 0.5, 0.7, 0.6};
  double prev = -1.0;
  for (double scale = 0.0; scale <= 2.0; scale += 0.25) {
    const std::vector<double> p{11.0 * scale, 22.0 * scale, -11.0 * scale, 4.0 * scale};
    const double cur = cyclic_loss(soc, p, 0.25, 1.0);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("fleet degradation sums and idle EVs") {
  CHECK(run_degradation(std::vector<EvTrace>{}, 0.25, 1.0).sum_q_lost == 0.0);

  EvTrace idle;
  idle.ev_id = 3;
  idle.soc.assign(96, 0.8);
  idle.net_power_kw.assign(96, 0.0);
  EvTrace busy;
  busy.ev_id = 4;
  busy.soc = {0.4, 0.6};
  busy.net_power_kw = {22.0, -22.0};
  EvTrace absent;
  const auto f = run_degradation(std::vector<EvTrace>{idle, busy, absent}, 0.25, 1.0);
  REQUIRE(f.per_ev.size() == 2);
  CHECK(f.per_ev[0].d_cyc == 0.0);
  CHECK(f.per_ev[0].q_lost == f.per_ev[0].d_cal);
  CHECK(f.per_ev[1].energy_throughput_kwh == doctest::Approx(11.0));
  CHECK(f.sum_q_lost == doctest::Approx(f.sum_d_cal + f.sum_d_cyc));
}

TEST_CASE("per-EV loss for a typical charging day lies in the expected band") {
  EvTrace t;
  for (int k = 0; k < 24; ++k) {
    t.soc.push_back(0.1 + 0.7 * (k + 1) / 24.0);
    t.net_power_kw.push_back(35.0 / (24 * 0.25));
  }
  const auto f = run_degradation(std::vector<EvTrace>{t}, 0.25, 1.0);
  CHECK(f.sum_q_lost > 1e-5);
  CHECK(f.sum_q_lost < 1e-3);
}
