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

#include "doctest.h"
#include "evmpc/prediction.hpp"
#include "fixtures.hpp"
#include "lift_oracle.hpp"

using namespace evmpc;
using evmpc::testing::flat_scenario;
using evmpc::testing::session;

namespace {

HorizonView view_at(const Scenario& sc, int H) {
  Environment env(sc, 1, H);
  return build_horizon_view(env.state(), sc, env.forecasts(), H);
}

}  // namespace

TEST_CASE("availability follows the departure step") {
  auto sc = flat_scenario(2, 10, {session(0, 0, 3, 0.5)});
  const auto v = view_at(sc, 5);
  for (int h = 0; h < 5; ++h) {
    CHECK(v.xi(0, h) == (h < 3 ? 1.0 : 0.0));
    CHECK(v.xi(1, h) == 0.0);
    CHECK(v.b_charge(1, h) == 0.0);
    CHECK(v.b_discharge(1, h) == 0.0);
  }
  CHECK(v.b_charge(0, 0) == doctest::Approx(0.005));
  CHECK(v.b_charge(0, 3) == 0.0);
}

TEST_CASE("single-step lift equals the step matrices") {
  auto sc = flat_scenario(2, 10, {session(0, 0, 8, 0.5), session(1, 0, 8, 0.3)});
  sc.sessions[1].eta_discharge = 0.9;
  const auto v = view_at(sc, 1);
  const auto m = lift(v);
  CHECK(m.A_stack.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  CHECK(m.G_stack(0, m.charge_col(0, 0)) == doctest::Approx(0.005));
  CHECK(m.G_stack(1, m.discharge_col(0, 1)) == doctest::Approx(-0.25 / (50 * 0.9)));
  CHECK(m.G_stack(0, m.charge_col(0, 1)) == 0.0);
}

TEST_CASE("lifted prediction of a charging profile") {
  auto sc = flat_scenario(1, 10, {session(0, 0, 8, 0.5)});
  const auto v = view_at(sc, 3);
  const auto m = lift(v);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(6);
  p(m.charge_col(0, 0)) = 22.0;
  p(m.charge_col(2, 0)) = 11.0;
  const Eigen::VectorXd x = m.predict(p);
  CHECK(x(0) == doctest::Approx(0.61).epsilon(1e-12));
  CHECK(x(1) == doctest::Approx(0.61).epsilon(1e-12));
  CHECK(x(2) == doctest::Approx(0.665).epsilon(1e-12));
  for (int r = 0; r < m.G_stack.rows(); ++r) {
    for (int h = 0; h < 3; ++h) {
      CHECK(m.G_stack(r, m.charge_col(h, 0)) >= 0.0);
      CHECK(m.G_stack(r, m.discharge_col(h, 0)) <= 0.0);
    }
  }
}

TEST_CASE("unavailable steps annihilate the state") {
  auto sc = flat_scenario(1, 10, {session(0, 0, 2, 0.5)});
  const auto v = view_at(sc, 4);
  const auto m = lift(v);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(8, 22.0);
  const Eigen::VectorXd x = m.predict(p);
  CHECK(x(2) == 0.0);
  CHECK(x(3) == 0.0);
}

TEST_CASE("lifted prediction matches step-by-step recursion on random instances") {
  Rng rng = make_stream(31, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    worst = std::max(worst, evmpc::testing::lifted_vs_recursion_error(rng));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("lifted prediction agrees with the plant on quantized profiles") {
  auto sc = flat_scenario(2, 12, {session(0, 0, 10, 0.3), session(1, 0, 6, 0.6)});
  const int H = 6;
  Environment env(sc, 1, H);
  const auto v = build_horizon_view(env.state(), sc, env.forecasts(), H);
  const auto m = lift(v);
  const double levels[] = {1.0, 0.5, -0.25, 0.0, 0.75, -1.0};
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * 2 * H);
  for (int h = 0; h < H; ++h) {
    const double a[] = {levels[h], -levels[h]};
    for (int i = 0; i < 2; ++i) {
      if (a[i] > 0) p(m.charge_col(h, i)) = 22.0 * a[i];
      if (a[i] < 0) p(m.discharge_col(h, i)) = -22.0 * a[i];
    }
    const auto rec = env.step(a);
    const Eigen::VectorXd x = m.predict(p);
    for (int i = 0; i < 2; ++i) {
      CHECK(rec.soc_after[i] == doctest::Approx(x(m.state_row(h, i))).epsilon(1e-12));
    }
  }
}

TEST_CASE("SoC lower bounds") {
  auto sc = flat_scenario(3, 10, {session(0, 0, 8, 0.05), session(1, 0, 2, 0.5)});
  const auto v = view_at(sc, 4);
  const auto lb = soc_lower_bounds(v, v.x0);
  CHECK(lb(0, 0) == 0.05);
  CHECK(lb(0, 3) == 0.05);
  CHECK(lb(1, 0) == 0.1);
  CHECK(lb(1, 2) == 0.0);
  CHECK(lb(2, 0) == 0.0);
}

TEST_CASE("departure bounds inside and beyond the horizon") {
  auto sc = flat_scenario(3, 30,
                          {session(0, 0, 2, 0.5), session(1, 0, 14, 0.2), session(2, 0, 10, 0.5)});
  const auto v = view_at(sc, 10);
  const auto bounds = departure_constraints(v);
  REQUIRE(bounds.size() == 3);
  CHECK(bounds[0].row == 1);
  CHECK(bounds[0].min_soc == 0.8);
  CHECK(bounds[0].max_soc == 1.0);
  CHECK(!bounds[0].terminal);
  CHECK(bounds[1].terminal);
  CHECK(bounds[1].row == 9);
  CHECK(bounds[1].min_soc == doctest::Approx(0.36));
  CHECK(bounds[2].row == 9);
  CHECK(!bounds[2].terminal);
  CHECK(bounds[2].min_soc == 0.8);
}

TEST_CASE("terminal bound is clamped at the SoC floor") {
  auto sc = flat_scenario(1, 40, {session(0, 0, 30, 0.5)});
  const auto v = view_at(sc, 4);
  const auto bounds = departure_constraints(v);
  REQUIRE(bounds.size() == 1);
  CHECK(bounds[0].min_soc == 0.1);
}

TEST_CASE("must-charge boundary") {
  // Needs 0.3 in steps of 0.11: three full-power steps before departure at 8.
  auto sc = flat_scenario(2, 20, {session(0, 0, 8, 0.5), session(1, 0, 20, 0.9)});
  const auto v = view_at(sc, 10);
  const auto rows = must_charge_rows(v);
  CHECK(rows[0] == 5);
  CHECK(rows[1] == 10);
}

TEST_CASE("prices and forecasts are sliced to the horizon") {
  auto sc = flat_scenario(1, 6, {session(0, 0, 6, 0.5)});
  for (int k = 0; k < 6; ++k) sc.prices.charge[k] = 0.1 * (k + 1);
  const auto v = view_at(sc, 8);
  CHECK(v.prices.charge[0] == doctest::Approx(0.1));
  CHECK(v.prices.charge[5] == doctest::Approx(0.6));
  CHECK(v.prices.charge[7] == doctest::Approx(0.6));
  CHECK(v.forecasts[0].load_kw.size() == 8);
}
