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

#include <vector>

#include "evmpc/scenario.hpp"

namespace evmpc::testing {

// Hand-built scenario with flat series, one transformer and no DR events.
inline Scenario flat_scenario(int chargers, int steps, std::vector<EvSession> sessions,
                              double price = 0.2, double multiplier = 1.2,
                              double limit_kw = 400.0) {
  Scenario sc;
  sc.sim.n_chargers = chargers;
  sc.sim.n_transformers = 1;
  sc.sim.sim_steps = steps;
  sc.sim.discharge_multiplier = multiplier;
  TransformerSpec t;
  t.power_limit_kw = limit_kw;
  t.inflexible_load_kw.assign(steps, 0.0);
  t.pv_generation_kw.assign(steps, 0.0);
  for (int i = 0; i < chargers; ++i) {
    ChargerSpec c;
    c.id = i;
    sc.chargers.push_back(c);
    t.charger_ids.push_back(i);
  }
  sc.transformers.push_back(t);
  for (std::size_t j = 0; j < sessions.size(); ++j) sessions[j].id = static_cast<int>(j);
  sc.sessions = std::move(sessions);
  sc.prices.charge.assign(steps, price);
  sc.prices.discharge.assign(steps, multiplier * price);
  sc.prices.flex_charge.assign(steps, 0.5 * price);
  sc.prices.flex_discharge.assign(steps, 0.5 * price);
  return sc;
}

inline EvSession session(int charger, int arrival, int departure, double soc) {
  EvSession e;
  e.charger_id = charger;
  e.arrival_step = arrival;
  e.departure_step = departure;
  e.soc_arrival = soc;
  return e;
}

}  // namespace evmpc::testing
