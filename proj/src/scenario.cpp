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

#include "evmpc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace evmpc {

namespace {

enum Stream : std::uint64_t {
  kSessions = 1,
  kLoad = 2,
  kPv = 3,
  kDr = 4,
  kPrices = 5,
};

double gaussian_bump(double t, double center, double width) {
  const double z = (t - center) / width;
  return std::exp(-0.5 * z * z);
}

// Reads a YAML mapping while tracking which keys were consumed, so that typos
// surface as errors instead of silently keeping defaults.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v || v.IsNull()) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "cannot convert '" + scalar_text(v) + "' to " + type_name<T>());
    }
  }

  void get_range(const std::string& key, Range& out) {
    Section s = child(key);
    s.get("mean", out.mean);
    s.get("std", out.std);
    s.get("min", out.min);
    s.get("max", out.max);
    s.finish();
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return Section(YAML::Node(), field(key));
    return Section(node_[key], field(key));
  }

  bool has(const std::string& key) const {
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "text";
  }
  static std::string scalar_text(const YAML::Node& v) {
    return v.IsScalar() ? v.Scalar() : std::string("<non-scalar>");
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_series(Section s, SeriesParams& p) {
  s.get("multiplier", p.multiplier);
  s.get("forecast_mean", p.forecast_mean);
  s.get("forecast_std", p.forecast_std);
  s.get("noise", p.noise);
  s.get("csv", p.csv);
  s.finish();
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void check_range(const Range& r, const std::string& field) {
  require(r.std > 0.0, field + ".std", "must be > 0");
  require(r.min <= r.max, field + ".min", "must not exceed max");
}

void check_series(const SeriesParams& p, const std::string& field) {
  require(p.multiplier >= 0.0, field + ".multiplier", "must be >= 0");
  require(p.forecast_mean > 0.0, field + ".forecast_mean", "must be > 0");
  require(p.forecast_std >= 0.0, field + ".forecast_std", "must be >= 0");
  require(p.noise >= 0.0, field + ".noise", "must be >= 0");
}

int steps_for_hours(double hours, double delta_t_min) {
  return static_cast<int>(std::lround(hours * 60.0 / delta_t_min));
}

std::vector<double> normalize_to_peak(std::vector<double> v, double peak) {
  const double mx = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  for (double& x : v) x = (peak <= 0.0 || mx <= 0.0) ? 0.0 : x * peak / mx;
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi,
                               int max_tries) {
  if (lo == hi) return lo;
  std::normal_distribution<double> n(mean, sd);
  for (int i = 0; i < max_tries; ++i) {
    const double x = n(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw std::runtime_error("truncated normal: no sample inside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
}

double TransformerSpec::dr_reduction_kw(int k) const {
  double r = 0.0;
  for (const auto& e : dr_events) {
    if (e.active_at(k)) r = std::max(r, e.capacity_reduction * power_limit_kw);
  }
  return r;
}

double TransformerSpec::announced_reduction_kw(int now, int target) const {
  double r = 0.0;
  for (const auto& e : dr_events) {
    if (e.announced_at(now) && e.active_at(target)) {
      r = std::max(r, e.capacity_reduction * power_limit_kw);
    }
  }
  return r;
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Afap: return "afap";
    case ControllerKind::EmpcG2v: return "empc_g2v";
    case ControllerKind::EmpcV2g: return "empc_v2g";
    case ControllerKind::OcmfG2v: return "ocmf_g2v";
    case ControllerKind::OcmfV2g: return "ocmf_v2g";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
  for (auto k : {ControllerKind::Afap, ControllerKind::EmpcG2v, ControllerKind::EmpcV2g,
                 ControllerKind::OcmfG2v, ControllerKind::OcmfV2g}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("controller.kind",
                    "unknown controller '" + name +
                        "' (expected afap, empc_g2v, empc_v2g, ocmf_g2v or ocmf_v2g)");
}

bool is_v2g(ControllerKind kind) {
  return kind == ControllerKind::EmpcV2g || kind == ControllerKind::OcmfV2g;
}

bool is_ocmf(ControllerKind kind) {
  return kind == ControllerKind::OcmfG2v || kind == ControllerKind::OcmfV2g;
}

Config config_from_yaml(const YAML::Node& root) {
  Config c;
  Section top(root, "");

  {
    Section s = top.child("simulation");
    s.get("delta_t_min", c.sim.delta_t_min);
    double duration_h = 24.0;
    s.get("duration_h", duration_h);
    if (!(c.sim.delta_t_min > 0.0)) throw ConfigError(s.field("delta_t_min"), "must be > 0");
    if (!(duration_h > 0.0)) throw ConfigError(s.field("duration_h"), "must be > 0");
    c.sim.sim_steps = steps_for_hours(duration_h, c.sim.delta_t_min);
    s.get("sim_steps", c.sim.sim_steps);
    s.get("horizon_steps", c.sim.horizon_steps);
    s.get("n_chargers", c.sim.n_chargers);
    s.get("n_transformers", c.sim.n_transformers);
    const bool explicit_evs = s.has("n_evs");
    s.get("n_evs", c.sim.n_evs);
    if (!explicit_evs) c.sim.n_evs = static_cast<int>(std::lround(2.5 * c.sim.n_chargers));
    s.get("discharge_multiplier", c.sim.discharge_multiplier);
    s.get("seed", c.sim.seed);
    s.get("ev_scenario", c.sim.ev_scenario_name);
    s.finish();
  }
  {
    Section s = top.child("charger");
    s.get("max_charge_kw", c.charger.max_charge_kw);
    s.get("max_discharge_kw", c.charger.max_discharge_kw);
    s.get("voltage_v", c.charger.voltage_v);
    s.get("phases", c.charger.phases);
    s.get("min_current_a", c.charger.min_current_a);
    s.get("max_current_a", c.charger.max_current_a);
    s.finish();
  }
  {
    Section s = top.child("ev");
    s.get("capacity_kwh", c.ev.capacity_kwh);
    s.get("max_charge_kw", c.ev.max_charge_kw);
    s.get("max_discharge_kw", c.ev.max_discharge_kw);
    s.get("soc_floor", c.ev.soc_floor);
    s.get("soc_required_min", c.ev.soc_required_min);
    s.get("soc_required_max", c.ev.soc_required_max);
    s.get("eta_charge", c.ev.eta_charge);
    s.get("eta_discharge", c.ev.eta_discharge);
    s.get("min_connection_h", c.ev.min_connection_h);
    s.get_range("arrival_h", c.ev.arrival_h);
    s.get_range("duration_h", c.ev.duration_h);
    s.get_range("soc_arrival", c.ev.soc_arrival);
    s.get("max_placement_tries", c.ev.max_placement_tries);
    s.finish();
  }
  {
    Section s = top.child("transformer");
    s.get("power_limit_kw", c.transformer.power_limit_kw);
    read_series(s.child("inflexible_load"), c.transformer.inflexible_load);
    read_series(s.child("pv"), c.transformer.pv);
    Section d = s.child("demand_response");
    auto& dr = c.transformer.demand_response;
    d.get("events", dr.events);
    d.get("duration_h", dr.duration_h);
    d.get("notice_min", dr.notice_min);
    d.get("capacity_reduction", dr.capacity_reduction);
    d.get("start_mean_h", dr.start_mean_h);
    d.get("start_std_h", dr.start_std_h);
    d.finish();
    s.finish();
  }
  {
    Section s = top.child("prices");
    s.get("base_eur_per_kwh", c.prices.base_eur_per_kwh);
    s.get("peak_amplitude", c.prices.peak_amplitude);
    s.get("midday_dip", c.prices.midday_dip);
    s.get("noise", c.prices.noise);
    s.get("floor_eur_per_kwh", c.prices.floor_eur_per_kwh);
    s.get("flex_charge_fraction", c.prices.flex_charge_fraction);
    s.get("flex_discharge_fraction", c.prices.flex_discharge_fraction);
    s.get("csv", c.prices.csv);
    s.finish();
  }
  {
    Section s = top.child("controller");
    std::string kind = to_string(c.controller.kind);
    s.get("kind", kind);
    c.controller.kind = parse_controller_kind(kind);
    s.get("node_limit", c.controller.node_limit);
    s.get("time_limit_s", c.controller.time_limit_s);
    s.get("heuristic_frequency", c.controller.heuristic_frequency);
    s.get("slack_penalty", c.controller.slack_penalty);
    s.get("warm_start", c.controller.warm_start);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

Config parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<syntax>", "line " + std::to_string(e.mark.line + 1) + ", column " +
                                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return config_from_yaml(root);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string apply_overrides(const std::string& yaml_text,
                            const std::vector<std::string>& assignments) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<syntax>", "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(a, "override must have the form section.key=value");
    }
    const std::string key = trim(a.substr(0, eq));
    const std::string value = trim(a.substr(eq + 1));
    std::vector<std::string> parts;
    std::stringstream ks(key);
    for (std::string part; std::getline(ks, part, '.');) {
      if (part.empty()) throw ConfigError(key, "empty path component");
      parts.push_back(part);
    }
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      YAML::Node next = cur[parts[i]];
      if (!next || next.IsNull()) {
        cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
        next = cur[parts[i]];
      }
      if (!next.IsMap()) throw ConfigError(key, "'" + parts[i] + "' is not a section");
      cur.reset(next);
    }
    YAML::Node parsed;
    try {
      parsed = YAML::Load(value);
    } catch (const YAML::Exception&) {
      parsed = YAML::Node(value);
    }
    cur[parts.back()] = parsed;
  }
  YAML::Emitter out;
  out << root;
  return out.c_str();
}

void validate(const Config& c) {
  const auto& s = c.sim;
  require(s.delta_t_min > 0.0, "simulation.delta_t_min", "must be > 0");
  require(s.horizon_steps >= 1, "simulation.horizon_steps", "must be >= 1");
  require(s.sim_steps >= 1, "simulation.sim_steps", "must be >= 1");
  require(s.n_chargers >= 0, "simulation.n_chargers", "must be >= 0");
  require(s.n_transformers >= 1, "simulation.n_transformers", "must be >= 1");
  require(s.n_chargers == 0 || s.n_chargers >= s.n_transformers, "simulation.n_chargers",
          "must be >= n_transformers");
  require(s.n_evs >= 0, "simulation.n_evs", "must be >= 0");
  require(s.discharge_multiplier >= 0.0 && s.discharge_multiplier <= 2.0,
          "simulation.discharge_multiplier", "must lie in [0, 2]");

  const auto& ch = c.charger;
  require(ch.max_charge_kw > 0.0, "charger.max_charge_kw", "must be > 0");
  require(ch.max_discharge_kw >= 0.0, "charger.max_discharge_kw", "must be >= 0");
  require(ch.voltage_v > 0.0, "charger.voltage_v", "must be > 0");
  require(ch.phases >= 1, "charger.phases", "must be >= 1");
  require(ch.min_current_a >= 1, "charger.min_current_a", "must be >= 1");
  require(ch.max_current_a >= ch.min_current_a, "charger.max_current_a",
          "must be >= min_current_a");

  const auto& ev = c.ev;
  require(ev.capacity_kwh > 0.0, "ev.capacity_kwh", "must be > 0");
  require(ev.max_charge_kw > 0.0, "ev.max_charge_kw", "must be > 0");
  require(ev.max_discharge_kw >= 0.0, "ev.max_discharge_kw", "must be >= 0");
  require(ev.soc_floor >= 0.0 && ev.soc_floor <= ev.soc_required_min, "ev.soc_floor",
          "must lie in [0, soc_required_min]");
  require(ev.soc_required_min <= ev.soc_required_max, "ev.soc_required_min",
          "must not exceed soc_required_max");
  require(ev.soc_required_max <= 1.0, "ev.soc_required_max", "must be <= 1");
  require(ev.eta_charge > 0.0 && ev.eta_charge <= 1.0, "ev.eta_charge", "must lie in (0, 1]");
  require(ev.eta_discharge > 0.0 && ev.eta_discharge <= 1.0, "ev.eta_discharge",
          "must lie in (0, 1]");
  require(ev.min_connection_h > 0.0, "ev.min_connection_h", "must be > 0");
  check_range(ev.arrival_h, "ev.arrival_h");
  check_range(ev.duration_h, "ev.duration_h");
  check_range(ev.soc_arrival, "ev.soc_arrival");
  require(ev.soc_arrival.min >= 0.0 && ev.soc_arrival.max <= 1.0, "ev.soc_arrival",
          "bounds must lie in [0, 1]");
  require(ev.duration_h.max >= ev.min_connection_h, "ev.duration_h.max",
          "must be >= min_connection_h");
  require(ev.max_placement_tries >= 1, "ev.max_placement_tries", "must be >= 1");

  const auto& tr = c.transformer;
  require(tr.power_limit_kw > 0.0, "transformer.power_limit_kw", "must be > 0");
  check_series(tr.inflexible_load, "transformer.inflexible_load");
  check_series(tr.pv, "transformer.pv");
  const auto& dr = tr.demand_response;
  require(dr.events >= 0, "transformer.demand_response.events", "must be >= 0");
  require(dr.duration_h > 0.0, "transformer.demand_response.duration_h", "must be > 0");
  require(dr.notice_min > 0.0, "transformer.demand_response.notice_min", "must be > 0");
  require(dr.capacity_reduction >= 0.0 && dr.capacity_reduction < 1.0,
          "transformer.demand_response.capacity_reduction", "must lie in [0, 1)");
  require(dr.start_std_h > 0.0, "transformer.demand_response.start_std_h", "must be > 0");

  const auto& p = c.prices;
  require(p.base_eur_per_kwh >= 0.0, "prices.base_eur_per_kwh", "must be >= 0");
  require(p.noise >= 0.0, "prices.noise", "must be >= 0");
  require(p.midday_dip >= 0.0, "prices.midday_dip", "must be >= 0");
  require(p.floor_eur_per_kwh >= 0.0, "prices.floor_eur_per_kwh", "must be >= 0");
  require(p.flex_charge_fraction >= 0.0, "prices.flex_charge_fraction", "must be >= 0");
  require(p.flex_discharge_fraction >= 0.0, "prices.flex_discharge_fraction", "must be >= 0");

  const auto& ctl = c.controller;
  require(ctl.node_limit >= 1, "controller.node_limit", "must be >= 1");
  require(ctl.time_limit_s > 0.0, "controller.time_limit_s", "must be > 0");
  require(ctl.heuristic_frequency >= 0, "controller.heuristic_frequency", "must be >= 0");
  require(ctl.slack_penalty >= 0.0, "controller.slack_penalty", "must be >= 0");
}

std::vector<EvSession> generate_sessions(Rng& rng, const Config& config) {
  const auto& sim = config.sim;
  const auto& ev = config.ev;
  std::vector<EvSession> sessions;
  if (sim.n_chargers == 0 || sim.n_evs == 0) return sessions;

  const double steps_per_h = 60.0 / sim.delta_t_min;
  const int K = sim.sim_steps;
  const int min_steps = std::max(1, static_cast<int>(std::ceil(ev.min_connection_h * steps_per_h - 1e-9)));
  const double ratio = static_cast<double>(sim.n_evs) / sim.n_chargers;
  const int base = static_cast<int>(std::floor(ratio));
  std::bernoulli_distribution extra(ratio - base);
  const double p_charge = std::min(config.charger.max_charge_kw, ev.max_charge_kw);
  const double p_discharge = std::min(config.charger.max_discharge_kw, ev.max_discharge_kw);

  for (int i = 0; i < sim.n_chargers; ++i) {
    const int count = base + (extra(rng) ? 1 : 0);
    if (count == 0) continue;
    if (count * min_steps > K) {
      throw ConfigError("simulation.n_evs", "too many sessions per charger for the day length");
    }
    std::vector<EvSession> placed;
    bool ok = false;
    for (int attempt = 0; attempt < ev.max_placement_tries && !ok; ++attempt) {
      placed.clear();
      for (int s = 0; s < count; ++s) {
        EvSession e;
        e.charger_id = i;
        const double a = sample_truncated_normal(rng, ev.arrival_h.mean, ev.arrival_h.std,
                                                 ev.arrival_h.min, ev.arrival_h.max);
        const double d = sample_truncated_normal(rng, ev.duration_h.mean, ev.duration_h.std,
                                                 ev.duration_h.min, ev.duration_h.max);
        e.arrival_step = static_cast<int>(std::lround(a * steps_per_h));
        e.departure_step =
            e.arrival_step + std::max(min_steps, static_cast<int>(std::lround(d * steps_per_h)));
        e.soc_arrival = sample_truncated_normal(rng, ev.soc_arrival.mean, ev.soc_arrival.std,
                                                ev.soc_arrival.min, ev.soc_arrival.max);
        placed.push_back(e);
      }
      std::sort(placed.begin(), placed.end(), [](const EvSession& x, const EvSession& y) {
        return x.arrival_step < y.arrival_step;
      });
      ok = true;
      for (std::size_t s = 0; s < placed.size() && ok; ++s) {
        const auto& e = placed[s];
        const double reach = e.soc_arrival + (e.departure_step - e.arrival_step) *
                                                 sim.delta_t_h() * ev.eta_charge * p_charge /
                                                 ev.capacity_kwh;
        ok = e.departure_step <= K && e.arrival_step >= 0 && reach >= ev.soc_required_min &&
             (s == 0 || e.arrival_step >= placed[s - 1].departure_step);
      }
    }
    if (!ok) {
      throw std::runtime_error("generate_sessions: could not place " + std::to_string(count) +
                               " non-overlapping sessions on charger " + std::to_string(i));
    }
    for (auto& e : placed) {
      e.soc_required_min = ev.soc_required_min;
      e.soc_required_max = ev.soc_required_max;
      e.capacity_kwh = ev.capacity_kwh;
      e.soc_floor = ev.soc_floor;
      e.eta_charge = ev.eta_charge;
      e.eta_discharge = ev.eta_discharge;
      e.max_charge_kw = p_charge;
      e.max_discharge_kw = p_discharge;
      sessions.push_back(e);
    }
  }
  std::stable_sort(sessions.begin(), sessions.end(), [](const EvSession& x, const EvSession& y) {
    return x.arrival_step != y.arrival_step ? x.arrival_step < y.arrival_step
                                            : x.charger_id < y.charger_id;
  });
  for (std::size_t j = 0; j < sessions.size(); ++j) sessions[j].id = static_cast<int>(j);
  return sessions;
}

std::vector<double> generate_load_series(Rng& rng, const Config& config) {
  const auto& sim = config.sim;
  const auto& p = config.transformer.inflexible_load;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(sim.sim_steps);
  for (int k = 0; k < sim.sim_steps; ++k) {
    const double t = std::fmod((k + 0.5) * sim.delta_t_h(), 24.0);
    const double shape =
        0.4 + 0.6 * gaussian_bump(t, 7.0, 1.5) + 0.3 * gaussian_bump(t, 19.5, 1.5);
    v[k] = std::max(0.0, shape * (1.0 + p.noise * noise(rng)));
  }
  return normalize_to_peak(std::move(v), p.multiplier * config.transformer.power_limit_kw);
}

std::vector<double> generate_pv_series(Rng& rng, const Config& config) {
  const auto& sim = config.sim;
  const auto& p = config.transformer.pv;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(sim.sim_steps);
  for (int k = 0; k < sim.sim_steps; ++k) {
    const double t = std::fmod((k + 0.5) * sim.delta_t_h(), 24.0);
    double shape = 0.0;
    if (t > 7.0 && t < 19.0) {
      const double s = std::sin(std::numbers::pi * (t - 7.0) / 12.0);
      shape = s * s;
    }
    const double draw = noise(rng);
    v[k] = std::max(0.0, shape * (1.0 + p.noise * draw));
  }
  return normalize_to_peak(std::move(v), p.multiplier * config.transformer.power_limit_kw);
}

std::vector<DrEvent> generate_dr_events(Rng& rng, const Config& config) {
  const auto& sim = config.sim;
  const auto& p = config.transformer.demand_response;
  std::vector<DrEvent> events;
  const double steps_per_h = 60.0 / sim.delta_t_min;
  const int duration = std::max(1, steps_for_hours(p.duration_h, sim.delta_t_min));
  const int notice = std::max(1, static_cast<int>(std::lround(p.notice_min / sim.delta_t_min)));
  std::normal_distribution<double> start(p.start_mean_h, p.start_std_h);
  for (int e = 0; e < p.events; ++e) {
    DrEvent ev;
    ev.duration_steps = std::min(duration, sim.sim_steps);
    ev.notice_steps = notice;
    ev.capacity_reduction = p.capacity_reduction;
    const int s = static_cast<int>(std::lround(start(rng) * steps_per_h));
    ev.start_step = std::clamp(s, 0, sim.sim_steps - ev.duration_steps);
    events.push_back(ev);
  }
  return events;
}

std::vector<double> generate_charge_prices(Rng& rng, const Config& config) {
  const auto& sim = config.sim;
  const auto& p = config.prices;
  std::normal_distribution<double> noise(0.0, 1.0);
  const int hours = static_cast<int>(std::ceil(sim.sim_steps * sim.delta_t_h() - 1e-9)) + 1;
  std::vector<double> hourly(hours);
  for (int h = 0; h < hours; ++h) {
    const double t = std::fmod(h + 0.5, 24.0);
    const double shape = 1.0 +
                         p.peak_amplitude * (0.6 * gaussian_bump(t, 8.0, 1.5) + gaussian_bump(t, 19.0, 2.0)) -
                         p.midday_dip * gaussian_bump(t, 13.5, 2.5);
    hourly[h] = std::max(p.floor_eur_per_kwh,
                         p.base_eur_per_kwh * shape * (1.0 + p.noise * noise(rng)));
  }
  std::vector<double> v(sim.sim_steps);
  for (int k = 0; k < sim.sim_steps; ++k) {
    v[k] = hourly[static_cast<int>(std::floor(k * sim.delta_t_h() + 1e-9))];
  }
  return v;
}

PriceSchedule build_price_schedule(std::vector<double> charge_prices, const Config& config) {
  PriceSchedule s;
  const double m = config.sim.discharge_multiplier;
  s.discharge.resize(charge_prices.size());
  s.flex_charge.resize(charge_prices.size());
  s.flex_discharge.resize(charge_prices.size());
  for (std::size_t k = 0; k < charge_prices.size(); ++k) {
    s.discharge[k] = m * charge_prices[k];
    s.flex_charge[k] = config.prices.flex_charge_fraction * charge_prices[k];
    s.flex_discharge[k] = config.prices.flex_discharge_fraction * charge_prices[k];
  }
  s.charge = std::move(charge_prices);
  return s;
}

std::vector<double> read_series_csv(const std::string& path, int expected_rows,
                                    const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(field, "'" + path + "' is empty");
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(field, path + ":" + std::to_string(lineno) + ": expected two columns");
    }
    try {
      std::size_t used = 0;
      const std::string step_text = trim(line.substr(0, comma));
      const long step = std::stol(step_text, &used);
      if (used != step_text.size() || step != static_cast<long>(values.size())) {
        throw std::invalid_argument("step");
      }
      const std::string value_text = trim(line.substr(comma + 1));
      const double v = std::stod(value_text, &used);
      if (used != value_text.size() || !std::isfinite(v)) throw std::invalid_argument("value");
      values.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError(field, path + ":" + std::to_string(lineno) +
                                   ": malformed row '" + line + "' (steps must count from 0)");
    }
  }
  if (static_cast<int>(values.size()) != expected_rows) {
    throw ConfigError(field, "'" + path + "' has " + std::to_string(values.size()) +
                                 " rows, expected " + std::to_string(expected_rows));
  }
  return values;
}

Scenario build_scenario(const Config& config, std::uint64_t seed) {
  validate(config);
  Scenario sc;
  sc.sim = config.sim;
  sc.sim.seed = seed;
  sc.transformer_params = config.transformer;
  const int I = config.sim.n_chargers;
  const int G = config.sim.n_transformers;
  const int K = config.sim.sim_steps;

  for (int g = 0; g < G; ++g) {
    TransformerSpec t;
    t.id = g;
    t.power_limit_kw = config.transformer.power_limit_kw;
    sc.transformers.push_back(t);
  }
  for (int i = 0; i < I; ++i) {
    ChargerSpec c = config.charger;
    c.id = i;
    c.transformer_id = static_cast<int>(static_cast<long long>(i) * G / I);
    sc.transformers[c.transformer_id].charger_ids.push_back(i);
    sc.chargers.push_back(c);
  }

  Rng sessions_rng = make_stream(seed, kSessions);
  sc.sessions = generate_sessions(sessions_rng, config);

  Rng load_rng = make_stream(seed, kLoad);
  Rng pv_rng = make_stream(seed, kPv);
  Rng dr_rng = make_stream(seed, kDr);
  std::vector<double> load_csv, pv_csv;
  if (!config.transformer.inflexible_load.csv.empty()) {
    load_csv = read_series_csv(config.transformer.inflexible_load.csv, K,
                               "transformer.inflexible_load.csv");
  }
  if (!config.transformer.pv.csv.empty()) {
    pv_csv = read_series_csv(config.transformer.pv.csv, K, "transformer.pv.csv");
  }
  for (auto& t : sc.transformers) {
    t.inflexible_load_kw = load_csv.empty() ? generate_load_series(load_rng, config) : load_csv;
    t.pv_generation_kw = pv_csv.empty() ? generate_pv_series(pv_rng, config) : pv_csv;
    t.dr_events = generate_dr_events(dr_rng, config);
  }

  Rng price_rng = make_stream(seed, kPrices);
  std::vector<double> charge = config.prices.csv.empty()
                                   ? generate_charge_prices(price_rng, config)
                                   : read_series_csv(config.prices.csv, K, "prices.csv");
  sc.prices = build_price_schedule(std::move(charge), config);
  validate(sc);
  return sc;
}

void validate(const Scenario& sc) {
  const int K = sc.sim.sim_steps;
  const double dt = sc.sim.delta_t_h();
  for (const auto& t : sc.transformers) {
    const std::string f = "transformer[" + std::to_string(t.id) + "]";
    require(t.power_limit_kw > 0.0, f + ".power_limit_kw", "must be > 0");
    require(static_cast<int>(t.inflexible_load_kw.size()) == K, f + ".inflexible_load",
            "length differs from sim_steps");
    require(static_cast<int>(t.pv_generation_kw.size()) == K, f + ".pv", "length differs from sim_steps");
    for (int k = 0; k < K; ++k) {
      require(t.inflexible_load_kw[k] >= 0.0, f + ".inflexible_load", "negative value");
      require(t.pv_generation_kw[k] >= 0.0, f + ".pv", "negative value");
    }
    for (const auto& e : t.dr_events) {
      require(e.capacity_reduction >= 0.0 && e.capacity_reduction < 1.0, f + ".dr.capacity_reduction",
              "must lie in [0, 1)");
      require(e.duration_steps >= 1 && e.notice_steps >= 1, f + ".dr", "duration and notice must be >= 1");
    }
  }
  for (const auto* series : {&sc.prices.charge, &sc.prices.discharge, &sc.prices.flex_charge,
                             &sc.prices.flex_discharge}) {
    require(static_cast<int>(series->size()) == K, "prices", "length differs from sim_steps");
  }
  for (const auto& e : sc.sessions) {
    const std::string f = "session[" + std::to_string(e.id) + "]";
    require(e.charger_id >= 0 && e.charger_id < static_cast<int>(sc.chargers.size()),
            f + ".charger_id", "out of range");
    require(e.soc_arrival >= 0.0 && e.soc_arrival <= 1.0, f + ".soc_arrival", "must lie in [0, 1]");
    require(e.arrival_step < e.departure_step, f + ".departure_step", "must follow arrival");
    require(e.arrival_step >= 0 && e.departure_step <= K, f + ".departure_step",
            "must lie inside the simulation");
    require(e.soc_floor <= e.soc_required_min && e.soc_required_min <= e.soc_required_max &&
                e.soc_required_max <= 1.0,
            f + ".soc_required_min", "bounds out of order");
    require(e.eta_charge > 0.0 && e.eta_charge <= 1.0, f + ".eta_charge", "must lie in (0, 1]");
    require(e.eta_discharge > 0.0 && e.eta_discharge <= 1.0, f + ".eta_discharge",
            "must lie in (0, 1]");
    const double reach = e.soc_arrival + (e.departure_step - e.arrival_step) * dt * e.eta_charge *
                                             e.max_charge_kw / e.capacity_kwh;
    require(reach >= e.soc_required_min - 1e-12, f, "departure target unreachable");
  }
  std::vector<const EvSession*> by_charger;
  for (const auto& e : sc.sessions) by_charger.push_back(&e);
  std::stable_sort(by_charger.begin(), by_charger.end(), [](const EvSession* a, const EvSession* b) {
    return a->charger_id != b->charger_id ? a->charger_id < b->charger_id
                                          : a->arrival_step < b->arrival_step;
  });
  for (std::size_t s = 1; s < by_charger.size(); ++s) {
    const auto* prev = by_charger[s - 1];
    const auto* cur = by_charger[s];
    if (prev->charger_id == cur->charger_id) {
      require(cur->arrival_step >= prev->departure_step,
              "session[" + std::to_string(cur->id) + "]", "overlaps an earlier session");
    }
  }
}

}  // namespace evmpc
