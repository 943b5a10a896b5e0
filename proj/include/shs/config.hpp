/*
 * config.hpp
 *
 * JSON run configuration. Top-level keys set defaults for every scenario; each entry of
 * "scenarios" may override the same keys. Unknown keys are rejected so typos surface as
 * validation errors instead of silently running the defaults.
 *
 *   {
 *     "battery_file": "battery.json",          // optional, relative to this file
 *     "battery": { "b0_nominal": 3.5, "gassing": { "c_v": 0.183 } },
 *     "degradation": { "corrosion_speed": { "voltage": [...], "speed": [...] } },
 *     "datasheet": { "float_life_years": 8 },
 *     "controller": { "disconnect_soc": 0.5, "partial_limits": { "v_limit": 13.0 } },
 *     "dt_s": 900, "max_years": 15, "seed": 1,
 *     "scenarios": [ { "name": "low_bboxx", "archetype": "low", "policy": "bboxx_static" },
 *                    { "name": "field", "profile_csv": "site.csv", "policy": "adaptive" } ],
 *     "compare": { "base": "low_bboxx", "alt": "low_adaptive" }
 *   }
 */

#pragma once

#include "simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace shs {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

struct RunConfig
{
  std::vector<Scenario> scenarios;
  std::optional<std::string> compare_base;
  std::optional<std::string> compare_alt;
  bool write_trace{ false };
  std::filesystem::path source;
};

struct CliOverrides
{
  std::optional<std::uint64_t> seed;
  std::optional<double> dt_s;
};

namespace config_detail {

inline void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
{
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json &j, const char *key, T &out, const std::string &where)
{
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline void read_battery(const json &j, BatteryParams &p, const std::string &where)
{
  check_keys(j, { "nominal_capacity_ah", "cells_in_series", "c_max", "electrolyte_volume", "molar_volume_water", "molar_volume_acid",
                  "molar_mass_water", "faraday", "b0_nominal", "b1", "gassing", "rest_current_threshold", "soc_cap" },
             where);
  read(j, "nominal_capacity_ah", p.nominal_capacity_ah, where);
  read(j, "cells_in_series", p.cells_in_series, where);
  read(j, "c_max", p.c_max, where);
  read(j, "electrolyte_volume", p.electrolyte_volume, where);
  read(j, "molar_volume_water", p.molar_volume_water, where);
  read(j, "molar_volume_acid", p.molar_volume_acid, where);
  read(j, "molar_mass_water", p.molar_mass_water, where);
  read(j, "faraday", p.faraday, where);
  read(j, "b0_nominal", p.b0_nominal, where);
  read(j, "b1", p.b1, where);
  read(j, "rest_current_threshold", p.rest_current_threshold, where);
  read(j, "soc_cap", p.soc_cap, where);
  if (const auto g = j.find("gassing"); g != j.end()) {
    const std::string w = where + ".gassing";
    check_keys(*g, { "i_gas0", "c_v", "c_t", "v_gas0", "t_gas0" }, w);
    read(*g, "i_gas0", p.gassing.i_gas0, w);
    read(*g, "c_v", p.gassing.c_v, w);
    read(*g, "c_t", p.gassing.c_t, w);
    read(*g, "v_gas0", p.gassing.v_gas0, w);
    read(*g, "t_gas0", p.gassing.t_gas0, w);
  }
}

inline void read_degradation(const json &j, DegradationParams &dp, const std::string &where)
{
  check_keys(j, { "corrosion_speed", "corrosion", "active_mass", "nominal_cycles", "w_limit", "c_corr_limit_fraction",
                  "c_deg_limit_fraction", "eol_fraction" },
             where);
  read(j, "nominal_cycles", dp.nominal_cycles, where);
  read(j, "w_limit", dp.w_limit, where);
  read(j, "c_corr_limit_fraction", dp.c_corr_limit_fraction, where);
  read(j, "c_deg_limit_fraction", dp.c_deg_limit_fraction, where);
  read(j, "eol_fraction", dp.eol_fraction, where);
  if (const auto k = j.find("corrosion_speed"); k != j.end()) {
    const std::string w = where + ".corrosion_speed";
    auto &t = dp.corrosion_speed;
    check_keys(*k, { "voltage", "speed", "reference_temperature_k", "temperature_step_k", "temperature_factor", "min_temperature_k",
                     "max_temperature_k" },
               w);
    read(*k, "voltage", t.voltage, w);
    read(*k, "speed", t.speed, w);
    read(*k, "reference_temperature_k", t.reference_temperature_k, w);
    read(*k, "temperature_step_k", t.temperature_step_k, w);
    read(*k, "temperature_factor", t.temperature_factor, w);
    read(*k, "min_temperature_k", t.min_temperature_k, w);
    read(*k, "max_temperature_k", t.max_temperature_k, w);
  }
  if (const auto c = j.find("corrosion"); c != j.end()) {
    const std::string w = where + ".corrosion";
    check_keys(*c, { "regime_threshold_v", "growth_exponent" }, w);
    read(*c, "regime_threshold_v", dp.corrosion.regime_threshold_v, w);
    read(*c, "growth_exponent", dp.corrosion.growth_exponent, w);
  }
  if (const auto a = j.find("active_mass"); a != j.end()) {
    const std::string w = where + ".active_mass";
    check_keys(*a, { "c_soc0", "c_soc_min", "i_ref", "current_floor", "exponent" }, w);
    read(*a, "c_soc0", dp.active_mass.c_soc0, w);
    read(*a, "c_soc_min", dp.active_mass.c_soc_min, w);
    read(*a, "i_ref", dp.active_mass.i_ref, w);
    read(*a, "current_floor", dp.active_mass.current_floor, w);
    read(*a, "exponent", dp.active_mass.exponent, w);
  }
}

inline void read_datasheet(const json &j, Datasheet &ds, const std::string &where)
{
  check_keys(j, { "float_life_years", "cycle_life", "float_voltage", "float_temperature_c", "cycle_discharge_current",
                  "cycle_cutoff_voltage", "cycle_charge_current", "cycle_charge_voltage", "cycle_full_charge_c_rate",
                  "cycle_temperature_c" },
             where);
  read(j, "float_life_years", ds.float_life_years, where);
  read(j, "cycle_life", ds.cycle_life, where);
  read(j, "float_voltage", ds.float_voltage, where);
  read(j, "float_temperature_c", ds.float_temperature_c, where);
  read(j, "cycle_discharge_current", ds.cycle_discharge_current, where);
  read(j, "cycle_cutoff_voltage", ds.cycle_cutoff_voltage, where);
  read(j, "cycle_charge_current", ds.cycle_charge_current, where);
  read(j, "cycle_charge_voltage", ds.cycle_charge_voltage, where);
  read(j, "cycle_full_charge_c_rate", ds.cycle_full_charge_c_rate, where);
  read(j, "cycle_temperature_c", ds.cycle_temperature_c, where);
}

inline void read_limits(const json &j, VoltageLimits &lim, const std::string &where)
{
  check_keys(j, { "v_limit", "v_float", "t_var_mv_per_c", "reference_temperature_c" }, where);
  read(j, "v_limit", lim.v_limit, where);
  read(j, "v_float", lim.v_float, where);
  read(j, "t_var_mv_per_c", lim.t_var_mv_per_c, where);
  read(j, "reference_temperature_c", lim.reference_temperature_c, where);
}

inline void read_controller(const json &j, ControllerConfig &c, const std::string &where)
{
  check_keys(j, { "policy", "static_limits", "full_limits", "partial_limits", "full_charge_c_rate", "disconnect_soc",
                  "reconnect_hysteresis", "min_interval_days", "max_interval_days", "forced_interval" },
             where);
  if (const auto p = j.find("policy"); p != j.end()) {
    if (!p->is_string()) throw ConfigError(where + ".policy: expected a string");
    try {
      c.policy = policy_from_string(p->get<std::string>());
    } catch (const ModelError &e) {
      throw ConfigError(where + ".policy: " + e.what());
    }
  }
  if (const auto l = j.find("static_limits"); l != j.end()) read_limits(*l, c.static_limits, where + ".static_limits");
  if (const auto l = j.find("full_limits"); l != j.end()) read_limits(*l, c.full_limits, where + ".full_limits");
  if (const auto l = j.find("partial_limits"); l != j.end()) read_limits(*l, c.partial_limits, where + ".partial_limits");
  read(j, "full_charge_c_rate", c.full_charge_c_rate, where);
  read(j, "disconnect_soc", c.disconnect_soc, where);
  read(j, "reconnect_hysteresis", c.reconnect_hysteresis, where);
  read(j, "min_interval_days", c.min_interval_days, where);
  read(j, "max_interval_days", c.max_interval_days, where);
  if (const auto f = j.find("forced_interval"); f != j.end() && !f->is_null()) {
    double v = 0.0;
    read(j, "forced_interval", v, where);
    c.forced_interval = v;
  }
}

inline void read_use(const json &j, UseArchetype &u, const std::string &where)
{
  check_keys(j, { "daily_energy_wh", "evening_fraction", "nonuse_run_length", "use_run_min", "use_run_max", "daily_variation" }, where);
  read(j, "daily_energy_wh", u.daily_energy_wh, where);
  read(j, "evening_fraction", u.evening_fraction, where);
  read(j, "nonuse_run_length", u.nonuse_run_length, where);
  read(j, "use_run_min", u.use_run_min, where);
  read(j, "use_run_max", u.use_run_max, where);
  read(j, "daily_variation", u.daily_variation, where);
}

inline void read_solar(const json &j, SolarParams &s, const std::string &where)
{
  check_keys(j, { "panel_rating_w", "sunrise_h", "sunset_h", "weather_min", "weather_max" }, where);
  read(j, "panel_rating_w", s.panel_rating_w, where);
  read(j, "sunrise_h", s.sunrise_h, where);
  read(j, "sunset_h", s.sunset_h, where);
  read(j, "weather_min", s.weather_min, where);
  read(j, "weather_max", s.weather_max, where);
}

inline void read_temperature(const json &j, TemperatureParams &t, const std::string &where)
{
  check_keys(j, { "mean_c", "amplitude_c", "peak_hour" }, where);
  read(j, "mean_c", t.mean_c, where);
  read(j, "amplitude_c", t.amplitude_c, where);
  read(j, "peak_hour", t.peak_hour, where);
}

inline json load_json_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception &e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

//!< Keys shared by the top level and each scenario entry.
struct Layer
{
  std::optional<std::string> battery_file;
  const json *battery{ nullptr };
  const json *degradation{ nullptr };
  const json *datasheet{ nullptr };
  const json *controller{ nullptr };
  const json *solar{ nullptr };
  const json *temperature{ nullptr };
  const json *use{ nullptr };
  std::optional<double> dt_s, max_years, initial_soc, charger_efficiency, reference_time_years;
  std::optional<std::uint64_t> seed;
};

inline Layer read_layer(const json &j, const std::string &where)
{
  Layer l;
  auto ptr = [&](const char *key) -> const json * {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  };
  if (const auto *b = ptr("battery_file")) {
    if (!b->is_string()) throw ConfigError(where + ".battery_file: expected a string");
    l.battery_file = b->get<std::string>();
  }
  l.battery = ptr("battery");
  l.degradation = ptr("degradation");
  l.datasheet = ptr("datasheet");
  l.controller = ptr("controller");
  l.solar = ptr("solar");
  l.temperature = ptr("temperature");
  l.use = ptr("use");
  auto opt = [&](const char *key, auto &out) {
    using T = typename std::decay_t<decltype(out)>::value_type;
    if (const auto *v = ptr(key)) {
      T tmp{};
      read(j, key, tmp, where);
      out = tmp;
      (void)v;
    }
  };
  opt("dt_s", l.dt_s);
  opt("max_years", l.max_years);
  opt("initial_soc", l.initial_soc);
  opt("charger_efficiency", l.charger_efficiency);
  opt("reference_time_years", l.reference_time_years);
  opt("seed", l.seed);
  return l;
}

inline void apply_layer(const Layer &l, Scenario &sc, ArchetypeProfile &ap, const std::filesystem::path &base_dir, const std::string &where)
{
  if (l.battery_file) {
    const auto path = base_dir / *l.battery_file;
    if (!std::filesystem::exists(path)) throw ConfigError(where + ".battery_file: '" + path.string() + "' does not exist");
    read_battery(load_json_file(path), sc.battery, path.string());
  }
  if (l.battery) read_battery(*l.battery, sc.battery, where + ".battery");
  if (l.degradation) read_degradation(*l.degradation, sc.degradation, where + ".degradation");
  if (l.datasheet) read_datasheet(*l.datasheet, sc.datasheet, where + ".datasheet");
  if (l.controller) read_controller(*l.controller, sc.controller, where + ".controller");
  if (l.solar) read_solar(*l.solar, ap.solar, where + ".solar");
  if (l.temperature) read_temperature(*l.temperature, ap.temperature, where + ".temperature");
  if (l.use) read_use(*l.use, ap.use, where + ".use");
  if (l.dt_s) sc.dt_s = *l.dt_s;
  if (l.max_years) sc.max_years = *l.max_years;
  if (l.initial_soc) sc.initial_soc = *l.initial_soc;
  if (l.charger_efficiency) sc.charger_efficiency = *l.charger_efficiency;
  if (l.reference_time_years) sc.reference_time_years = *l.reference_time_years;
  if (l.seed) sc.seed = *l.seed;
}

} // namespace config_detail

//!< Parses a run configuration. Profile CSVs are ingested at the final dt (after overrides).
inline RunConfig parse_run_config(const json &root, const std::filesystem::path &base_dir, const CliOverrides &cli = {})
{
  using namespace config_detail;
  check_keys(root, { "battery_file", "battery", "degradation", "datasheet", "controller", "solar", "temperature", "use", "dt_s",
                     "max_years", "initial_soc", "charger_efficiency", "reference_time_years", "seed", "scenarios", "compare",
                     "write_trace" },
             "config");
  const Layer top = read_layer(root, "config");

  RunConfig rc;
  read(root, "write_trace", rc.write_trace, "config");
  const auto list = root.find("scenarios");
  if (list == root.end() || !list->is_array() || list->empty()) throw ConfigError("config.scenarios: expected a non-empty array");

  std::set<std::string> names;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json &js = (*list)[i];
    const std::string where = "config.scenarios[" + std::to_string(i) + "]";
    check_keys(js, { "name", "archetype", "profile_csv", "policy", "battery_file", "battery", "degradation", "datasheet", "controller",
                     "solar", "temperature", "use", "dt_s", "max_years", "initial_soc", "charger_efficiency", "reference_time_years",
                     "seed", "csv_columns" },
               where);
    Scenario sc;
    ArchetypeProfile ap;
    std::string name = "scenario_" + std::to_string(i);
    read(js, "name", name, where);
    if (!names.insert(name).second) throw ConfigError(where + ": duplicate scenario name '" + name + "'");
    sc.name = name;

    const bool has_arch = js.contains("archetype"), has_csv = js.contains("profile_csv");
    if (has_arch == has_csv) throw ConfigError(where + ": exactly one of 'archetype' or 'profile_csv' is required");
    if (has_arch) {
      std::string a;
      read(js, "archetype", a, where);
      try {
        ap.use = default_archetype(archetype_from_string(a));
      } catch (const std::exception &e) {
        throw ConfigError(where + ".archetype: " + e.what());
      }
    }

    apply_layer(top, sc, ap, base_dir, "config");
    apply_layer(read_layer(js, where), sc, ap, base_dir, where);
    if (const auto p = js.find("policy"); p != js.end()) {
      if (!p->is_string()) throw ConfigError(where + ".policy: expected a string");
      try {
        sc.controller.policy = policy_from_string(p->get<std::string>());
      } catch (const ModelError &e) {
        throw ConfigError(where + ".policy: " + e.what());
      }
    }
    if (cli.seed) sc.seed = *cli.seed;
    if (cli.dt_s) sc.dt_s = *cli.dt_s;

    if (has_csv) {
      std::string rel;
      read(js, "profile_csv", rel, where);
      ColumnMap cols;
      if (const auto c = js.find("csv_columns"); c != js.end()) {
        check_keys(*c, { "timestamp", "load_w", "solar_w", "temp_c" }, where + ".csv_columns");
        read(*c, "timestamp", cols.timestamp, where);
        read(*c, "load_w", cols.load_w, where);
        read(*c, "solar_w", cols.solar_w, where);
        read(*c, "temp_c", cols.temp_c, where);
      }
      const auto path = base_dir / rel;
      if (!std::filesystem::exists(path)) throw ConfigError(where + ".profile_csv: '" + path.string() + "' does not exist");
      try {
        sc.profile = ingest_csv(path.string(), cols, sc.dt_s).series;
      } catch (const IngestError &e) {
        throw ConfigError(where + ".profile_csv: " + e.what());
      }
    } else {
      sc.profile = ap;
    }
    try {
      sc.validate();
    } catch (const ModelError &e) {
      throw ConfigError(where + ": " + e.what());
    }
    rc.scenarios.push_back(std::move(sc));
  }

  if (const auto c = root.find("compare"); c != root.end()) {
    check_keys(*c, { "base", "alt" }, "config.compare");
    std::string b, a;
    read(*c, "base", b, "config.compare");
    read(*c, "alt", a, "config.compare");
    if (!names.count(b) || !names.count(a)) throw ConfigError("config.compare: base and alt must name scenarios");
    rc.compare_base = b;
    rc.compare_alt = a;
  }
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path &path, const CliOverrides &cli = {})
{
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  RunConfig rc = parse_run_config(config_detail::load_json_file(path), path.parent_path(), cli);
  rc.source = path;
  return rc;
}

inline const Scenario &find_scenario(const RunConfig &rc, const std::string &name)
{
  for (const auto &sc : rc.scenarios)
    if (sc.name == name) return sc;
  throw ConfigError("no scenario named '" + name + "'");
}

} // namespace shs
