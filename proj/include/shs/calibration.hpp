/*
 * calibration.hpp
 *
 * Datasheet calibration of the ageing limits. W_limit is the corrosion layer grown by
 * continuous float at the datasheet float conditions for the datasheet float life; the
 * capacity limits of both mechanisms are a fixed fraction of C_N so that either one alone
 * can end the battery's life. Also provides the two reference experiments used to check a
 * calibration: continuous float until EOL and back-to-back standard cycles until EOL.
 */

#pragma once

#include "battery.hpp"
#include "degradation.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace shs {

inline constexpr double hours_per_year = 8760.0;

struct Datasheet
{
  double float_life_years{ 8.0 };
  double cycle_life{ 450.0 };            //!< Z_N, full equivalent cycles to EOL (100% DOD rating)
  double float_voltage{ 13.65 };         //!< [V]
  double float_temperature_c{ 20.0 };
  double cycle_discharge_current{ 2.0 }; //!< [A] 0.1 C
  double cycle_cutoff_voltage{ 10.5 };   //!< [V] end of discharge
  double cycle_charge_current{ 4.0 };    //!< [A] 0.2 C bulk
  double cycle_charge_voltage{ 14.4 };   //!< [V] absorption
  double cycle_full_charge_c_rate{ 0.02 };
  double cycle_temperature_c{ 25.0 };

  void validate() const
  {
    if (!(float_life_years > 0.0) || !(cycle_life > 0.0) || !(float_voltage > 0.0) || !(cycle_discharge_current > 0.0)
        || !(cycle_charge_current > 0.0) || !(cycle_charge_voltage > 0.0) || !(cycle_full_charge_c_rate > 0.0))
      throw ModelError("datasheet values must be positive");
  }
};

struct CalibratedLimits
{
  double w_limit{};
  double c_corr_limit{};
  double c_deg_limit{};
};

struct FloatRun
{
  double years{};                  //!< simulated duration
  std::optional<double> eol_years; //!< set when stopped at EOL
  double layer_thickness{};
  double total_loss{};
};

//!< Battery held at the datasheet float voltage and temperature, starting full. Runs for
//!< `years`, or until EOL when `stop_at_eol` is set (with the ledger's current limits).
inline FloatRun simulate_float(const BatteryParams &p, const DegradationParams &dp, const Datasheet &ds, double years,
                               bool stop_at_eol, double dt_s = 900.0)
{
  DegradationLedger ledger = make_ledger(dp, p);
  const double t_k = to_kelvin(ds.float_temperature_c);
  double soc = 1.0;
  const auto steps = static_cast<std::size_t>(std::llround(years * hours_per_year * seconds_per_hour / dt_s));
  FloatRun out;
  for (std::size_t k = 0; k < steps; ++k) {
    const double loss = std::min(ledger.total_loss, 0.99 * p.nominal_capacity_ah);
    const double current = std::max(0.0, current_for_voltage(p, soc, ds.float_voltage, loss));
    const BatteryState st = evaluate_state(p, soc, current, t_k, loss);
    register_full_charge(ledger.active_mass);
    step_degradation(ledger, dp, p, soc, st.positive_potential, t_k, current, dt_s);
    soc = step_soc(p, soc, current, st.gassing_current, dt_s).soc;
    if (stop_at_eol && ledger.eol) {
      out.eol_years = static_cast<double>(k + 1) * dt_s / seconds_per_hour / hours_per_year;
      out.years = *out.eol_years;
      out.layer_thickness = ledger.corrosion.layer_thickness;
      out.total_loss = ledger.total_loss;
      return out;
    }
  }
  out.years = static_cast<double>(steps) * dt_s / seconds_per_hour / hours_per_year;
  out.layer_thickness = ledger.corrosion.layer_thickness;
  out.total_loss = ledger.total_loss;
  return out;
}

struct CycleRun
{
  std::optional<double> eol_equivalent_cycles;  //!< discharged Ah / C_N at EOL
  double equivalent_cycles{};
  std::size_t completed_cycles{};
  double weighted_cycles{};
  double corrosion_loss{};
  double active_mass_loss{};
  double years{};
};

//!< Back-to-back standard cycles: discharge at the datasheet current to the cut-off voltage,
//!< then bulk/absorption recharge until the taper current marks a full charge.
inline CycleRun simulate_standard_cycling(const BatteryParams &p, const DegradationParams &dp, const Datasheet &ds,
                                          double max_equivalent_cycles, double dt_s = 300.0)
{
  DegradationLedger ledger = make_ledger(dp, p);
  const double t_k = to_kelvin(ds.cycle_temperature_c);
  const double cap_c = p.capacity_coulomb();
  enum class Stage { discharge, bulk, absorption } stage = Stage::discharge;
  double soc = 1.0;
  double discharged_ah = 0.0;
  CycleRun out;
  std::size_t k = 0;
  while (discharged_ah / p.nominal_capacity_ah < max_equivalent_cycles) {
    const double loss = std::min(ledger.total_loss, 0.99 * p.nominal_capacity_ah);
    double current = 0.0;
    switch (stage) {
    case Stage::discharge: {
      current = -ds.cycle_discharge_current;
      const double v = terminal_voltage_guarded(p, soc, current, loss);
      const double soc_floor = 1.0 - p.soc_cap;
      if (v <= ds.cycle_cutoff_voltage || soc <= soc_floor) {
        stage = Stage::bulk;
        current = 0.0;
        break;
      }
      // do not step below the SOC floor
      const double max_draw = (soc - soc_floor) * cap_c / dt_s;
      current = -std::min(ds.cycle_discharge_current, max_draw);
      break;
    }
    case Stage::bulk:
      current = ds.cycle_charge_current;
      if (terminal_voltage_guarded(p, soc, current, loss) < ds.cycle_charge_voltage) break;
      stage = Stage::absorption;
      [[fallthrough]];
    case Stage::absorption:
      current = std::clamp(current_for_voltage(p, soc, ds.cycle_charge_voltage, loss), 0.0, ds.cycle_charge_current);
      if (current < ds.cycle_full_charge_c_rate * p.nominal_capacity_ah) {
        soc = soc_at_float();
        register_full_charge(ledger.active_mass);
        ++out.completed_cycles;
        stage = Stage::discharge;
        current = 0.0;
      }
      break;
    }
    const BatteryState st = evaluate_state(p, soc, current, t_k, loss);
    step_degradation(ledger, dp, p, soc, st.positive_potential, t_k, current, dt_s);
    soc = step_soc(p, soc, current, st.gassing_current, dt_s).soc;
    if (current < 0.0) discharged_ah += -current * dt_s / seconds_per_hour;
    ++k;
    if (ledger.eol) {
      out.eol_equivalent_cycles = discharged_ah / p.nominal_capacity_ah;
      break;
    }
  }
  out.equivalent_cycles = discharged_ah / p.nominal_capacity_ah;
  out.weighted_cycles = ledger.active_mass.weighted_cycles;
  out.corrosion_loss = ledger.corrosion.capacity_loss;
  out.active_mass_loss = ledger.active_mass.capacity_loss;
  out.years = static_cast<double>(k) * dt_s / seconds_per_hour / hours_per_year;
  return out;
}

//!< Calibrates W_limit and the capacity limits from the datasheet and stores them (and Z_N)
//!< in `dp`.
inline CalibratedLimits calibrate_limits(const BatteryParams &p, DegradationParams &dp, const Datasheet &ds, double dt_s = 900.0)
{
  p.validate();
  ds.validate();
  dp.corrosion_speed.validate();
  dp.nominal_cycles = ds.cycle_life;

  const double t_k = to_kelvin(ds.float_temperature_c);
  const double v_p = positive_terminal_voltage_guarded(p, 1.0, 0.0);
  const auto ks = corrosion_speed(dp.corrosion_speed, v_p, t_k);
  if (!(ks.value > 0.0)) {
    std::ostringstream msg;
    msg << "calibrate_limits: corrosion speed at float conditions is not positive (V_P=" << v_p << " V, T=" << t_k
        << " K, k_s=" << ks.value << ")";
    throw ModelError(msg.str());
  }

  DegradationParams probe = dp;
  probe.w_limit = 1e300;  // keeps C_corr ~ 0 while measuring the layer growth
  const FloatRun run = simulate_float(p, probe, ds, ds.float_life_years, false, dt_s);
  if (!(run.layer_thickness > 0.0)) throw ModelError("calibrate_limits: float simulation grew no corrosion layer");

  CalibratedLimits lim;
  lim.w_limit = run.layer_thickness;
  lim.c_corr_limit = dp.c_corr_limit_fraction * p.nominal_capacity_ah;
  lim.c_deg_limit = dp.c_deg_limit_fraction * p.nominal_capacity_ah;
  dp.w_limit = lim.w_limit;
  return lim;
}

} // namespace shs
