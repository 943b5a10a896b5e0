/*
 * degradation.hpp
 *
 * Weighted Ah-throughput ageing: positive-grid corrosion driven by the positive electrode
 * potential, active-mass degradation driven by SOC-weighted discharge throughput, and the
 * total capacity loss / end-of-life condition.
 *
 * Model is taken from:
 * Schiffer J, Sauer DU, Bindner H, Cronin T, Lundsager P, Kaiser R. Model prediction for ranking
 * lead-acid batteries according to expected lifetime in renewable energy systems and autonomous
 * power-supply systems. Journal of Power Sources. 2007;168(1):66-78.
 * Acid stratification is not modelled (gel VRLA).
 */

#pragma once

#include "battery.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace shs {

//!< Positive electrode potential [V, cell level]: U_P plus half of the battery overpotential per cell.
inline double positive_terminal_voltage(const BatteryParams &p, double soc, double current, double capacity_loss_ah = 0.0)
{
  if (current != 0.0 && (soc >= 1.0 || soc <= 0.0))
    throw ModelError("positive_terminal_voltage: soc at the boundary with non-zero current");
  const double y = log_molality_at_soc(p, soc);
  return positive_ocv_cell(y) + 0.5 * overpotential(p, soc, current, capacity_loss_ah) / p.cells_in_series;
}

//!< Guarded variant used inside the simulation loop (same SOC clamp as terminal_voltage_guarded).
inline double positive_terminal_voltage_guarded(const BatteryParams &p, double soc, double current, double capacity_loss_ah = 0.0)
{
  const double y = log_molality_at_soc(p, soc);
  return positive_ocv_cell(y) + 0.5 * overpotential(p, clamp_soc_for_voltage(p, soc), current, capacity_loss_ah) / p.cells_in_series;
}

// ---------------------------------------------------------------------------
// Corrosion
// ---------------------------------------------------------------------------

//!< Corrosion speed surface k_s(V_P, T): piecewise-linear lookup in V_P scaled by an
//!< exponential temperature factor that multiplies k_s by `temperature_factor` every
//!< `temperature_step_k` kelvin.
struct CorrosionSpeedTable
{
  //!< [V] positive electrode potential knots (strictly increasing)
  std::vector<double> voltage{ 1.50, 1.60, 1.70, 1.73, 1.74, 1.76, 1.78, 1.80, 1.85, 1.90, 1.95, 2.00 };
  //!< [um/h] speed at the reference temperature
  std::vector<double> speed{ 2.0e-3, 1.9e-3, 1.8e-3, 1.7e-3, 3.2e-3, 3.6e-3, 3.8e-3, 4.0e-3, 6.4e-3, 9.2e-3, 12.0e-3, 15.0e-3 };
  double reference_temperature_k{ 298.0 };
  double temperature_step_k{ 10.0 };
  double temperature_factor{ 2.0 };
  double min_temperature_k{ 273.0 };
  double max_temperature_k{ 333.0 };

  void validate() const
  {
    if (voltage.size() < 2 || voltage.size() != speed.size())
      throw ModelError("corrosion speed table needs >= 2 knots with matching speed values");
    for (std::size_t i = 1; i < voltage.size(); ++i)
      if (!(voltage[i] > voltage[i - 1])) throw ModelError("corrosion speed voltage knots must be strictly increasing");
    for (double s : speed)
      if (!(s >= 0.0)) throw ModelError("corrosion speed values must be non-negative");
    if (!(temperature_step_k > 0.0) || !(temperature_factor > 0.0))
      throw ModelError("corrosion temperature scaling must be positive");
  }
};

struct CorrosionSpeed
{
  double value{};         //!< [um/h]
  bool clamped{ false };  //!< V_P or T outside the table range
};

inline CorrosionSpeed corrosion_speed(const CorrosionSpeedTable &tab, double positive_potential, double temperature_k)
{
  bool clamped = false;
  double v = positive_potential;
  if (v < tab.voltage.front()) {
    v = tab.voltage.front();
    clamped = true;
  } else if (v > tab.voltage.back()) {
    v = tab.voltage.back();
    clamped = true;
  }
  double t = temperature_k;
  if (t < tab.min_temperature_k) {
    t = tab.min_temperature_k;
    clamped = true;
  } else if (t > tab.max_temperature_k) {
    t = tab.max_temperature_k;
    clamped = true;
  }

  const auto it = std::upper_bound(tab.voltage.begin(), tab.voltage.end(), v);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - tab.voltage.begin()), tab.voltage.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (v - tab.voltage[lo]) / (tab.voltage[hi] - tab.voltage[lo]);
  const double base = tab.speed[lo] + std::clamp(w, 0.0, 1.0) * (tab.speed[hi] - tab.speed[lo]);
  const double scale = std::pow(tab.temperature_factor, (t - tab.reference_temperature_k) / tab.temperature_step_k);
  return { base * scale, clamped };
}

struct CorrosionParams
{
  double regime_threshold_v{ 1.74 };  //!< below: sub-linear growth, at/above: linear growth
  double growth_exponent{ 0.6 };      //!< W = k_s tau^0.6 in the sub-linear regime
};

struct CorrosionState
{
  double layer_thickness{ 0.0 };  //!< W [um]
  double capacity_loss{ 0.0 };    //!< C_corr [Ah]
  double w_limit{ 1.0 };          //!< [um] thickness at end of float life
  double c_corr_limit{ 4.0 };     //!< [Ah]
};

inline double corrosion_capacity_loss(const CorrosionState &corr)
{
  if (!(corr.w_limit > 0.0)) throw ModelError("corrosion_capacity_loss: W_limit must be positive");
  return corr.c_corr_limit * corr.layer_thickness / corr.w_limit;
}

//!< Advances W over dt seconds. Below the threshold the layer follows W = k_s tau^n with the
//!< effective age tau recovered from the current W; at or above it grows linearly.
inline CorrosionState grow_corrosion_layer(CorrosionState corr, double k_s, double positive_potential, double dt_s,
                                           const CorrosionParams &cp = {})
{
  if (!(dt_s > 0.0)) throw ModelError("grow_corrosion_layer: dt must be positive");
  if (k_s > 0.0) {
    const double dt_h = dt_s / seconds_per_hour;
    if (positive_potential < cp.regime_threshold_v) {
      const double tau = std::pow(corr.layer_thickness / k_s, 1.0 / cp.growth_exponent);
      const double grown = k_s * std::pow(tau + dt_h, cp.growth_exponent);
      corr.layer_thickness = std::max(corr.layer_thickness, grown);
    } else {
      corr.layer_thickness += k_s * dt_h;
    }
  }
  corr.capacity_loss = corrosion_capacity_loss(corr);
  return corr;
}

// ---------------------------------------------------------------------------
// Active mass degradation
// ---------------------------------------------------------------------------

struct ActiveMassParams
{
  double c_soc0{ 6.614e-5 };     //!< [1/h]
  double c_soc_min{ 3.307e-3 };  //!< [1/h]
  double i_ref{ 2.0 };           //!< [A] reference discharge current of the current factor
  double current_floor{ 1e-3 };  //!< [A] floor inside the current factor
  double exponent{ 5.0 };        //!< C_deg = C_deg,limit exp(-exponent (1 - Z_w/Z_N))
};

struct ActiveMassState
{
  double weighted_cycles{ 0.0 };            //!< Z_w
  double nominal_cycles{ 450.0 };           //!< Z_N
  double capacity_loss{ 0.0 };              //!< C_deg [Ah]
  double c_deg_limit{ 4.0 };                //!< [Ah]
  double time_since_full_charge_h{ 0.0 };
  double min_soc_since_full_charge{ 1.0 };
};

inline double current_factor(const ActiveMassParams &ap, double discharge_current)
{
  return std::sqrt(ap.i_ref / std::max(discharge_current, ap.current_floor));
}

//!< f_SOC = 1 + (c_soc0 + c_soc_min (1 - SOC_min)) f_I(I_d) dt_fullcharge.
inline double soc_factor(const ActiveMassParams &ap, const ActiveMassState &am, double discharge_current)
{
  return 1.0 + (ap.c_soc0 + ap.c_soc_min * (1.0 - am.min_soc_since_full_charge)) * current_factor(ap, discharge_current)
                 * am.time_since_full_charge_h;
}

inline double active_mass_loss(const ActiveMassState &am, const ActiveMassParams &ap = {})
{
  if (!(am.nominal_cycles > 0.0)) throw ModelError("active_mass_loss: Z_N must be positive");
  return am.c_deg_limit * std::exp(-ap.exponent * (1.0 - am.weighted_cycles / am.nominal_cycles));
}

//!< Z_w += I_d f_SOC dt / C_N. Only the discharge magnitude counts.
inline ActiveMassState accumulate_weighted_cycles(ActiveMassState am, double discharge_current, double f_soc, double dt_s,
                                                  double nominal_capacity_ah, const ActiveMassParams &ap = {})
{
  if (discharge_current > 0.0)
    am.weighted_cycles += discharge_current * f_soc * dt_s / (nominal_capacity_ah * seconds_per_hour);
  am.capacity_loss = active_mass_loss(am, ap);
  return am;
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

struct DailyDelta
{
  double d_corrosion{ 0.0 };           //!< C_corr(t) - C_corr(t - 1 day) [Ah]
  double d_total{ 0.0 };               //!< C(t) - C(t - 1 day) [Ah]
  double corrosion_fraction{ 1.0 };    //!< d_corrosion / d_total, carried forward when d_total = 0
};

struct DegradationLedger
{
  CorrosionState corrosion{};
  ActiveMassState active_mass{};
  double total_loss{ 0.0 };  //!< C = C_corr + C_deg [Ah]
  bool eol{ false };
  std::vector<DailyDelta> daily_deltas;

  double day_start_corrosion{ 0.0 };
  double day_start_total{ 0.0 };
};

struct TotalLoss
{
  double total{};
  bool eol{};
};

//!< C = C_corr + C_deg; end of life once C >= eol_fraction C_N.
inline TotalLoss total_loss_and_eol(const DegradationLedger &ledger, const BatteryParams &p, double eol_fraction = 0.2)
{
  const double c = ledger.corrosion.capacity_loss + ledger.active_mass.capacity_loss;
  return { c, c >= eol_fraction * p.nominal_capacity_ah };
}

//!< Closes the current day and appends its (dC_corr, dC) pair.
inline DailyDelta close_day(DegradationLedger &ledger)
{
  DailyDelta d;
  d.d_corrosion = ledger.corrosion.capacity_loss - ledger.day_start_corrosion;
  d.d_total = ledger.total_loss - ledger.day_start_total;
  if (d.d_total > 0.0)
    d.corrosion_fraction = std::clamp(d.d_corrosion / d.d_total, 0.0, 1.0);
  else
    d.corrosion_fraction = ledger.daily_deltas.empty() ? 1.0 : ledger.daily_deltas.back().corrosion_fraction;
  ledger.daily_deltas.push_back(d);
  ledger.day_start_corrosion = ledger.corrosion.capacity_loss;
  ledger.day_start_total = ledger.total_loss;
  return d;
}

//!< Full-charge bookkeeping: float reached under full limits.
inline void register_full_charge(ActiveMassState &am)
{
  am.time_since_full_charge_h = 0.0;
  am.min_soc_since_full_charge = 1.0;
}

struct DegradationParams
{
  CorrosionSpeedTable corrosion_speed{};
  CorrosionParams corrosion{};
  ActiveMassParams active_mass{};
  double nominal_cycles{ 450.0 };         //!< Z_N
  double w_limit{ 0.0 };                  //!< [um]; 0 = not calibrated yet
  double c_corr_limit_fraction{ 0.2 };    //!< C_corr,limit / C_N
  double c_deg_limit_fraction{ 0.2 };     //!< C_deg,limit / C_N
  double eol_fraction{ 0.2 };             //!< EOL when C >= eol_fraction C_N

  bool calibrated() const { return w_limit > 0.0; }
};

inline DegradationLedger make_ledger(const DegradationParams &dp, const BatteryParams &p)
{
  DegradationLedger ledger;
  ledger.corrosion.w_limit = dp.w_limit > 0.0 ? dp.w_limit : 1.0;
  ledger.corrosion.c_corr_limit = dp.c_corr_limit_fraction * p.nominal_capacity_ah;
  ledger.active_mass.nominal_cycles = dp.nominal_cycles;
  ledger.active_mass.c_deg_limit = dp.c_deg_limit_fraction * p.nominal_capacity_ah;
  ledger.active_mass.capacity_loss = active_mass_loss(ledger.active_mass, dp.active_mass);
  const auto tl = total_loss_and_eol(ledger, p, dp.eol_fraction);
  ledger.total_loss = tl.total;
  ledger.eol = tl.eol;
  ledger.day_start_corrosion = ledger.corrosion.capacity_loss;
  ledger.day_start_total = ledger.total_loss;
  return ledger;
}

struct DegradationStepInfo
{
  double corrosion_speed{};
  bool speed_clamped{ false };
  double soc_factor{ 1.0 };
};

//!< One left-rectangle step of both ageing channels using the state at the start of the step.
inline DegradationStepInfo step_degradation(DegradationLedger &ledger, const DegradationParams &dp, const BatteryParams &p,
                                            double soc, double positive_potential, double temperature_k, double current,
                                            double dt_s)
{
  DegradationStepInfo info;
  auto &am = ledger.active_mass;
  am.min_soc_since_full_charge = std::min(am.min_soc_since_full_charge, soc);

  const auto ks = corrosion_speed(dp.corrosion_speed, positive_potential, temperature_k);
  info.corrosion_speed = ks.value;
  info.speed_clamped = ks.clamped;
  ledger.corrosion = grow_corrosion_layer(ledger.corrosion, ks.value, positive_potential, dt_s, dp.corrosion);

  const double discharge = current < 0.0 ? -current : 0.0;
  if (discharge > 0.0) info.soc_factor = soc_factor(dp.active_mass, am, discharge);
  am = accumulate_weighted_cycles(am, discharge, info.soc_factor, dt_s, p.nominal_capacity_ah, dp.active_mass);
  am.time_since_full_charge_h += dt_s / seconds_per_hour;

  const auto tl = total_loss_and_eol(ledger, p, dp.eol_fraction);
  ledger.total_loss = tl.total;
  ledger.eol = tl.eol;
  return info;
}

} // namespace shs
