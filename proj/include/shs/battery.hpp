/*
 * battery.hpp
 *
 * Electro-thermal VRLA battery model: acid concentration, open-circuit voltage of the
 * cell and of the positive electrode, modified Shepherd terminal voltage, Tafel gassing
 * current and coulomb-counted state of charge with rest/float corrections.
 *
 * Sign convention: current I > 0 charges the battery.
 * Cell-level quantities (U, U_P, y, c) are per cell; terminal voltages are battery level
 * (cells_in_series cells in series).
 */

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace shs {

//!< Raised when a model is asked to evaluate outside its domain or parameters are inconsistent.
class ModelError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double seconds_per_hour = 3600.0;
inline constexpr double kelvin_offset = 273.15;

inline constexpr double to_kelvin(double celsius) { return celsius + kelvin_offset; }
inline constexpr double to_celsius(double kelvin) { return kelvin - kelvin_offset; }

struct GassingParams
{
  double i_gas0{ 0.017 };  //!< [A] normalised gassing current at (v_gas0, t_gas0)
  double c_v{ 0.183 };     //!< [1/V] voltage coefficient
  double c_t{ 0.06 };      //!< [1/K] temperature coefficient
  double v_gas0{ 13.38 };  //!< [V] nominal (battery-level) voltage
  double t_gas0{ 298.0 };  //!< [K] nominal temperature
};

struct BatteryParams
{
  double nominal_capacity_ah{ 20.0 };       //!< C_N [Ah]
  int cells_in_series{ 6 };                 //!< 12 V battery
  double c_max{ 5490.0 };                   //!< [mol m^-3] acid concentration at SOC = 1
  double electrolyte_volume{ 1.43e-4 };     //!< A_elec [m^3]
  double molar_volume_water{ 17.5 };        //!< V_w [cm^3 mol^-1]
  double molar_volume_acid{ 45.0 };         //!< V_e [cm^3 mol^-1]
  double molar_mass_water{ 18.0 };          //!< M_w [g mol^-1]
  double faraday{ 96485.33212 };            //!< [C mol^-1]
  double b0_nominal{ 3.5 };                 //!< aggregated internal resistance [V per C-rate], battery level
  double b1{ 0.3 };                         //!< charge-transfer overvoltage coefficient [-]
  GassingParams gassing{};
  double rest_current_threshold{ 0.01 };    //!< [A] |I| below this allows OCV-based SOC correction
  double soc_cap{ 0.9999 };                 //!< singularity guard for the SOC/(1-SOC) term

  double capacity_coulomb() const { return nominal_capacity_ah * seconds_per_hour; }

  //!< Slope dc/dSOC of the acid concentration [mol m^-3].
  double concentration_span() const { return capacity_coulomb() / (faraday * electrolyte_volume); }

  void validate() const
  {
    auto positive = [](double v, const char *name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ModelError(std::string("battery parameter '") + name + "' must be strictly positive");
    };
    positive(nominal_capacity_ah, "nominal_capacity_ah");
    positive(c_max, "c_max");
    positive(electrolyte_volume, "electrolyte_volume");
    positive(molar_volume_water, "molar_volume_water");
    positive(molar_volume_acid, "molar_volume_acid");
    positive(molar_mass_water, "molar_mass_water");
    positive(faraday, "faraday");
    positive(b0_nominal, "b0_nominal");
    positive(b1, "b1");
    positive(gassing.i_gas0, "gassing.i_gas0");
    positive(gassing.c_v, "gassing.c_v");
    positive(gassing.c_t, "gassing.c_t");
    positive(gassing.v_gas0, "gassing.v_gas0");
    positive(gassing.t_gas0, "gassing.t_gas0");
    positive(rest_current_threshold, "rest_current_threshold");
    if (cells_in_series < 1) throw ModelError("cells_in_series must be >= 1");
    if (!(soc_cap > 0.0 && soc_cap < 1.0)) throw ModelError("soc_cap must lie in (0, 1)");
    // acid volume fraction below one at full charge (c in mol/cm^3 times cm^3/mol)
    if (!(c_max * 1e-6 * molar_volume_acid < 1.0))
      throw ModelError("c_max * molar_volume_acid must stay below 1 (acid volume fraction)");
    if (!(c_max - concentration_span() > 0.0))
      throw ModelError("acid concentration at SOC = 0 is not positive: c_max too small for C_N / (F A_elec)");
  }
};

struct BatteryState
{
  double soc{ 1.0 };                 //!< [-]
  double acid_concentration{ 0.0 };  //!< [mol m^-3]
  double terminal_voltage{ 0.0 };    //!< [V] battery level
  double positive_potential{ 0.0 };  //!< [V] cell level
  double temperature{ 298.0 };       //!< [K]
  double gassing_current{ 0.0 };     //!< [A]
  double applied_current{ 0.0 };     //!< [A], > 0 charging
};

//!< c(SOC) = c_max + C_N / (F A_elec) (SOC - 1), C_N in coulomb.
inline double acid_concentration(const BatteryParams &p, double soc)
{
  if (!(soc >= 0.0 && soc <= 1.0)) throw ModelError("acid_concentration: soc outside [0, 1]");
  if (!(p.c_max - p.concentration_span() > 0.0))
    throw ModelError("acid_concentration: parameters give c(SOC=0) <= 0");
  return p.c_max + p.concentration_span() * (soc - 1.0);
}

//!< Base-10 log of acid molality [mol/kg]. c is given in mol m^-3 and evaluated in mol cm^-3;
//!< the ratio then comes out in mol/g and is scaled by 1e3.
inline double log_molality(const BatteryParams &p, double c)
{
  const double c_cm3 = c * 1e-6;
  const double water_fraction = 1.0 - c_cm3 * p.molar_volume_acid;
  const double molality = 1e3 * c_cm3 * p.molar_volume_water / (water_fraction * p.molar_mass_water);
  if (!(c > 0.0) || !(water_fraction > 0.0) || !(molality > 0.0) || !std::isfinite(molality))
    throw std::domain_error("log_molality: non-positive argument");
  return std::log10(molality);
}

//!< Acid concentration [mol m^-3] that gives the requested molality [mol/kg] (inverse of the above).
inline double concentration_for_molality(const BatteryParams &p, double molality)
{
  const double m_g = molality * 1e-3;
  const double c_cm3 = m_g * p.molar_mass_water / (p.molar_volume_water + m_g * p.molar_mass_water * p.molar_volume_acid);
  return c_cm3 * 1e6;
}

//!< Cell OCV polynomial in y.
inline constexpr double ocv_cell(double y)
{
  return 1.92 + y * (0.15 + y * (0.06 + y * (0.07 + y * 0.03)));
}

//!< Positive-electrode OCV polynomial in y.
inline constexpr double positive_ocv_cell(double y)
{
  return 1.628 + y * (0.074 + y * (0.033 + y * (0.043 + y * 0.022)));
}

inline double log_molality_at_soc(const BatteryParams &p, double soc)
{
  return log_molality(p, acid_concentration(p, soc));
}

//!< Battery-level OCV at the given SOC.
inline double battery_ocv(const BatteryParams &p, double soc)
{
  return p.cells_in_series * ocv_cell(log_molality_at_soc(p, soc));
}

//!< b0 grows as capacity fades: b0(t) = b0_nominal C_N / (C_N - C).
inline double aged_b0(const BatteryParams &p, double capacity_loss_ah)
{
  const double remaining = p.nominal_capacity_ah - capacity_loss_ah;
  if (!(remaining > 0.0)) throw ModelError("aged_b0: capacity loss exhausts the nominal capacity");
  return p.b0_nominal * p.nominal_capacity_ah / remaining;
}

//!< Overpotential gain dV/dI * C_N [V per C-rate] for the current direction.
//!< Charging uses SOC/(1-SOC); discharging uses the mirrored DOD term (1-SOC)/SOC so that the
//!< overpotential stays bounded when a full battery starts to discharge.
inline double overpotential_gain(const BatteryParams &p, double soc, double current, double capacity_loss_ah)
{
  const double b0 = aged_b0(p, capacity_loss_ah);
  if (current >= 0.0) return b0 * (1.0 + p.b1 * soc / (1.0 - soc));
  return b0 * (1.0 + p.b1 * (1.0 - soc) / soc);
}

inline double clamp_soc_for_voltage(const BatteryParams &p, double soc)
{
  const double lo = 1.0 - p.soc_cap;
  return soc < lo ? lo : (soc > p.soc_cap ? p.soc_cap : soc);
}

//!< Battery-level overpotential sum b0 I/C_N + b0 b1 (I/C_N) (SOC term). Zero at I = 0.
inline double overpotential(const BatteryParams &p, double soc, double current, double capacity_loss_ah)
{
  if (current == 0.0) return 0.0;
  return overpotential_gain(p, soc, current, capacity_loss_ah) * current / p.nominal_capacity_ah;
}

//!< Terminal voltage with the strict domain: soc must be in [0, 1) for non-zero current
//!< (soc = 1 with I != 0 hits the SOC/(1-SOC) singularity).
inline double terminal_voltage(const BatteryParams &p, double soc, double current, double capacity_loss_ah = 0.0)
{
  if (!(soc >= 0.0 && soc <= 1.0)) throw ModelError("terminal_voltage: soc outside [0, 1]");
  if (current != 0.0 && (soc >= 1.0 || soc <= 0.0))
    throw ModelError("terminal_voltage: soc at the boundary with non-zero current (singular overpotential)");
  return battery_ocv(p, soc) + overpotential(p, soc, current, capacity_loss_ah);
}

//!< Terminal voltage as used inside the simulation loop: soc is clamped to [1 - soc_cap, soc_cap]
//!< for the overpotential terms only.
inline double terminal_voltage_guarded(const BatteryParams &p, double soc, double current, double capacity_loss_ah = 0.0)
{
  return battery_ocv(p, soc) + overpotential(p, clamp_soc_for_voltage(p, soc), current, capacity_loss_ah);
}

//!< Current that drives the terminal voltage to `target_voltage` at the given SOC (guarded).
//!< V(I) is piecewise linear and strictly increasing in I with a kink at I = 0.
inline double current_for_voltage(const BatteryParams &p, double soc, double target_voltage, double capacity_loss_ah = 0.0)
{
  const double s = clamp_soc_for_voltage(p, soc);
  const double ocv = battery_ocv(p, soc);
  const double direction = target_voltage >= ocv ? 1.0 : -1.0;
  const double gain = overpotential_gain(p, s, direction, capacity_loss_ah);
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw ModelError("current_for_voltage: degenerate overpotential gain " + std::to_string(gain) + " at soc " + std::to_string(soc));
  return p.nominal_capacity_ah * (target_voltage - ocv) / gain;
}

//!< Tafel gassing current I_gas0 exp(c_V (V - V_gas0) + c_T (T - T_gas0)).
inline double gassing_current(const BatteryParams &p, double voltage, double temperature_k)
{
  if (!(temperature_k > 0.0)) throw ModelError("gassing_current: temperature must be positive kelvin");
  const auto &g = p.gassing;
  return g.i_gas0 * std::exp(g.c_v * (voltage - g.v_gas0) + g.c_t * (temperature_k - g.t_gas0));
}

struct SocStep
{
  double soc{};
  bool clamped{ false };
  double unclamped_soc{};  //!< value before clamping to [0, 1]
};

//!< Coulomb counting: soc += (I - I_gas) dt / C_N, clamped to [0, 1].
inline SocStep step_soc(const BatteryParams &p, double soc, double current, double gassing, double dt_s)
{
  if (!(dt_s > 0.0)) throw ModelError("step_soc: dt must be positive");
  const double next = soc + (current - gassing) * dt_s / p.capacity_coulomb();
  SocStep out{ next, false, next };
  if (next < 0.0) {
    out.soc = 0.0;
    out.clamped = true;
  } else if (next > 1.0) {
    out.soc = 1.0;
    out.clamped = true;
  }
  return out;
}

struct OcvInversion
{
  double soc{};
  bool clamped{ false };  //!< voltage was outside the OCV range; soc is the nearest endpoint
};

//!< SOC whose battery OCV equals `voltage`, by bisection on the monotone OCV(SOC) curve.
inline OcvInversion invert_ocv(const BatteryParams &p, double voltage)
{
  const double v_lo = battery_ocv(p, 0.0);
  const double v_hi = battery_ocv(p, 1.0);
  if (voltage <= v_lo) return { 0.0, voltage < v_lo };
  if (voltage >= v_hi) return { 1.0, voltage > v_hi };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (battery_ocv(p, mid) < voltage)
      lo = mid;
    else
      hi = mid;
  }
  return { 0.5 * (lo + hi), false };
}

//!< Rest-point SOC correction: returns the OCV-inverted SOC when |I| is below the rest threshold.
inline std::optional<OcvInversion> correct_soc_by_ocv(const BatteryParams &p, double measured_voltage, double current)
{
  if (!(std::abs(current) < p.rest_current_threshold)) return std::nullopt;
  return invert_ocv(p, measured_voltage);
}

//!< Float-charge assumption: the battery is full whenever float is reached.
inline constexpr double soc_at_float() { return 1.0; }

//!< Fills the derived fields of a state from soc, current and temperature.
inline BatteryState evaluate_state(const BatteryParams &p, double soc, double current, double temperature_k, double capacity_loss_ah = 0.0)
{
  BatteryState st;
  st.soc = soc;
  st.applied_current = current;
  st.temperature = temperature_k;
  st.acid_concentration = acid_concentration(p, soc);
  st.terminal_voltage = terminal_voltage_guarded(p, soc, current, capacity_loss_ah);
  const double y = log_molality(p, st.acid_concentration);
  st.positive_potential = positive_ocv_cell(y) + 0.5 * overpotential(p, clamp_soc_for_voltage(p, soc), current, capacity_loss_ah) / p.cells_in_series;
  st.gassing_current = gassing_current(p, st.terminal_voltage, temperature_k);
  return st;
}

} // namespace shs
