/*
 * charge_control.hpp
 *
 * Three-stage charge controller (bulk -> absorption -> float) with temperature-compensated
 * voltage limits, low-SOC load disconnect, and the adaptive full-recharge scheduler that
 * spaces full recharges by the share of recent degradation caused by corrosion.
 */

#pragma once

#include "battery.hpp"
#include "degradation.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

namespace shs {

struct VoltageLimits
{
  double v_limit{ 14.5 };                  //!< [V] absorption ceiling at the reference temperature
  double v_float{ 13.5 };                  //!< [V]
  double t_var_mv_per_c{ 0.0 };            //!< [mV/degC] compensation slope
  double reference_temperature_c{ 25.0 };

  void validate() const
  {
    if (!(v_float < v_limit)) throw ModelError("voltage limits: v_float must be below v_limit");
  }

  friend bool operator==(const VoltageLimits &, const VoltageLimits &) = default;
};

namespace limits {
inline constexpr VoltageLimits bboxx() { return { 14.5, 13.5, 0.0, 25.0 }; }
inline constexpr VoltageLimits proposed_full() { return { 14.5, 13.5, -30.0, 25.0 }; }
inline constexpr VoltageLimits proposed_partial() { return { 13.0, 12.8, -30.0, 25.0 }; }
} // namespace limits

//!< Shifts both limits by t_var (T - T_ref).
inline VoltageLimits compensated_limits(const VoltageLimits &lim, double temperature_c)
{
  const double shift = lim.t_var_mv_per_c * (temperature_c - lim.reference_temperature_c) / 1000.0;
  VoltageLimits out = lim;
  out.v_limit += shift;
  out.v_float += shift;
  return out;
}

enum class Phase { bulk, absorption, float_charge, disconnected };
enum class Policy { bboxx_static, adaptive };

inline std::string_view to_string(Phase ph)
{
  switch (ph) {
  case Phase::bulk: return "bulk";
  case Phase::absorption: return "absorption";
  case Phase::float_charge: return "float";
  case Phase::disconnected: return "disconnected";
  }
  return "?";
}

inline std::string_view to_string(Policy p) { return p == Policy::adaptive ? "adaptive" : "bboxx_static"; }

inline Policy policy_from_string(std::string_view s)
{
  if (s == "adaptive") return Policy::adaptive;
  if (s == "bboxx_static" || s == "bboxx" || s == "static") return Policy::bboxx_static;
  throw ModelError("unknown policy '" + std::string(s) + "'");
}

struct ControllerConfig
{
  Policy policy{ Policy::bboxx_static };
  VoltageLimits static_limits{ limits::bboxx() };
  VoltageLimits full_limits{ limits::proposed_full() };
  VoltageLimits partial_limits{ limits::proposed_partial() };
  double full_charge_c_rate{ 0.02 };       //!< absorption taper below this C-rate = fully charged
  double disconnect_soc{ 0.5 };
  double reconnect_hysteresis{ 0.05 };
  double min_interval_days{ 1.0 };
  double max_interval_days{ 6.0 };
  std::optional<double> forced_interval{};  //!< pins D (testing / static equivalence)

  void validate() const
  {
    static_limits.validate();
    full_limits.validate();
    partial_limits.validate();
    if (!(full_charge_c_rate > 0.0)) throw ModelError("full_charge_c_rate must be positive");
    if (!(min_interval_days >= 1.0 && max_interval_days >= min_interval_days))
      throw ModelError("recharge interval bounds must satisfy 1 <= min <= max");
  }
};

struct ControllerState
{
  Phase phase{ Phase::bulk };
  Policy policy{ Policy::bboxx_static };
  int days_since_full_recharge{ 0 };
  double recharge_interval{ 1.0 };   //!< D [days]
  VoltageLimits active_limits{ limits::bboxx() };
  bool using_full_limits{ true };
  bool load_disconnected{ false };
};

inline ControllerState make_controller(const ControllerConfig &cfg)
{
  ControllerState st;
  st.policy = cfg.policy;
  st.recharge_interval = cfg.forced_interval.value_or(cfg.min_interval_days);
  if (cfg.policy == Policy::bboxx_static) {
    st.active_limits = cfg.static_limits;
    st.using_full_limits = true;
  } else {
    st.active_limits = cfg.partial_limits;
    st.using_full_limits = false;
  }
  return st;
}

//!< D = 1 + 5 dC_corr / dC, clamped to [min, max]. The carry-forward for dC = 0 is resolved
//!< in the ledger (close_day) so the fraction is always defined here.
inline double recharge_interval(const DailyDelta &delta, double min_days = 1.0, double max_days = 6.0)
{
  double fraction = delta.corrosion_fraction;
  if (delta.d_total > 0.0) fraction = delta.d_corrosion / delta.d_total;
  fraction = std::clamp(fraction, 0.0, 1.0);
  return std::clamp(min_days + (max_days - min_days) * fraction, min_days, max_days);
}

//!< A full recharge is due once the days since the last one reach D.
inline bool full_recharge_due(const ControllerState &ctrl)
{
  return static_cast<double>(ctrl.days_since_full_recharge) >= ctrl.recharge_interval;
}

inline VoltageLimits select_limits(const ControllerConfig &cfg, const ControllerState &ctrl)
{
  if (ctrl.policy == Policy::bboxx_static) return cfg.static_limits;
  return full_recharge_due(ctrl) ? cfg.full_limits : cfg.partial_limits;
}

//!< Refreshes the active limit set; switching partial -> full starts a new charge cycle.
inline void refresh_limits(const ControllerConfig &cfg, ControllerState &ctrl)
{
  const bool full = ctrl.policy == Policy::bboxx_static || full_recharge_due(ctrl);
  if (full && !ctrl.using_full_limits && ctrl.phase != Phase::disconnected) ctrl.phase = Phase::bulk;
  ctrl.using_full_limits = full;
  ctrl.active_limits = select_limits(cfg, ctrl);
}

//!< Day boundary: increments the day counter and, under the adaptive policy, recomputes D.
inline void on_day_boundary(const ControllerConfig &cfg, ControllerState &ctrl, const DailyDelta &previous_day)
{
  ++ctrl.days_since_full_recharge;
  if (ctrl.policy == Policy::adaptive)
    ctrl.recharge_interval = cfg.forced_interval.value_or(recharge_interval(previous_day, cfg.min_interval_days, cfg.max_interval_days));
  refresh_limits(cfg, ctrl);
}

struct LoadSwitch
{
  bool disconnected{};
  bool newly_disconnected{};
  bool reconnected{};
};

//!< Low-SOC disconnect below `disconnect_soc`; reconnect once SOC recovers by the hysteresis.
inline LoadSwitch load_disconnect(const ControllerConfig &cfg, ControllerState &ctrl, double soc)
{
  LoadSwitch out;
  if (!ctrl.load_disconnected && soc < cfg.disconnect_soc) {
    ctrl.load_disconnected = true;
    out.newly_disconnected = true;
  } else if (ctrl.load_disconnected && soc >= cfg.disconnect_soc + cfg.reconnect_hysteresis - 1e-12) {
    ctrl.load_disconnected = false;
    out.reconnected = true;
  }
  out.disconnected = ctrl.load_disconnected;
  return out;
}

struct ChargeStep
{
  double battery_current{ 0.0 };   //!< [A] applied to the battery, > 0 charging
  double load_served{ 0.0 };       //!< [A] load current actually supplied
  double load_shed{ 0.0 };         //!< [A] load current lost to the disconnect
  bool float_reached{ false };     //!< float entered during this step
  bool full_recharge{ false };     //!< float entered under the full limit set
  bool absorption_entered{ false };
  bool regulated{ false };         //!< current set by a voltage hold (absorption or float)
  bool full_float_hold{ false };   //!< float held under the full limit set (SOC taken as 1)
  VoltageLimits limits{};          //!< compensated limits used
};

//!< One controller step. `available_charge_current` is the PV current delivered at the battery
//!< bus, `load_current` the load demand at the bus. Both are >= 0.
inline ChargeStep tscc_step(const ControllerConfig &cfg, ControllerState &ctrl, const BatteryParams &p, double soc,
                            double capacity_loss_ah, double temperature_c, double available_charge_current,
                            double load_current)
{
  if (available_charge_current < 0.0 || load_current < 0.0) throw ModelError("tscc_step: currents must be non-negative");

  ChargeStep out;
  out.limits = compensated_limits(ctrl.active_limits, temperature_c);
  const auto &lim = out.limits;

  if (ctrl.load_disconnected) {
    out.load_shed = load_current;
  } else {
    out.load_served = load_current;
  }
  const double surplus = available_charge_current - out.load_served;

  if (surplus < 0.0) {
    out.battery_current = surplus;
    if (ctrl.phase != Phase::disconnected) ctrl.phase = Phase::bulk;
    return out;
  }
  if (surplus == 0.0) {
    out.battery_current = 0.0;
    return out;
  }

  if (ctrl.phase == Phase::disconnected) ctrl.phase = Phase::bulk;
  const double threshold = cfg.full_charge_c_rate * p.nominal_capacity_ah;

  if (ctrl.phase == Phase::bulk) {
    const double v = terminal_voltage_guarded(p, soc, surplus, capacity_loss_ah);
    if (v < lim.v_limit) {
      out.battery_current = surplus;
      return out;
    }
    ctrl.phase = Phase::absorption;
    out.absorption_entered = true;
  }

  if (ctrl.phase == Phase::absorption) {
    const double hold = current_for_voltage(p, soc, lim.v_limit, capacity_loss_ah);
    if (hold >= threshold) {
      out.battery_current = std::clamp(hold, 0.0, surplus);
      out.regulated = out.battery_current < surplus;
      return out;
    }
    ctrl.phase = Phase::float_charge;
    out.float_reached = true;
    if (ctrl.using_full_limits) {
      out.full_recharge = true;
      ctrl.days_since_full_recharge = 0;
    }
  }

  // float: hold v_float, never discharge to do so. Under the full set the battery is taken as full.
  out.full_float_hold = ctrl.using_full_limits;
  const double hold = current_for_voltage(p, out.full_float_hold ? soc_at_float() : soc, lim.v_float, capacity_loss_ah);
  out.battery_current = std::clamp(hold, 0.0, surplus);
  out.regulated = out.battery_current < surplus;
  return out;
}

} // namespace shs
