/*
 * stress.hpp
 *
 * Lead-acid operating stress factors computed from a battery time series: charge factor,
 * Ah throughput, highest discharge rate, time between full charges, time at low SOC and
 * partial cycling, plus full-recharge frequency and time at float.
 */

#pragma once

#include "battery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace shs {

struct TracePoint
{
  double current{ 0.0 };           //!< [A], > 0 charging
  double soc{ 1.0 };
  bool full_charge_event{ false };  //!< float entered under the full limit set during this step
  bool at_float{ false };
};

struct StressFactors
{
  std::optional<double> charge_factor;  //!< Ah in / Ah out; absent without discharge
  double ah_throughput{ 0.0 };          //!< discharged Ah
  double ah_charged{ 0.0 };
  double highest_discharge_rate{ 0.0 }; //!< [A]
  std::optional<double> time_between_full_charge_mean_h;
  std::optional<double> time_between_full_charge_max_h;
  double time_at_low_soc_h{ 0.0 };
  std::array<std::size_t, 10> partial_cycling{};  //!< cycle depth histogram, bins of 0.1 DOD
  std::optional<double> mean_cycle_depth;
  std::size_t full_charge_count{ 0 };
  std::size_t days{ 0 };
  std::size_t full_recharge_days{ 0 };
  double full_recharge_day_fraction{ 0.0 };
  double days_at_float{ 0.0 };
};

//!< Trace sampled at a uniform dt starting at midnight.
inline StressFactors stress_factors(std::span<const TracePoint> trace, double dt_s, double low_soc = 0.5)
{
  if (trace.empty()) throw ModelError("stress_factors: empty trace");
  if (!(dt_s > 0.0)) throw ModelError("stress_factors: dt must be positive");

  StressFactors sf;
  const double dt_h = dt_s / seconds_per_hour;
  const double steps_per_day = 86400.0 / dt_s;

  std::optional<std::size_t> last_event;
  double gap_sum = 0.0, gap_max = 0.0;
  std::size_t gaps = 0;
  double min_soc_since = 1.0;
  double depth_sum = 0.0;
  std::size_t cycles = 0;
  std::int64_t current_day = -1;
  bool day_has_event = false;
  double float_steps = 0.0;

  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto &tp = trace[k];
    const auto day = static_cast<std::int64_t>(std::floor(static_cast<double>(k) / steps_per_day + 1e-12));
    if (day != current_day) {
      if (current_day >= 0 && day_has_event) ++sf.full_recharge_days;
      current_day = day;
      day_has_event = false;
    }
    if (tp.current > 0.0) sf.ah_charged += tp.current * dt_h;
    if (tp.current < 0.0) {
      sf.ah_throughput += -tp.current * dt_h;
      sf.highest_discharge_rate = std::max(sf.highest_discharge_rate, -tp.current);
    }
    if (tp.soc < low_soc) sf.time_at_low_soc_h += dt_h;
    if (tp.at_float) float_steps += 1.0;
    min_soc_since = std::min(min_soc_since, tp.soc);

    if (tp.full_charge_event) {
      ++sf.full_charge_count;
      day_has_event = true;
      if (last_event) {
        const double gap = static_cast<double>(k - *last_event) * dt_h;
        gap_sum += gap;
        gap_max = std::max(gap_max, gap);
        ++gaps;
        const double depth = std::clamp(1.0 - min_soc_since, 0.0, 1.0);
        sf.partial_cycling[std::min<std::size_t>(static_cast<std::size_t>(depth * 10.0 + 1e-9), 9)]++;
        depth_sum += depth;
        ++cycles;
      }
      last_event = k;
      min_soc_since = 1.0;
    }
  }
  if (day_has_event) ++sf.full_recharge_days;

  sf.days = static_cast<std::size_t>(std::ceil(static_cast<double>(trace.size()) / steps_per_day - 1e-9));
  sf.full_recharge_day_fraction = sf.days ? static_cast<double>(sf.full_recharge_days) / static_cast<double>(sf.days) : 0.0;
  sf.days_at_float = float_steps * dt_h / 24.0;
  if (sf.ah_throughput > 0.0) sf.charge_factor = sf.ah_charged / sf.ah_throughput;
  if (gaps > 0) {
    sf.time_between_full_charge_mean_h = gap_sum / static_cast<double>(gaps);
    sf.time_between_full_charge_max_h = gap_max;
  }
  if (cycles > 0) sf.mean_cycle_depth = depth_sum / static_cast<double>(cycles);
  return sf;
}

} // namespace shs
