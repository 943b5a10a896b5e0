/*
 * simulation.hpp
 *
 * Closed-loop solar home system simulation: profile -> charge controller -> battery model ->
 * degradation -> daily controller adaptation, stepped until end of life (or a horizon cap),
 * with result aggregation and paired strategy comparison.
 */

#pragma once

#include "battery.hpp"
#include "calibration.hpp"
#include "charge_control.hpp"
#include "degradation.hpp"
#include "profiles.hpp"
#include "stress.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <future>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace shs {

struct ArchetypeProfile
{
  UseArchetype use{};
  SolarParams solar{};
  TemperatureParams temperature{};
};

using ProfileSource = std::variant<ArchetypeProfile, TimeSeries>;

struct Scenario
{
  std::string name{ "scenario" };
  BatteryParams battery{};
  DegradationParams degradation{};
  Datasheet datasheet{};
  ControllerConfig controller{};
  ProfileSource profile{ ArchetypeProfile{} };
  double dt_s{ 900.0 };
  double max_years{ 15.0 };
  std::uint64_t seed{ 1 };
  double initial_soc{ 1.0 };
  double charger_efficiency{ 0.95 };
  bool record_trace{ false };
  std::optional<double> reference_time_years{};  //!< SOH is reported at this time when set

  void validate() const
  {
    battery.validate();
    controller.validate();
    degradation.corrosion_speed.validate();
    datasheet.validate();
    if (!(dt_s > 0.0) || std::abs(std::fmod(86400.0, dt_s)) > 1e-9) throw ModelError("scenario dt must divide one day evenly");
    if (!(max_years > 0.0)) throw ModelError("scenario max_years must be positive");
    if (!(initial_soc >= 0.0 && initial_soc <= 1.0)) throw ModelError("scenario initial_soc outside [0, 1]");
    if (!(charger_efficiency > 0.0 && charger_efficiency <= 1.0)) throw ModelError("charger efficiency outside (0, 1]");
    if (const auto *ts = std::get_if<TimeSeries>(&profile)) {
      if (ts->samples.empty()) throw ModelError("scenario profile time series is empty");
      if (std::abs(ts->dt_s - dt_s) > 1e-9) throw ModelError("scenario profile dt differs from the simulation dt");
      ts->validate();
    }
  }
};

struct DayRecord
{
  int day{};                     //!< day index that just ended (0-based)
  double corrosion_loss{};       //!< C_corr at the end of the day [Ah]
  double active_mass_loss{};     //!< C_deg [Ah]
  double total_loss{};           //!< C [Ah]
  double recharge_interval{};    //!< D in force for the next day
  bool full_recharge{};          //!< a full recharge happened during this day
  double min_soc{};
};

struct Histogram
{
  double lower{};
  double width{};
  std::vector<double> hours;

  void add(double value, double h)
  {
    auto idx = static_cast<long>(std::floor((value - lower) / width));
    idx = std::clamp<long>(idx, 0, static_cast<long>(hours.size()) - 1);
    hours[static_cast<std::size_t>(idx)] += h;
  }
  double total() const
  {
    double s = 0.0;
    for (double v : hours) s += v;
    return s;
  }
};

struct LoadLossEvent
{
  double start_h{};
  double duration_h{};
  double unserved_ah{};
};

struct SimResult
{
  std::string name;
  Policy policy{};
  double lifetime_years{};
  bool censored{ false };
  double fec{};
  double corrosion_share_at_eol{};   //!< percent of C due to corrosion at the end of the run
  double corrosion_loss{};           //!< final C_corr [Ah]
  double active_mass_loss{};         //!< final C_deg [Ah]
  double total_loss{};
  double weighted_cycles{};
  double layer_thickness{};
  std::vector<DayRecord> capacity_trajectory;
  Histogram soc_histogram{ 0.0, 0.05, std::vector<double>(20, 0.0) };
  Histogram voltage_histogram{ 10.5, 0.1, std::vector<double>(50, 0.0) };
  std::vector<LoadLossEvent> load_loss_events;
  std::optional<double> soh_at_reference_time;  //!< percent
  double min_soc{ 1.0 };
  double simulated_hours{};
  std::size_t steps{};
  std::size_t days{};
  std::size_t full_recharge_count{};
  std::size_t full_recharge_days{};
  int max_days_between_full_recharges{};
  double min_recharge_interval{};
  double max_recharge_interval{};

  // SOC audit trail
  double initial_soc{};
  double final_soc{};
  double coulomb_soc_change{};   //!< sum of (I - I_gas) dt / C_N
  double soc_adjustment{};       //!< sum of jumps from clamps, OCV corrections and float resets
  std::size_t clamp_events{};
  std::size_t ocv_corrections{};
  std::size_t float_resets{};
  std::size_t corrosion_speed_clamps{};

  std::vector<TracePoint> trace;  //!< per-step, only when requested

  double soh_percent(double nominal_capacity_ah) const { return 100.0 * (nominal_capacity_ah - total_loss) / nominal_capacity_ah; }
};

struct StepRecord
{
  std::size_t step{};
  double time_h{};
  int day{};
  double soc{};            //!< at the start of the step (after float/OCV corrections)
  double soc_after{};
  double voltage{};
  double positive_potential{};
  double current{};
  double gassing_current{};
  double temperature_c{};
  double load_w{};
  double solar_w{};
  Phase phase{};
  bool using_full_limits{};
  VoltageLimits limits{};
  double layer_thickness{};
  double weighted_cycles{};
  double corrosion_loss{};
  double active_mass_loss{};
  double total_loss{};
  double recharge_interval{};
  int days_since_full_recharge{};
  bool full_recharge{};
  bool float_reached{};
  bool load_disconnected{};
  double soc_jump{};       //!< correction applied before the coulomb step
};

using StepObserver = std::function<void(const StepRecord &)>;

//!< Total discharged Ah over C_N.
inline double aggregate_fec(std::span<const TracePoint> trace, double dt_s, double nominal_capacity_ah)
{
  double ah = 0.0;
  for (const auto &tp : trace)
    if (tp.current < 0.0) ah += -tp.current * dt_s / seconds_per_hour;
  return ah / nominal_capacity_ah;
}

inline double aggregate_fec(double discharged_ah, double nominal_capacity_ah) { return discharged_ah / nominal_capacity_ah; }

namespace detail {

class ProfileSampler
{
public:
  ProfileSampler(const ProfileSource &src, std::uint64_t seed, double dt_s) : dt_s_(dt_s)
  {
    if (const auto *a = std::get_if<ArchetypeProfile>(&src)) {
      UseArchetype use = a->use;
      use.stochastic_seed = seed;
      gen_.emplace(use, a->solar, a->temperature);
    } else {
      series_ = &std::get<TimeSeries>(src);
    }
  }

  Sample operator()(std::size_t step) const
  {
    if (gen_) return gen_->sample(static_cast<double>(step) * dt_s_, dt_s_);
    return series_->samples[step % series_->samples.size()];
  }

private:
  double dt_s_;
  std::optional<ArchetypeGenerator> gen_;
  const TimeSeries *series_{ nullptr };
};

} // namespace detail

//!< Ensures the scenario's degradation limits are calibrated against its datasheet.
inline void ensure_calibrated(Scenario &sc)
{
  if (!sc.degradation.calibrated()) calibrate_limits(sc.battery, sc.degradation, sc.datasheet);
}

inline SimResult run_scenario(Scenario sc, const StepObserver &observer = {})
{
  sc.validate();
  ensure_calibrated(sc);

  const BatteryParams &p = sc.battery;
  const DegradationParams &dp = sc.degradation;
  const ControllerConfig &cfg = sc.controller;
  const double dt = sc.dt_s;
  const double dt_h = dt / seconds_per_hour;
  const auto steps_per_day = static_cast<std::size_t>(std::llround(86400.0 / dt));
  const auto max_steps = static_cast<std::size_t>(std::llround(sc.max_years * hours_per_year / dt_h));

  detail::ProfileSampler profile(sc.profile, sc.seed, dt);
  DegradationLedger ledger = make_ledger(dp, p);
  ControllerState ctrl = make_controller(cfg);
  refresh_limits(cfg, ctrl);

  SimResult res;
  res.name = sc.name;
  res.policy = cfg.policy;
  res.initial_soc = sc.initial_soc;
  res.min_recharge_interval = ctrl.recharge_interval;
  res.max_recharge_interval = ctrl.recharge_interval;
  if (sc.record_trace) res.trace.reserve(std::min<std::size_t>(max_steps, 1u << 22));

  double soc = sc.initial_soc;
  double voltage = battery_ocv(p, soc);
  double discharged_ah = 0.0;
  double day_min_soc = soc;
  bool day_full = false;
  int last_full_day = 0;
  std::optional<std::size_t> open_event;
  const std::size_t no_reference = std::numeric_limits<std::size_t>::max();
  const std::size_t reference_step =
    sc.reference_time_years ? static_cast<std::size_t>(std::llround(*sc.reference_time_years * hours_per_year / dt_h)) : no_reference;

  std::size_t k = 0;
  for (; k < max_steps; ++k) {
    const int day = static_cast<int>(k / steps_per_day);
    if (k > 0 && k % steps_per_day == 0) {
      const DailyDelta delta = close_day(ledger);
      on_day_boundary(cfg, ctrl, delta);
      res.min_recharge_interval = std::min(res.min_recharge_interval, ctrl.recharge_interval);
      res.max_recharge_interval = std::max(res.max_recharge_interval, ctrl.recharge_interval);
      res.capacity_trajectory.push_back({ day - 1, ledger.corrosion.capacity_loss, ledger.active_mass.capacity_loss, ledger.total_loss,
                                          ctrl.recharge_interval, day_full, day_min_soc });
      if (day_full) ++res.full_recharge_days;
      day_full = false;
      day_min_soc = soc;
    }
    if (k == reference_step) res.soh_at_reference_time = 100.0 * (p.nominal_capacity_ah - ledger.total_loss) / p.nominal_capacity_ah;

    const Sample s = profile(k);
    const double t_c = s.ambient_c;
    const double t_k = to_kelvin(t_c);
    const double loss = std::min(ledger.total_loss, 0.99 * p.nominal_capacity_ah);

    const LoadSwitch ls = load_disconnect(cfg, ctrl, soc);
    const double bus_v = voltage > 1.0 ? voltage : battery_ocv(p, soc);
    const double available = sc.charger_efficiency * s.solar_w / bus_v;
    const double demand = s.load_w / bus_v;
    const ChargeStep cs = tscc_step(cfg, ctrl, p, soc, loss, t_c, available, demand);
    if (ls.disconnected && ctrl.phase != Phase::disconnected && cs.battery_current <= 0.0) ctrl.phase = Phase::disconnected;

    double jump = 0.0;
    if (cs.full_float_hold && soc != soc_at_float()) {
      jump = soc_at_float() - soc;
      soc = soc_at_float();
      ++res.float_resets;
    }
    if (cs.full_recharge) {
      register_full_charge(ledger.active_mass);
      ++res.full_recharge_count;
      day_full = true;
      res.max_days_between_full_recharges = std::max(res.max_days_between_full_recharges, day - last_full_day);
      last_full_day = day;
      refresh_limits(cfg, ctrl);
    }
    const double current = cs.battery_current;
    BatteryState st = evaluate_state(p, soc, current, t_k, loss);
    // a regulated step reports the set-point, not a rest voltage
    if (!cs.regulated && !cs.full_float_hold) {
      if (const auto corr = correct_soc_by_ocv(p, st.terminal_voltage, current)) {
        if (corr->soc != soc) {
          jump += corr->soc - soc;
          soc = corr->soc;
          st = evaluate_state(p, soc, current, t_k, loss);
          ++res.ocv_corrections;
        }
      }
    }
    res.soc_adjustment += jump;

    // load-loss bookkeeping
    if (ls.newly_disconnected) {
      open_event = res.load_loss_events.size();
      res.load_loss_events.push_back({ static_cast<double>(k) * dt_h, 0.0, 0.0 });
    }
    if (ctrl.load_disconnected && open_event) {
      auto &ev = res.load_loss_events[*open_event];
      ev.duration_h += dt_h;
      ev.unserved_ah += cs.load_shed * dt_h;
    }
    if (ls.reconnected) open_event.reset();

    const auto info = step_degradation(ledger, dp, p, soc, st.positive_potential, t_k, current, dt);
    if (info.speed_clamped) ++res.corrosion_speed_clamps;

    const SocStep next = step_soc(p, soc, current, st.gassing_current, dt);
    res.coulomb_soc_change += (current - st.gassing_current) * dt / p.capacity_coulomb();
    if (next.clamped) {
      ++res.clamp_events;
      res.soc_adjustment += next.soc - next.unclamped_soc;
    }
    if (current < 0.0) discharged_ah += -current * dt_h;

    res.soc_histogram.add(soc, dt_h);
    res.voltage_histogram.add(st.terminal_voltage, dt_h);
    res.min_soc = std::min(res.min_soc, soc);
    day_min_soc = std::min(day_min_soc, soc);

    if (sc.record_trace) res.trace.push_back({ current, soc, cs.full_recharge, ctrl.phase == Phase::float_charge });

    if (observer) {
      StepRecord r;
      r.step = k;
      r.time_h = static_cast<double>(k) * dt_h;
      r.day = day;
      r.soc = soc;
      r.soc_after = next.soc;
      r.voltage = st.terminal_voltage;
      r.positive_potential = st.positive_potential;
      r.current = current;
      r.gassing_current = st.gassing_current;
      r.temperature_c = t_c;
      r.load_w = s.load_w;
      r.solar_w = s.solar_w;
      r.phase = ctrl.phase;
      r.using_full_limits = ctrl.using_full_limits;
      r.limits = cs.limits;
      r.layer_thickness = ledger.corrosion.layer_thickness;
      r.weighted_cycles = ledger.active_mass.weighted_cycles;
      r.corrosion_loss = ledger.corrosion.capacity_loss;
      r.active_mass_loss = ledger.active_mass.capacity_loss;
      r.total_loss = ledger.total_loss;
      r.recharge_interval = ctrl.recharge_interval;
      r.days_since_full_recharge = ctrl.days_since_full_recharge;
      r.full_recharge = cs.full_recharge;
      r.float_reached = cs.float_reached;
      r.load_disconnected = ctrl.load_disconnected;
      r.soc_jump = jump;
      observer(r);
    }

    soc = next.soc;
    voltage = st.terminal_voltage;

    if (ledger.eol) {
      ++k;
      break;
    }
  }

  res.steps = k;
  res.simulated_hours = static_cast<double>(k) * dt_h;
  res.lifetime_years = res.simulated_hours / hours_per_year;
  res.censored = !ledger.eol;
  res.days = (k + steps_per_day - 1) / steps_per_day;
  if (k % steps_per_day != 0 || ledger.eol) {
    const int day = static_cast<int>((k - 1) / steps_per_day);
    res.capacity_trajectory.push_back({ day, ledger.corrosion.capacity_loss, ledger.active_mass.capacity_loss, ledger.total_loss,
                                        ctrl.recharge_interval, day_full, day_min_soc });
    if (day_full) ++res.full_recharge_days;
  }
  res.fec = aggregate_fec(discharged_ah, p.nominal_capacity_ah);
  res.corrosion_loss = ledger.corrosion.capacity_loss;
  res.active_mass_loss = ledger.active_mass.capacity_loss;
  res.total_loss = ledger.total_loss;
  res.weighted_cycles = ledger.active_mass.weighted_cycles;
  res.layer_thickness = ledger.corrosion.layer_thickness;
  res.corrosion_share_at_eol = ledger.total_loss > 0.0 ? 100.0 * ledger.corrosion.capacity_loss / ledger.total_loss : 0.0;
  res.final_soc = soc;
  if (reference_step != no_reference && !res.soh_at_reference_time) res.soh_at_reference_time = res.soh_percent(p.nominal_capacity_ah);
  return res;
}

// ---------------------------------------------------------------------------
// Strategy comparison
// ---------------------------------------------------------------------------

struct StrategyComparison
{
  SimResult base;
  SimResult alt;
  double lifetime_ratio{};            //!< alt / base
  double corrosion_loss_reduction{};  //!< 1 - C_corr,alt / C_corr,base at each run's end
  double active_mass_ratio{};         //!< C_deg,alt / C_deg,base at each run's end
  double corrosion_delta_ah{};        //!< alt - base
  double active_mass_delta_ah{};      //!< alt - base
  std::optional<double> alt_soh_at_base_eol;  //!< percent
  double base_min_soc{};
  double alt_min_soc{};
  std::size_t base_load_loss_events{};
  std::size_t alt_load_loss_events{};
  bool alt_healthier_every_day{};     //!< C_alt <= C_base on every common day
};

inline bool same_profile(const ProfileSource &a, const ProfileSource &b)
{
  if (a.index() != b.index()) return false;
  if (const auto *pa = std::get_if<ArchetypeProfile>(&a)) {
    const auto &pb = std::get<ArchetypeProfile>(b);
    const auto &ua = pa->use, &ub = pb.use;
    return ua.name == ub.name && ua.daily_energy_wh == ub.daily_energy_wh && ua.evening_fraction == ub.evening_fraction
           && ua.nonuse_run_length == ub.nonuse_run_length && ua.use_run_min == ub.use_run_min && ua.use_run_max == ub.use_run_max
           && ua.daily_variation == ub.daily_variation && pa->solar.panel_rating_w == pb.solar.panel_rating_w
           && pa->solar.sunrise_h == pb.solar.sunrise_h && pa->solar.sunset_h == pb.solar.sunset_h
           && pa->solar.weather_min == pb.solar.weather_min && pa->solar.weather_max == pb.solar.weather_max
           && pa->temperature.mean_c == pb.temperature.mean_c && pa->temperature.amplitude_c == pb.temperature.amplitude_c
           && pa->temperature.peak_hour == pb.temperature.peak_hour;
  }
  const auto &ta = std::get<TimeSeries>(a), &tb = std::get<TimeSeries>(b);
  return ta.dt_s == tb.dt_s && ta.start_time == tb.start_time && ta.samples == tb.samples;
}

inline bool same_battery(const BatteryParams &a, const BatteryParams &b)
{
  return a.nominal_capacity_ah == b.nominal_capacity_ah && a.cells_in_series == b.cells_in_series && a.c_max == b.c_max
         && a.electrolyte_volume == b.electrolyte_volume && a.b0_nominal == b.b0_nominal && a.b1 == b.b1
         && a.gassing.i_gas0 == b.gassing.i_gas0 && a.gassing.c_v == b.gassing.c_v && a.gassing.c_t == b.gassing.c_t
         && a.gassing.v_gas0 == b.gassing.v_gas0 && a.gassing.t_gas0 == b.gassing.t_gas0 && a.soc_cap == b.soc_cap;
}

//!< Paired run of two policies on the same profile, battery and seed.
inline StrategyComparison compare_strategies(Scenario base, Scenario alt, bool parallel = true)
{
  if (!same_profile(base.profile, alt.profile)) throw ModelError("compare_strategies: scenarios use different profiles");
  if (!same_battery(base.battery, alt.battery)) throw ModelError("compare_strategies: scenarios use different battery parameters");
  if (base.dt_s != alt.dt_s) throw ModelError("compare_strategies: scenarios use different time steps");
  alt.seed = base.seed;
  ensure_calibrated(base);
  ensure_calibrated(alt);

  StrategyComparison cmp;
  if (parallel) {
    auto fut = std::async(std::launch::async, [&base] { return run_scenario(base); });
    Scenario alt_first = alt;
    cmp.alt = run_scenario(alt_first);
    cmp.base = fut.get();
  } else {
    cmp.base = run_scenario(base);
    cmp.alt = run_scenario(alt);
  }
  // SOH of the alternative at the baseline's end of life
  {
    double soh = 100.0;
    const double cn = alt.battery.nominal_capacity_ah;
    const auto base_days = cmp.base.capacity_trajectory.size();
    if (base_days > 0 && cmp.alt.capacity_trajectory.size() >= base_days)
      soh = 100.0 * (cn - cmp.alt.capacity_trajectory[base_days - 1].total_loss) / cn;
    else
      soh = cmp.alt.soh_percent(cn);
    cmp.alt_soh_at_base_eol = soh;
  }
  cmp.lifetime_ratio = cmp.alt.lifetime_years / cmp.base.lifetime_years;
  cmp.corrosion_loss_reduction = cmp.base.corrosion_loss > 0.0 ? 1.0 - cmp.alt.corrosion_loss / cmp.base.corrosion_loss : 0.0;
  cmp.active_mass_ratio = cmp.base.active_mass_loss > 0.0 ? cmp.alt.active_mass_loss / cmp.base.active_mass_loss : 1.0;
  cmp.corrosion_delta_ah = cmp.alt.corrosion_loss - cmp.base.corrosion_loss;
  cmp.active_mass_delta_ah = cmp.alt.active_mass_loss - cmp.base.active_mass_loss;
  cmp.base_min_soc = cmp.base.min_soc;
  cmp.alt_min_soc = cmp.alt.min_soc;
  cmp.base_load_loss_events = cmp.base.load_loss_events.size();
  cmp.alt_load_loss_events = cmp.alt.load_loss_events.size();
  cmp.alt_healthier_every_day = true;
  const auto common = std::min(cmp.base.capacity_trajectory.size(), cmp.alt.capacity_trajectory.size());
  for (std::size_t d = 0; d < common; ++d)
    if (cmp.alt.capacity_trajectory[d].total_loss > cmp.base.capacity_trajectory[d].total_loss) {
      cmp.alt_healthier_every_day = false;
      break;
    }
  return cmp;
}

} // namespace shs
