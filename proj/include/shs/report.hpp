/*
 * report.hpp
 *
 * Output artifacts: result / comparison / stress JSON, daily capacity trajectory CSV,
 * histogram CSVs, and the per-step trace CSV. The trace uses the profile CSV dialect for its
 * first four columns so it can be fed back through ingest_csv.
 */

#pragma once

#include "config.hpp"
#include "simulation.hpp"
#include "stress.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

namespace shs {

inline constexpr std::int64_t default_start_time = 1577836800;  //!< 2020-01-01T00:00:00Z, archetype runs

inline std::int64_t scenario_start_time(const Scenario &sc)
{
  if (const auto *ts = std::get_if<TimeSeries>(&sc.profile)) return ts->start_time;
  return default_start_time;
}

inline json histogram_to_json(const Histogram &h)
{
  return { { "lower", h.lower }, { "width", h.width }, { "hours", h.hours } };
}

inline json result_to_json(const SimResult &r, const Scenario &sc)
{
  json loss = json::array();
  for (const auto &e : r.load_loss_events)
    loss.push_back({ { "start_h", e.start_h }, { "duration_h", e.duration_h }, { "unserved_ah", e.unserved_ah } });
  json j = {
    { "name", r.name },
    { "policy", std::string(to_string(r.policy)) },
    { "lifetime_years", r.lifetime_years },
    { "censored", r.censored },
    { "fec", r.fec },
    { "corrosion_pct", r.corrosion_share_at_eol },
    { "corrosion_loss_ah", r.corrosion_loss },
    { "active_mass_loss_ah", r.active_mass_loss },
    { "total_loss_ah", r.total_loss },
    { "soh_pct", r.soh_percent(sc.battery.nominal_capacity_ah) },
    { "weighted_cycles", r.weighted_cycles },
    { "layer_thickness_um", r.layer_thickness },
    { "min_soc", r.min_soc },
    { "days", r.days },
    { "full_recharge_count", r.full_recharge_count },
    { "full_recharge_days", r.full_recharge_days },
    { "full_recharge_day_fraction", r.days ? static_cast<double>(r.full_recharge_days) / static_cast<double>(r.days) : 0.0 },
    { "max_days_between_full_recharges", r.max_days_between_full_recharges },
    { "recharge_interval_range", { r.min_recharge_interval, r.max_recharge_interval } },
    { "load_loss_events", loss },
    { "soc_histogram", histogram_to_json(r.soc_histogram) },
    { "voltage_histogram", histogram_to_json(r.voltage_histogram) },
    { "soc_audit",
      { { "initial_soc", r.initial_soc },
        { "final_soc", r.final_soc },
        { "coulomb_change", r.coulomb_soc_change },
        { "adjustment", r.soc_adjustment },
        { "clamp_events", r.clamp_events },
        { "ocv_corrections", r.ocv_corrections },
        { "float_resets", r.float_resets },
        { "corrosion_speed_clamps", r.corrosion_speed_clamps } } },
    { "calibration",
      { { "w_limit_um", sc.degradation.w_limit },
        { "nominal_cycles", sc.degradation.nominal_cycles },
        { "c_corr_limit_ah", sc.degradation.c_corr_limit_fraction * sc.battery.nominal_capacity_ah },
        { "c_deg_limit_ah", sc.degradation.c_deg_limit_fraction * sc.battery.nominal_capacity_ah } } },
    { "dt_s", sc.dt_s },
    { "seed", sc.seed },
  };
  if (r.soh_at_reference_time) j["soh_at_reference_time_pct"] = *r.soh_at_reference_time;
  return j;
}

inline json comparison_to_json(const StrategyComparison &c)
{
  json j = {
    { "base", c.base.name },
    { "alt", c.alt.name },
    { "base_policy", std::string(to_string(c.base.policy)) },
    { "alt_policy", std::string(to_string(c.alt.policy)) },
    { "base_lifetime_years", c.base.lifetime_years },
    { "alt_lifetime_years", c.alt.lifetime_years },
    { "base_censored", c.base.censored },
    { "alt_censored", c.alt.censored },
    { "lifetime_ratio", c.lifetime_ratio },
    { "corrosion_loss_reduction", c.corrosion_loss_reduction },
    { "corrosion_delta_ah", c.corrosion_delta_ah },
    { "active_mass_ratio", c.active_mass_ratio },
    { "active_mass_delta_ah", c.active_mass_delta_ah },
    { "base_min_soc", c.base_min_soc },
    { "alt_min_soc", c.alt_min_soc },
    { "base_load_loss_events", c.base_load_loss_events },
    { "alt_load_loss_events", c.alt_load_loss_events },
    { "alt_healthier_every_day", c.alt_healthier_every_day },
  };
  if (c.alt_soh_at_base_eol) j["alt_soh_at_base_eol_pct"] = *c.alt_soh_at_base_eol;
  return j;
}

inline json stress_to_json(const StressFactors &s)
{
  json j = {
    { "ah_throughput", s.ah_throughput },
    { "ah_charged", s.ah_charged },
    { "highest_discharge_rate_a", s.highest_discharge_rate },
    { "time_at_low_soc_h", s.time_at_low_soc_h },
    { "partial_cycling_histogram", s.partial_cycling },
    { "full_charge_count", s.full_charge_count },
    { "days", s.days },
    { "full_recharge_days", s.full_recharge_days },
    { "full_recharge_day_fraction", s.full_recharge_day_fraction },
    { "days_at_float", s.days_at_float },
  };
  j["charge_factor"] = s.charge_factor ? json(*s.charge_factor) : json(nullptr);
  j["time_between_full_charge_mean_h"] = s.time_between_full_charge_mean_h ? json(*s.time_between_full_charge_mean_h) : json(nullptr);
  j["time_between_full_charge_max_h"] = s.time_between_full_charge_max_h ? json(*s.time_between_full_charge_max_h) : json(nullptr);
  j["mean_cycle_depth"] = s.mean_cycle_depth ? json(*s.mean_cycle_depth) : json(nullptr);
  return j;
}

inline void write_json(const std::string &path, const json &j)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << std::setw(2) << j << '\n';
}

inline void write_trajectory_csv(std::ostream &out, const SimResult &r, double nominal_capacity_ah, std::int64_t start_time)
{
  out << "timestamp,day,c_corr_ah,c_deg_ah,c_ah,soh_pct,recharge_interval_days,full_recharge,min_soc\n";
  char buf[256];
  for (const auto &d : r.capacity_trajectory) {
    std::snprintf(buf, sizeof buf, ",%d,%.9g,%.9g,%.9g,%.6f,%.6f,%d,%.6f\n", d.day, d.corrosion_loss, d.active_mass_loss, d.total_loss,
                  100.0 * (nominal_capacity_ah - d.total_loss) / nominal_capacity_ah, d.recharge_interval, d.full_recharge ? 1 : 0,
                  d.min_soc);
    out << format_iso8601(start_time + static_cast<std::int64_t>(d.day) * 86400) << buf;
  }
}

//!< Day-aligned overlay of two runs; days past one run's end repeat its last value.
inline void write_paired_trajectory_csv(std::ostream &out, const StrategyComparison &c, double nominal_capacity_ah, std::int64_t start_time)
{
  out << "timestamp,day,base_c_corr_ah,base_c_deg_ah,base_soh_pct,alt_c_corr_ah,alt_c_deg_ah,alt_soh_pct\n";
  const auto &a = c.base.capacity_trajectory, &b = c.alt.capacity_trajectory;
  const std::size_t n = std::max(a.size(), b.size());
  char buf[256];
  for (std::size_t i = 0; i < n; ++i) {
    const auto &da = a[std::min(i, a.size() - 1)];
    const auto &db = b[std::min(i, b.size() - 1)];
    std::snprintf(buf, sizeof buf, ",%zu,%.9g,%.9g,%.6f,%.9g,%.9g,%.6f\n", i, da.corrosion_loss, da.active_mass_loss,
                  100.0 * (nominal_capacity_ah - da.total_loss) / nominal_capacity_ah, db.corrosion_loss, db.active_mass_loss,
                  100.0 * (nominal_capacity_ah - db.total_loss) / nominal_capacity_ah);
    out << format_iso8601(start_time + static_cast<std::int64_t>(i) * 86400) << buf;
  }
}

inline void write_histogram_csv(std::ostream &out, const Histogram &h, const std::string &quantity)
{
  out << quantity << "_lower," << quantity << "_upper,hours\n";
  char buf[128];
  for (std::size_t i = 0; i < h.hours.size(); ++i) {
    const double lo = h.lower + static_cast<double>(i) * h.width;
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.9g\n", lo, lo + h.width, h.hours[i]);
    out << buf;
  }
}

//!< Streams StepRecords as CSV rows.
class TraceWriter
{
public:
  TraceWriter(std::ostream &out, std::int64_t start_time, double dt_s) : out_(out), start_(start_time), dt_s_(dt_s)
  {
    out_ << "timestamp,load_w,solar_w,temp_c,current_a,soc,voltage_v,positive_potential_v,gassing_a,phase,full_limits,"
            "full_charge_event,at_float,c_corr_ah,c_deg_ah,recharge_interval_days\n";
  }

  void operator()(const StepRecord &r)
  {
    const auto t = start_ + static_cast<std::int64_t>(std::llround(static_cast<double>(r.step) * dt_s_));
    std::snprintf(buf_, sizeof buf_, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.9g,%.9g,%.9g,%s,%d,%d,%d,%.9g,%.9g,%.6g\n", r.load_w, r.solar_w,
                  r.temperature_c, r.current, r.soc, r.voltage, r.positive_potential, r.gassing_current,
                  std::string(to_string(r.phase)).c_str(), r.using_full_limits ? 1 : 0, r.full_recharge ? 1 : 0,
                  r.phase == Phase::float_charge ? 1 : 0, r.corrosion_loss, r.active_mass_loss, r.recharge_interval);
    out_ << format_iso8601(t) << buf_;
  }

private:
  std::ostream &out_;
  std::int64_t start_;
  double dt_s_;
  char buf_[512];
};

struct TraceFile
{
  std::vector<TracePoint> points;
  double dt_s{};
};

//!< Reads a trace CSV (columns timestamp, current_a, soc, full_charge_event, at_float).
inline TraceFile read_trace_csv(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty trace");
  const auto header = split_csv_line(line);
  auto col = [&](const char *name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto i_ts = col("timestamp"), i_i = col("current_a"), i_soc = col("soc"), i_fc = col("full_charge_event"), i_fl = col("at_float");
  if (!i_ts || !i_i || !i_soc || !i_fc || !i_fl)
    throw IngestError("trace CSV needs columns timestamp, current_a, soc, full_charge_event, at_float");

  TraceFile tf;
  std::vector<std::int64_t> times;
  std::vector<std::size_t> bad;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::size_t needed = std::max({ *i_ts, *i_i, *i_soc, *i_fc, *i_fl }) + 1;
    std::int64_t t = 0;
    TracePoint tp;
    double fc = 0.0, fl = 0.0;
    if (cells.size() < needed || !parse_iso8601(cells[*i_ts], t) || !parse_double(cells[*i_i], tp.current)
        || !parse_double(cells[*i_soc], tp.soc) || !parse_double(cells[*i_fc], fc) || !parse_double(cells[*i_fl], fl)) {
      bad.push_back(line_no);
      continue;
    }
    tp.full_charge_event = fc != 0.0;
    tp.at_float = fl != 0.0;
    times.push_back(t);
    tf.points.push_back(tp);
  }
  if (!bad.empty()) throw IngestError("unparseable trace rows starting at line " + std::to_string(bad.front()), bad);
  if (tf.points.empty()) throw IngestError("trace contains no data rows");
  if (times.size() < 2) {
    tf.dt_s = 900.0;
    return tf;
  }
  tf.dt_s = static_cast<double>(times[1] - times[0]);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (static_cast<double>(times[i] - times[i - 1]) != tf.dt_s)
      throw IngestError("trace timestamps are not uniform at data index " + std::to_string(i), { i });
  if (!(tf.dt_s > 0.0)) throw IngestError("trace timestamps must increase");
  return tf;
}

inline bool is_trace_csv(const std::string &header_line)
{
  const auto h = split_csv_line(header_line);
  return std::find(h.begin(), h.end(), "current_a") != h.end() && std::find(h.begin(), h.end(), "soc") != h.end();
}

inline void print_summary_table(std::ostream &out, const std::vector<SimResult> &results)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-13s %14s %10s %14s\n", "scenario", "policy", "lifetime_years", "fec", "corrosion_pct");
  out << buf;
  for (const auto &r : results) {
    std::snprintf(buf, sizeof buf, "%-24s %-13s %13.2f%s %10.1f %14.1f\n", r.name.c_str(), std::string(to_string(r.policy)).c_str(),
                  r.lifetime_years, r.censored ? "+" : " ", r.fec, r.corrosion_share_at_eol);
    out << buf;
  }
  bool any_censored = false;
  for (const auto &r : results) any_censored = any_censored || r.censored;
  if (any_censored) out << "(+ censored: horizon reached before end of life)\n";
}

} // namespace shs
