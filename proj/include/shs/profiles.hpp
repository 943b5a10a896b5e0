/*
 * profiles.hpp
 *
 * Solar / load / ambient-temperature time series for solar home systems: synthetic use
 * archetypes (regular high, moderate, low use and infrequent use with long non-use runs),
 * CSV ingestion with resampling and gap filling, and CSV output in the same dialect.
 */

#pragma once

#include "battery.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shs {

struct Sample
{
  double load_w{ 0.0 };
  double solar_w{ 0.0 };
  double ambient_c{ 25.0 };

  friend bool operator==(const Sample &, const Sample &) = default;
};

struct TimeSeries
{
  std::int64_t start_time{ 0 };  //!< unix seconds (UTC), first sample
  double dt_s{ 900.0 };
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return dt_s * static_cast<double>(samples.size()); }

  void validate(double panel_rating_w = std::numeric_limits<double>::infinity()) const
  {
    if (!(dt_s > 0.0)) throw ModelError("time series dt must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto &s = samples[i];
      if (!(s.load_w >= 0.0)) throw ModelError("time series sample " + std::to_string(i) + ": negative load");
      if (!(s.solar_w >= 0.0 && s.solar_w <= panel_rating_w))
        throw ModelError("time series sample " + std::to_string(i) + ": solar outside [0, panel rating]");
      if (!std::isfinite(s.ambient_c)) throw ModelError("time series sample " + std::to_string(i) + ": non-finite temperature");
    }
  }
};

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

//!< Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (or a space separator) as UTC; returns false on failure.
inline bool parse_iso8601(std::string_view text, std::int64_t &unix_seconds)
{
  std::string s(text);
  while (!s.empty() && (s.back() == 'Z' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  const int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
  if (n < 6 || (sep != 'T' && sep != ' ')) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return false;
  using namespace std::chrono;
  const year_month_day ymd{ year{ y }, month{ static_cast<unsigned>(mo) }, day{ static_cast<unsigned>(d) } };
  if (!ymd.ok()) return false;
  const auto days_since_epoch = sys_days{ ymd }.time_since_epoch().count();
  unix_seconds = static_cast<std::int64_t>(days_since_epoch) * 86400 + h * 3600 + mi * 60 + static_cast<std::int64_t>(std::llround(sec));
  return true;
}

inline std::string format_iso8601(std::int64_t unix_seconds)
{
  using namespace std::chrono;
  const auto days = static_cast<int>(std::floor(static_cast<double>(unix_seconds) / 86400.0));
  const std::int64_t rem = unix_seconds - static_cast<std::int64_t>(days) * 86400;
  const year_month_day ymd{ sys_days{ std::chrono::days{ days } } };
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                static_cast<int>(rem % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Archetypes
// ---------------------------------------------------------------------------

enum class Archetype { high, moderate, low, infrequent };

inline std::string_view to_string(Archetype a)
{
  switch (a) {
  case Archetype::high: return "high";
  case Archetype::moderate: return "moderate";
  case Archetype::low: return "low";
  case Archetype::infrequent: return "infrequent";
  }
  return "?";
}

inline Archetype archetype_from_string(std::string_view s)
{
  if (s == "high") return Archetype::high;
  if (s == "moderate") return Archetype::moderate;
  if (s == "low") return Archetype::low;
  if (s == "infrequent") return Archetype::infrequent;
  throw ModelError("unknown archetype '" + std::string(s) + "'");
}

struct UseArchetype
{
  Archetype name{ Archetype::low };
  double daily_energy_wh{ 40.0 };
  double evening_fraction{ 0.6 };   //!< share of daily load between 18:00 and 24:00
  int nonuse_run_length{ 0 };       //!< [days] zero-load runs (infrequent use only)
  int use_run_min{ 7 };             //!< [days] length range of the use runs between non-use runs
  int use_run_max{ 14 };
  double daily_variation{ 0.1 };    //!< uniform +/- relative variation of daily energy
  std::uint64_t stochastic_seed{ 1 };
};

inline UseArchetype default_archetype(Archetype a, std::uint64_t seed = 1)
{
  UseArchetype u;
  u.name = a;
  u.stochastic_seed = seed;
  switch (a) {
  case Archetype::high: u.daily_energy_wh = 120.0; break;
  case Archetype::moderate: u.daily_energy_wh = 80.0; break;
  case Archetype::low: u.daily_energy_wh = 40.0; break;
  case Archetype::infrequent:
    u.daily_energy_wh = 40.0;
    u.nonuse_run_length = 10;
    break;
  }
  return u;
}

struct SolarParams
{
  double panel_rating_w{ 50.0 };
  double sunrise_h{ 6.0 };
  double sunset_h{ 18.0 };
  double weather_min{ 0.3 };  //!< per-day clear-sky fraction range
  double weather_max{ 1.0 };
};

struct TemperatureParams
{
  double mean_c{ 27.0 };       //!< diurnal 22-32 degC
  double amplitude_c{ 5.0 };
  double peak_hour{ 14.0 };
};

//!< Deterministic uniform [0, 1) from (seed, stream, index); independent of the standard
//!< library's distribution implementations.
inline double unit_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream),
                     static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32) };
  std::mt19937_64 rng(seq);
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//!< Hourly load weights (sum to 1) for the given evening share.
inline std::array<double, 24> hourly_load_shape(double evening_fraction)
{
  std::array<double, 24> w{};
  constexpr std::array<double, 6> evening{ 1.0, 1.3, 1.3, 1.2, 0.8, 0.4 };
  double evening_sum = 0.0;
  for (double e : evening) evening_sum += e;
  for (int h = 0; h < 6; ++h) w[18 + h] = evening_fraction * evening[h] / evening_sum;
  const double rest = 1.0 - evening_fraction;
  for (int h = 0; h < 6; ++h) w[h] = 0.25 * rest / 6.0;
  for (int h = 6; h < 18; ++h) w[h] = 0.75 * rest / 12.0;
  return w;
}

//!< Day-indexed archetype generator: any day can be produced without generating the ones
//!< before it, so the profile extends indefinitely with fresh weather.
class ArchetypeGenerator
{
public:
  ArchetypeGenerator(UseArchetype use, SolarParams solar = {}, TemperatureParams temp = {})
    : use_(use), solar_(solar), temp_(temp), shape_(hourly_load_shape(use.evening_fraction))
  {
    if (!(use_.daily_energy_wh >= 0.0)) throw ModelError("archetype daily energy must be non-negative");
    if (!(use_.evening_fraction >= 0.0 && use_.evening_fraction <= 1.0)) throw ModelError("evening_fraction outside [0, 1]");
    if (use_.nonuse_run_length > 0 && (use_.use_run_min < 1 || use_.use_run_max < use_.use_run_min))
      throw ModelError("use run length range invalid");
  }

  const UseArchetype &archetype() const { return use_; }
  const SolarParams &solar() const { return solar_; }

  double weather(std::int64_t day) const
  {
    if (day == cached_day_) return cached_weather_;
    const double u = unit_uniform(use_.stochastic_seed, 1, static_cast<std::uint64_t>(day));
    // skewed towards clear days
    return solar_.weather_max - (solar_.weather_max - solar_.weather_min) * u * u;
  }

  //!< Caches the per-day draws of `day` (the simulation walks days in order).
  void prepare_day(std::int64_t day) const
  {
    if (day == cached_day_) return;
    cached_day_ = -1;
    const double w = weather(day);
    const double e = daily_energy(day);
    cached_weather_ = w;
    cached_energy_ = e;
    cached_day_ = day;
  }

  bool in_use(std::int64_t day) const
  {
    if (use_.nonuse_run_length <= 0) return true;
    if (day < 0) return true;
    while (blocks_.empty() || blocks_.back().start + blocks_.back().use_days + use_.nonuse_run_length <= day) {
      const auto k = static_cast<std::uint64_t>(blocks_.size());
      const std::int64_t start = blocks_.empty() ? 0 : blocks_.back().start + blocks_.back().use_days + use_.nonuse_run_length;
      const double u = unit_uniform(use_.stochastic_seed, 3, k);
      const int run = use_.use_run_min + static_cast<int>(u * (use_.use_run_max - use_.use_run_min + 1));
      blocks_.push_back({ start, run });
    }
    const auto it = std::upper_bound(blocks_.begin(), blocks_.end(), day, [](std::int64_t d, const Block &b) { return d < b.start; });
    const Block &b = *(it - 1);
    return day - b.start < b.use_days;
  }

  double daily_energy(std::int64_t day) const
  {
    if (day == cached_day_) return cached_energy_;
    if (!in_use(day)) return 0.0;
    const double u = unit_uniform(use_.stochastic_seed, 2, static_cast<std::uint64_t>(day));
    return use_.daily_energy_wh * (1.0 + use_.daily_variation * (2.0 * u - 1.0));
  }

  //!< Mean solar power over [t0, t1) seconds from midnight of day 0.
  double solar_average(double t0_s, double t1_s) const
  {
    return integrate(t0_s, t1_s, [this](std::int64_t day, double a_h, double b_h) {
             const double lo = std::max(a_h, solar_.sunrise_h), hi = std::min(b_h, solar_.sunset_h);
             if (!(hi > lo)) return 0.0;
             const double span = solar_.sunset_h - solar_.sunrise_h;
             const double peak = solar_.panel_rating_w * weather(day);
             const double k = std::numbers::pi / span;
             return peak / k * (std::cos(k * (lo - solar_.sunrise_h)) - std::cos(k * (hi - solar_.sunrise_h)));
           })
           / ((t1_s - t0_s) / seconds_per_hour);
  }

  //!< Mean load power over [t0, t1).
  double load_average(double t0_s, double t1_s) const
  {
    return integrate(t0_s, t1_s, [this](std::int64_t day, double a_h, double b_h) {
             const double energy = daily_energy(day);
             if (energy == 0.0) return 0.0;
             double wh = 0.0;
             for (int h = static_cast<int>(std::floor(a_h)); h < 24 && h < b_h; ++h) {
               const double overlap = std::min(b_h, h + 1.0) - std::max(a_h, static_cast<double>(h));
               if (overlap > 0.0) wh += energy * shape_[static_cast<std::size_t>(h)] * overlap;
             }
             return wh;
           })
           / ((t1_s - t0_s) / seconds_per_hour);
  }

  double temperature_at(double t_s) const
  {
    const double hour = std::fmod(t_s / seconds_per_hour, 24.0);
    return temp_.mean_c + temp_.amplitude_c * std::cos(2.0 * std::numbers::pi * (hour - temp_.peak_hour) / 24.0);
  }

  Sample sample(double t0_s, double dt_s) const
  {
    prepare_day(static_cast<std::int64_t>(std::floor(t0_s / 86400.0)));
    return { load_average(t0_s, t0_s + dt_s), solar_average(t0_s, t0_s + dt_s), temperature_at(t0_s + 0.5 * dt_s) };
  }

private:
  //!< Sums f(day, a_h, b_h) (an energy in Wh) over the day-pieces of [t0, t1).
  template <class F>
  double integrate(double t0_s, double t1_s, F f) const
  {
    double total = 0.0;
    double t = t0_s;
    while (t < t1_s) {
      const auto day = static_cast<std::int64_t>(std::floor(t / 86400.0));
      const double day_end = static_cast<double>(day + 1) * 86400.0;
      const double end = std::min(t1_s, day_end);
      total += f(day, (t - static_cast<double>(day) * 86400.0) / seconds_per_hour, (end - static_cast<double>(day) * 86400.0) / seconds_per_hour);
      t = end;
    }
    return total;
  }

  UseArchetype use_;
  SolarParams solar_;
  TemperatureParams temp_;
  std::array<double, 24> shape_;
  struct Block
  {
    std::int64_t start;  //!< first day of the use run
    int use_days;        //!< followed by nonuse_run_length zero-load days
  };
  mutable std::vector<Block> blocks_;
  mutable std::int64_t cached_day_{ -1 };
  mutable double cached_weather_{ 0.0 };
  mutable double cached_energy_{ 0.0 };
};

inline TimeSeries generate_archetype(const UseArchetype &use, int days, double dt_s = 900.0, SolarParams solar = {},
                                     TemperatureParams temp = {})
{
  if (days < 1) throw ModelError("generate_archetype: days must be >= 1");
  if (!(dt_s > 0.0) || std::fmod(86400.0, dt_s) != 0.0) throw ModelError("generate_archetype: dt must divide one day");
  const ArchetypeGenerator gen(use, solar, temp);
  TimeSeries ts;
  ts.dt_s = dt_s;
  const auto steps = static_cast<std::size_t>(std::llround(days * 86400.0 / dt_s));
  ts.samples.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) ts.samples.push_back(gen.sample(static_cast<double>(k) * dt_s, dt_s));
  return ts;
}

inline TimeSeries generate_archetype(Archetype a, int days, std::uint64_t seed, double dt_s = 900.0)
{
  return generate_archetype(default_archetype(a, seed), days, dt_s);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct ColumnMap
{
  std::string timestamp{ "timestamp" };
  std::string load_w{ "load_w" };
  std::string solar_w{ "solar_w" };
  std::string temp_c{ "temp_c" };
};

struct GapReport
{
  std::size_t total_slots{ 0 };
  std::size_t filled_slots{ 0 };  //!< slots with no input sample, held from the previous slot
  double fraction() const { return total_slots ? static_cast<double>(filled_slots) / static_cast<double>(total_slots) : 0.0; }
};

struct IngestResult
{
  TimeSeries series;
  GapReport gaps;
};

class IngestError : public std::runtime_error
{
public:
  explicit IngestError(const std::string &what, std::vector<std::size_t> lines = {})
    : std::runtime_error(what), lines_(std::move(lines))
  {}
  const std::vector<std::size_t> &lines() const { return lines_; }

private:
  std::vector<std::size_t> lines_;
};

inline std::vector<std::string> split_csv_line(const std::string &line)
{
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool parse_double(const std::string &s, double &v)
{
  if (s.empty()) return false;
  char *end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

//!< Reads a profile CSV, resamples it onto a uniform dt_target grid starting at the first
//!< timestamp (slot average of the samples falling in each slot) and fills empty slots by
//!< zero-order hold.
inline IngestResult ingest_csv(std::istream &in, const ColumnMap &cols = {}, double dt_target = 900.0, double max_gap_fraction = 0.2)
{
  if (!(dt_target > 0.0)) throw IngestError("dt_target must be positive");
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty CSV input");
  const auto header = split_csv_line(line);
  auto find = [&](const std::string &name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IngestError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t i_ts = find(cols.timestamp), i_load = find(cols.load_w), i_solar = find(cols.solar_w), i_temp = find(cols.temp_c);
  const std::size_t needed = std::max({ i_ts, i_load, i_solar, i_temp }) + 1;

  std::vector<std::int64_t> times;
  std::vector<Sample> rows;
  std::vector<std::size_t> bad_lines;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    std::int64_t t = 0;
    Sample s;
    if (cells.size() < needed || !parse_iso8601(cells[i_ts], t) || !parse_double(cells[i_load], s.load_w)
        || !parse_double(cells[i_solar], s.solar_w) || !parse_double(cells[i_temp], s.ambient_c)) {
      bad_lines.push_back(line_no);
      continue;
    }
    times.push_back(t);
    rows.push_back(s);
  }
  if (!bad_lines.empty()) {
    std::string msg = "unparseable CSV rows at lines:";
    for (std::size_t i = 0; i < bad_lines.size() && i < 20; ++i) msg += " " + std::to_string(bad_lines[i]);
    if (bad_lines.size() > 20) msg += " ...";
    throw IngestError(msg, bad_lines);
  }
  if (rows.empty()) throw IngestError("CSV contains no data rows");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw IngestError("non-monotone timestamps at data index " + std::to_string(i), { i });

  IngestResult res;
  res.series.start_time = times.front();
  res.series.dt_s = dt_target;
  const double span = static_cast<double>(times.back() - times.front());
  const auto slots = static_cast<std::size_t>(std::floor(span / dt_target + 1e-9)) + 1;
  res.gaps.total_slots = slots;
  res.series.samples.reserve(slots);

  std::size_t r = 0;
  for (std::size_t k = 0; k < slots; ++k) {
    const double lo = static_cast<double>(k) * dt_target;
    const double hi = lo + dt_target;
    Sample acc{ 0.0, 0.0, 0.0 };
    std::size_t n = 0;
    while (r < rows.size() && static_cast<double>(times[r] - times.front()) < hi - 1e-9) {
      if (static_cast<double>(times[r] - times.front()) >= lo - 1e-9) {
        acc.load_w += rows[r].load_w;
        acc.solar_w += rows[r].solar_w;
        acc.ambient_c += rows[r].ambient_c;
        ++n;
      }
      ++r;
    }
    if (n == 0) {
      res.series.samples.push_back(res.series.samples.back());
      ++res.gaps.filled_slots;
    } else if (n == 1) {
      res.series.samples.push_back(acc);
    } else {
      const double inv = 1.0 / static_cast<double>(n);
      res.series.samples.push_back({ acc.load_w * inv, acc.solar_w * inv, acc.ambient_c * inv });
    }
  }
  if (res.gaps.fraction() > max_gap_fraction)
    throw IngestError("too many gaps: " + std::to_string(res.gaps.filled_slots) + " of " + std::to_string(res.gaps.total_slots)
                      + " slots missing");
  res.series.validate();
  return res;
}

inline IngestResult ingest_csv(const std::string &path, const ColumnMap &cols = {}, double dt_target = 900.0)
{
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return ingest_csv(in, cols, dt_target);
}

inline void write_csv(std::ostream &out, const TimeSeries &ts, const ColumnMap &cols = {})
{
  out << cols.timestamp << ',' << cols.load_w << ',' << cols.solar_w << ',' << cols.temp_c << '\n';
  char buf[128];
  for (std::size_t k = 0; k < ts.samples.size(); ++k) {
    const auto t = ts.start_time + static_cast<std::int64_t>(std::llround(static_cast<double>(k) * ts.dt_s));
    const auto &s = ts.samples[k];
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", s.load_w, s.solar_w, s.ambient_c);
    out << format_iso8601(t) << buf;
  }
}

inline void write_csv(const std::string &path, const TimeSeries &ts, const ColumnMap &cols = {})
{
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write '" + path + "'");
  write_csv(out, ts, cols);
}

} // namespace shs
