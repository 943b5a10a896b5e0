// shs_sim: command-line front end for the SHS battery ageing simulator.
//
//   shs_sim simulate  --config run.json --out results/ [--seed N] [--dt S] [--jobs J] [--trace]
//   shs_sim compare   --config run.json --out results/
//   shs_sim analyze   trace_or_profile.csv [--out results/] [--policy bboxx_static]
//   shs_sim calibrate [--config run.json] --out results/
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include "shs/config.hpp"
#include "shs/report.hpp"
#include "shs/simulation.hpp"
#include "shs/stress.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_runtime = 2;

struct Options
{
  std::string config;
  std::string out{ "shs_out" };
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  unsigned jobs{ 1 };
  bool trace{ false };
  std::string input;
  std::string policy{ "bboxx_static" };
};

struct ValidationError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

shs::RunConfig load_config(const Options &o)
{
  if (o.config.empty()) throw ValidationError("--config is required");
  if (o.dt && !(*o.dt > 0.0)) throw ValidationError("--dt must be positive");
  return shs::load_run_config(o.config, { o.seed, o.dt });
}

void prepare_out(const std::string &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

struct RunOutcome
{
  std::optional<shs::SimResult> result;
  std::string error;
};

// Runs one scenario and writes its artifacts; returns the result or the failure message.
RunOutcome run_and_write(shs::Scenario sc, const fs::path &out, bool trace)
{
  RunOutcome o;
  try {
    shs::ensure_calibrated(sc);
    shs::SimResult r;
    if (trace) {
      std::ofstream tf(out / (sc.name + "_trace.csv"));
      if (!tf) throw std::runtime_error("cannot write trace for '" + sc.name + "'");
      shs::TraceWriter tw(tf, shs::scenario_start_time(sc), sc.dt_s);
      r = shs::run_scenario(sc, std::ref(tw));
    } else {
      r = shs::run_scenario(sc);
    }
    shs::write_json((out / (sc.name + ".json")).string(), shs::result_to_json(r, sc));
    {
      std::ofstream f(out / (sc.name + "_trajectory.csv"));
      shs::write_trajectory_csv(f, r, sc.battery.nominal_capacity_ah, shs::scenario_start_time(sc));
    }
    {
      std::ofstream f(out / (sc.name + "_soc_histogram.csv"));
      shs::write_histogram_csv(f, r.soc_histogram, "soc");
    }
    {
      std::ofstream f(out / (sc.name + "_voltage_histogram.csv"));
      shs::write_histogram_csv(f, r.voltage_histogram, "voltage_v");
    }
    o.result = std::move(r);
  } catch (const std::exception &e) {
    o.error = e.what();
  }
  return o;
}

int cmd_simulate(const Options &opt)
{
  const shs::RunConfig rc = load_config(opt);
  prepare_out(opt.out);
  const bool trace = opt.trace || rc.write_trace;

  std::vector<RunOutcome> outcomes(rc.scenarios.size());
  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < rc.scenarios.size(); i = next++) outcomes[i] = run_and_write(rc.scenarios[i], opt.out, trace);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(rc.scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();

  std::vector<shs::SimResult> ok;
  int status = exit_ok;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].result) {
      ok.push_back(*outcomes[i].result);
    } else {
      std::cerr << "scenario '" << rc.scenarios[i].name << "' failed: " << outcomes[i].error << '\n';
      status = exit_runtime;
    }
  }
  shs::print_summary_table(std::cout, ok);
  shs::json summary = shs::json::array();
  for (const auto &r : ok)
    summary.push_back({ { "name", r.name }, { "policy", std::string(shs::to_string(r.policy)) }, { "lifetime_years", r.lifetime_years },
                        { "fec", r.fec }, { "corrosion_pct", r.corrosion_share_at_eol }, { "censored", r.censored } });
  shs::write_json((fs::path(opt.out) / "summary.json").string(), summary);
  return status;
}

int cmd_compare(const Options &opt)
{
  const shs::RunConfig rc = load_config(opt);
  std::string base_name, alt_name;
  if (rc.compare_base) {
    base_name = *rc.compare_base;
    alt_name = *rc.compare_alt;
  } else if (rc.scenarios.size() == 2) {
    base_name = rc.scenarios[0].name;
    alt_name = rc.scenarios[1].name;
  } else {
    throw ValidationError("compare needs a 'compare' section or exactly two scenarios");
  }
  const shs::Scenario &base = shs::find_scenario(rc, base_name);
  const shs::Scenario &alt = shs::find_scenario(rc, alt_name);
  if (!shs::same_profile(base.profile, alt.profile) || !shs::same_battery(base.battery, alt.battery))
    throw ValidationError("compare: base and alt must share the profile and battery parameters");
  prepare_out(opt.out);

  const shs::StrategyComparison cmp = shs::compare_strategies(base, alt, opt.jobs > 1);
  shs::Scenario base_cal = base, alt_cal = alt;
  shs::ensure_calibrated(base_cal);
  shs::ensure_calibrated(alt_cal);
  const fs::path out(opt.out);
  shs::write_json((out / "comparison.json").string(), shs::comparison_to_json(cmp));
  shs::write_json((out / (base.name + ".json")).string(), shs::result_to_json(cmp.base, base_cal));
  shs::write_json((out / (alt.name + ".json")).string(), shs::result_to_json(cmp.alt, alt_cal));
  {
    std::ofstream f(out / "paired_trajectory.csv");
    shs::write_paired_trajectory_csv(f, cmp, base.battery.nominal_capacity_ah, shs::scenario_start_time(base));
  }
  shs::print_summary_table(std::cout, { cmp.base, cmp.alt });
  std::cout << std::setw(2) << shs::comparison_to_json(cmp) << '\n';
  return exit_ok;
}

int cmd_analyze(const Options &opt)
{
  std::ifstream in(opt.input);
  if (!in) throw ValidationError("cannot open '" + opt.input + "'");
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("'" + opt.input + "' is empty");
  in.clear();
  in.seekg(0);

  shs::TraceFile tf;
  if (shs::is_trace_csv(header)) {
    try {
      tf = shs::read_trace_csv(in);
    } catch (const shs::IngestError &e) {
      throw ValidationError(e.what());
    }
  } else {
    // a profile CSV: simulate it first, then analyse the resulting trace
    shs::Scenario sc;
    sc.name = fs::path(opt.input).stem().string();
    if (opt.dt) sc.dt_s = *opt.dt;
    try {
      sc.profile = shs::ingest_csv(in, {}, sc.dt_s).series;
      sc.controller.policy = shs::policy_from_string(opt.policy);
      sc.validate();
    } catch (const shs::IngestError &e) {
      throw ValidationError(e.what());
    } catch (const shs::ModelError &e) {
      throw ValidationError(e.what());
    }
    sc.record_trace = true;
    const shs::SimResult r = shs::run_scenario(sc);
    tf.points = r.trace;
    tf.dt_s = sc.dt_s;
  }
  if (tf.points.empty()) throw ValidationError("empty trace");
  const shs::StressFactors sf = shs::stress_factors(tf.points, tf.dt_s);
  const shs::json j = shs::stress_to_json(sf);
  std::cout << std::setw(2) << j << '\n';
  if (!opt.out.empty()) {
    prepare_out(opt.out);
    shs::write_json((fs::path(opt.out) / "stress_factors.json").string(), j);
  }
  return exit_ok;
}

int cmd_calibrate(const Options &opt)
{
  shs::Scenario sc;
  if (!opt.config.empty()) sc = load_config(opt).scenarios.front();
  sc.degradation.w_limit = 0.0;
  prepare_out(opt.out);
  const auto lim = shs::calibrate_limits(sc.battery, sc.degradation, sc.datasheet);
  const auto fl = shs::simulate_float(sc.battery, sc.degradation, sc.datasheet, 3.0 * sc.datasheet.float_life_years, true);
  const auto cy = shs::simulate_standard_cycling(sc.battery, sc.degradation, sc.datasheet, 3.0 * sc.datasheet.cycle_life);
  shs::json j = {
    { "degradation", { { "w_limit", lim.w_limit }, { "nominal_cycles", sc.degradation.nominal_cycles } } },
    { "limits_ah", { { "c_corr_limit", lim.c_corr_limit }, { "c_deg_limit", lim.c_deg_limit } } },
    { "checks",
      { { "float_eol_years", fl.eol_years ? shs::json(*fl.eol_years) : shs::json(nullptr) },
        { "float_life_years", sc.datasheet.float_life_years },
        { "cycling_eol_equivalent_cycles", cy.eol_equivalent_cycles ? shs::json(*cy.eol_equivalent_cycles) : shs::json(nullptr) },
        { "cycle_life", sc.datasheet.cycle_life } } },
  };
  shs::write_json((fs::path(opt.out) / "calibrated.json").string(), j);
  std::cout << std::setw(2) << j << '\n';
  return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{ "Lead-acid battery ageing simulator for solar home systems" };
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App *sub, bool needs_config) {
    auto *c = sub->add_option("--config", opt.config, "Run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Override the seed of every scenario");
    sub->add_option("--dt", opt.dt, "Override the time step [s]");
    sub->add_option("--jobs", opt.jobs, "Parallel scenario runs")->check(CLI::PositiveNumber);
  };
  auto *sim = app.add_subcommand("simulate", "Run every scenario of a config to end of life");
  add_common(sim, true);
  sim->add_flag("--trace", opt.trace, "Write the per-step trace CSV");
  auto *cmp = app.add_subcommand("compare", "Paired run of two policies on the same profile");
  add_common(cmp, true);
  auto *ana = app.add_subcommand("analyze", "Stress factors of a trace CSV (or of a simulated profile CSV)");
  ana->add_option("input", opt.input, "Trace or profile CSV")->required();
  ana->add_option("--out", opt.out, "Output directory");
  ana->add_option("--dt", opt.dt, "Time step for profile CSVs [s]");
  ana->add_option("--policy", opt.policy, "Policy used when simulating a profile CSV");
  auto *cal = app.add_subcommand("calibrate", "Calibrate the ageing limits from the datasheet");
  add_common(cal, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*sim) return cmd_simulate(opt);
    if (*cmp) return cmd_compare(opt);
    if (*ana) {
      if (!ana->get_option("--out")->count()) opt.out.clear();
      return cmd_analyze(opt);
    }
    if (*cal) return cmd_calibrate(opt);
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const shs::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception &e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_validation;
}
