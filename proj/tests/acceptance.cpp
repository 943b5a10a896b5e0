// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "shs/calibration.hpp"
#include "shs/simulation.hpp"
#include "shs/stress.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace shs;

namespace {

struct Check
{
  std::vector<std::string> failures;
  std::ostringstream notes;

  void expect(bool ok, const std::string &what)
  {
    if (!ok) failures.push_back(what);
  }
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

bool report(int n, const Check &c)
{
  std::printf("criterion %d: %s %s", n, c.failures.empty() ? "PASS" : "FAIL", c.notes.str().c_str());
  for (const auto &f : c.failures) std::printf(" [failed: %s]", f.c_str());
  std::printf("\n");
  std::fflush(stdout);
  return c.failures.empty();
}

Scenario archetype_scenario(Archetype a, Policy pol, double dt_s = 900.0)
{
  Scenario sc;
  sc.name = std::string(to_string(a)) + "_" + std::string(to_string(pol));
  ArchetypeProfile ap;
  ap.use = default_archetype(a);
  sc.profile = ap;
  sc.controller.policy = pol;
  sc.dt_s = dt_s;
  return sc;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool criterion_equations()
{
  Check c;
  const auto t0 = clock_type::now();
  const BatteryParams p;
  c.expect(gassing_current(p, 13.38, 298.0) == 0.017, "gassing nominal point");
  c.expect(near(gassing_current(p, 14.5, 298.0), 0.0210, 2e-4), "gassing at 14.5 V");
  c.expect(near(p.c_max - acid_concentration(p, 0.0), 5218.0, 1.0), "acid span");
  c.expect(near(log_molality(p, concentration_for_molality(p, 1.0)), 0.0, 1e-12), "unit molality");
  const double u = ocv_cell(log_molality(p, p.c_max));
  c.expect(u >= 2.05 && u <= 2.15, "full-charge cell OCV");
  c.expect(near(step_soc(p, 0.5, 2.0, 0.0, 3600.0).soc, 0.6, 1e-12), "soc step");
  const auto inv = invert_ocv(p, 12.8);
  c.expect(near(positive_terminal_voltage(p, inv.soc, 0.0), 1.74, 0.005), "12.8 V maps to 1.74 V positive potential");
  const CorrosionSpeedTable k;
  c.expect(near(corrosion_speed(k, 1.8, 308.0).value / corrosion_speed(k, 1.8, 298.0).value, 2.0, 1e-12), "k_s doubling");
  c.expect(corrosion_speed(k, 1.70, 298.0).value < corrosion_speed(k, 1.80, 298.0).value, "k_s regime order");
  ActiveMassState am;
  c.expect(near(accumulate_weighted_cycles(am, 2.0, 1.0, 36000.0, 20.0).weighted_cycles, 1.0, 1e-12), "Z_w example");
  am.weighted_cycles = am.nominal_cycles;
  c.expect(near(active_mass_loss(am), 4.0, 1e-12), "C_deg at Z_N");
  c.expect(recharge_interval({ 0.15, 0.3, 0.5 }) == 3.5, "D example");
  c.expect(near(compensated_limits(limits::proposed_full(), 35.0).v_limit, 14.2, 1e-12), "compensated limit");
  const double t = seconds_since(t0);
  c.expect(t < 1.0, "runtime");
  c.notes << "(runtime " << t << " s)";
  return report(1, c);
}

bool criterion_calibration()
{
  Check c;
  const auto t0 = clock_type::now();
  const BatteryParams p;
  DegradationParams dp;
  const Datasheet ds;
  calibrate_limits(p, dp, ds);
  const auto fl = simulate_float(p, dp, ds, 2.0 * ds.float_life_years, true);
  const auto cy = simulate_standard_cycling(p, dp, ds, 3.0 * ds.cycle_life);
  c.expect(fl.eol_years && near(*fl.eol_years, ds.float_life_years, 0.02 * ds.float_life_years), "float EOL within 2%");
  c.expect(cy.eol_equivalent_cycles && near(*cy.eol_equivalent_cycles, ds.cycle_life, 0.10 * ds.cycle_life), "cycling EOL within 10%");
  const double t = seconds_since(t0);
  c.expect(t < 30.0, "runtime");
  c.notes << "(float EOL " << (fl.eol_years ? *fl.eol_years : -1.0) << " y vs " << ds.float_life_years << ", cycling EOL "
          << (cy.eol_equivalent_cycles ? *cy.eol_equivalent_cycles : -1.0) << " vs " << ds.cycle_life << ", runtime " << t << " s)";
  return report(2, c);
}

bool criterion_archetypes()
{
  Check c;
  const auto t0 = clock_type::now();
  std::vector<SimResult> r;
  for (Archetype a : { Archetype::high, Archetype::moderate, Archetype::low, Archetype::infrequent })
    r.push_back(run_scenario(archetype_scenario(a, Policy::bboxx_static)));
  for (std::size_t i = 1; i < r.size(); ++i) {
    c.expect(r[i].corrosion_share_at_eol > r[i - 1].corrosion_share_at_eol, "corrosion share increasing at " + r[i].name);
    c.expect(r[i].fec < r[i - 1].fec, "FEC decreasing at " + r[i].name);
  }
  c.expect(r[2].corrosion_share_at_eol >= 75.0 && r[2].corrosion_share_at_eol <= 97.0, "low-use corrosion share in [75, 97]%");
  c.expect(r[3].lifetime_years < r[2].lifetime_years, "infrequent lifetime below low-use lifetime");
  c.expect(r[3].fec < 0.7 * r[2].fec, "infrequent FEC below 0.7 x low-use FEC");
  for (const auto &x : r) c.expect(!x.censored, x.name + " reaches EOL");
  const double t = seconds_since(t0);
  c.expect(t < 120.0, "runtime");
  c.notes << "(";
  for (const auto &x : r)
    c.notes << x.name << ": " << x.lifetime_years << " y, " << x.fec << " FEC, " << x.corrosion_share_at_eol << "% corrosion; ";
  c.notes << "runtime " << t << " s)";
  return report(3, c);
}

bool criterion_comparison()
{
  Check c;
  const auto t0 = clock_type::now();
  const auto cmp = compare_strategies(archetype_scenario(Archetype::low, Policy::bboxx_static),
                                      archetype_scenario(Archetype::low, Policy::adaptive));
  c.expect(cmp.lifetime_ratio >= 1.10 && cmp.lifetime_ratio <= 1.40, "lifetime ratio in [1.10, 1.40]");
  c.expect(cmp.corrosion_loss_reduction >= 0.30, "corrosion-loss reduction >= 30%");
  c.expect(cmp.active_mass_ratio >= 2.0, "active-mass loss increase >= 2x");
  c.expect(cmp.alt.load_loss_events.empty(), "no load-loss events");
  c.expect(cmp.alt.min_soc >= 0.60, "min SOC >= 0.60");
  c.expect(cmp.alt_healthier_every_day, "adaptive SOH >= baseline SOH every day");
  const double t = seconds_since(t0);
  c.expect(t < 60.0, "runtime");
  c.notes << "(ratio " << cmp.lifetime_ratio << ", corrosion reduction " << 100.0 * cmp.corrosion_loss_reduction
          << "%, active-mass ratio " << cmp.active_mass_ratio << ", min SOC " << cmp.alt.min_soc << ", load-loss events "
          << cmp.alt.load_loss_events.size() << ", SOH at baseline EOL " << cmp.alt_soh_at_base_eol.value_or(-1.0) << "%, runtime "
          << t << " s)";
  return report(4, c);
}

bool criterion_invariants()
{
  Check c;
  const BatteryParams p;

  // per-step invariants under both policies
  int max_gap_days = 0;
  for (Policy pol : { Policy::bboxx_static, Policy::adaptive }) {
    std::size_t bad_mono = 0, bad_sum = 0, bad_d = 0;
    StepRecord prev{};
    bool first = true;
    const auto r = run_scenario(archetype_scenario(Archetype::low, pol), [&](const StepRecord &s) {
      if (!first && (s.layer_thickness < prev.layer_thickness || s.weighted_cycles < prev.weighted_cycles || s.total_loss < prev.total_loss))
        ++bad_mono;
      if (std::abs(s.total_loss - s.corrosion_loss - s.active_mass_loss) > 1e-9) ++bad_sum;
      if (s.recharge_interval < 1.0 || s.recharge_interval > 6.0) ++bad_d;
      prev = s;
      first = false;
    });
    c.expect(bad_mono == 0, "monotonic W/Z_w/C (" + std::string(to_string(pol)) + ")");
    c.expect(bad_sum == 0, "C = C_corr + C_deg (" + std::string(to_string(pol)) + ")");
    c.expect(bad_d == 0, "D in [1, 6] (" + std::string(to_string(pol)) + ")");
    if (pol == Policy::adaptive) max_gap_days = r.max_days_between_full_recharges;
  }
  c.expect(max_gap_days <= 6, "<= 6 days between full recharges under adaptive");

  double worst_ocv = 0.0;
  for (double s = 0.05; s <= 0.95 + 1e-12; s += 0.001) worst_ocv = std::max(worst_ocv, std::abs(invert_ocv(p, battery_ocv(p, s)).soc - s));
  c.expect(worst_ocv <= 1e-6, "OCV inversion round-trip");

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cur(-1.5, 1.5);
  double soc = 0.5, q = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const double i = cur(rng);
    q += i * 60.0;
    soc = step_soc(p, soc, i, 0.0, 60.0).soc;
  }
  const double expected = 0.5 + q / p.capacity_coulomb();
  const double coulomb_rel = std::abs(soc - expected) / std::abs(expected);
  c.expect(coulomb_rel <= 1e-9, "coulomb-counting oracle");

  const auto a = run_scenario(archetype_scenario(Archetype::moderate, Policy::adaptive));
  const auto b = run_scenario(archetype_scenario(Archetype::moderate, Policy::adaptive));
  c.expect(a.total_loss == b.total_loss && a.steps == b.steps && a.fec == b.fec && a.weighted_cycles == b.weighted_cycles,
           "determinism");

  double worst_shift = 0.0;
  for (Policy pol : { Policy::bboxx_static, Policy::adaptive }) {
    const auto coarse = run_scenario(archetype_scenario(Archetype::low, pol, 900.0));
    const auto fine = run_scenario(archetype_scenario(Archetype::low, pol, 450.0));
    worst_shift = std::max(worst_shift, std::abs(fine.lifetime_years - coarse.lifetime_years) / coarse.lifetime_years);
  }
  c.expect(worst_shift < 0.02, "dt-halving lifetime shift < 2%");

  c.notes << "(max days between full recharges " << max_gap_days << ", OCV round-trip " << worst_ocv << ", coulomb rel. error "
          << coulomb_rel << ", dt-halving shift " << 100.0 * worst_shift << "%)";
  return report(5, c);
}

bool criterion_stress()
{
  Check c;
  auto base = archetype_scenario(Archetype::low, Policy::bboxx_static);
  auto alt = archetype_scenario(Archetype::low, Policy::adaptive);
  base.record_trace = alt.record_trace = true;
  const auto rb = run_scenario(base);
  const auto ra = run_scenario(alt);
  const auto sb = stress_factors(rb.trace, base.dt_s);
  const auto sa = stress_factors(ra.trace, alt.dt_s);
  // 0.95 +/- 0.05 written as closed bounds; 1.0 - 0.95 is not exactly 0.05 in binary
  c.expect(sb.full_recharge_day_fraction >= 0.90 && sb.full_recharge_day_fraction <= 1.00, "baseline full-recharge frequency 0.95 +/- 0.05");
  c.expect(sa.full_recharge_day_fraction < sb.full_recharge_day_fraction, "adaptive frequency lower");
  const double mb = sb.time_between_full_charge_mean_h.value_or(0.0);
  const double ma = sa.time_between_full_charge_mean_h.value_or(0.0);
  c.expect(ma > mb, "adaptive mean time between full charges higher");
  c.notes << "(baseline frequency " << sb.full_recharge_day_fraction << ", adaptive " << sa.full_recharge_day_fraction
          << "; mean time between full charges " << mb << " h vs " << ma << " h)";
  return report(6, c);
}

} // namespace

int main()
{
  bool ok = true;
  ok &= criterion_equations();
  ok &= criterion_calibration();
  ok &= criterion_archetypes();
  ok &= criterion_comparison();
  ok &= criterion_invariants();
  ok &= criterion_stress();
  return ok ? 0 : 1;
}
