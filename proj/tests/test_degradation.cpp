#include "shs/calibration.hpp"
#include "shs/degradation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shs;

namespace {
const BatteryParams P{};
const CorrosionSpeedTable K{};
}

TEST(PositivePotential, RestEqualsPositiveOcv)
{
  for (double s : { 0.2, 0.7, 1.0 })
    EXPECT_DOUBLE_EQ(positive_terminal_voltage(P, s, 0.0), positive_ocv_cell(log_molality_at_soc(P, s)));
}

TEST(PositivePotential, HalfOverpotentialIdentity)
{
  for (double s : { 0.15, 0.5, 0.93 })
    for (double i : { -2.0, -0.3, 0.4, 3.0 }) {
      const double v = terminal_voltage(P, s, i, 0.5);
      const double u = ocv_cell(log_molality_at_soc(P, s));
      const double up = positive_ocv_cell(log_molality_at_soc(P, s));
      EXPECT_NEAR(positive_terminal_voltage(P, s, i, 0.5) - up, 0.5 * (v / 6.0 - u), 1e-12);
    }
}

TEST(PositivePotential, ThresholdAt128Volts)
{
  // resting battery at 12.8 V sits at the 1.74 V positive-potential threshold
  const auto inv = invert_ocv(P, 12.8);
  EXPECT_NEAR(positive_terminal_voltage(P, inv.soc, 0.0), 1.74, 0.005);
  EXPECT_NEAR(inv.soc, 0.89, 0.05);
}

TEST(CorrosionSpeed, TemperatureDoubling)
{
  for (double v : { 1.65, 1.74, 1.83, 1.97 }) {
    const double a = corrosion_speed(K, v, 295.0).value;
    EXPECT_NEAR(corrosion_speed(K, v, 305.0).value / a, 2.0, 1e-12);
  }
}

TEST(CorrosionSpeed, LowRegimeSlower)
{
  EXPECT_LT(corrosion_speed(K, 1.70, 298.0).value, corrosion_speed(K, 1.80, 298.0).value);
  const double at_threshold = corrosion_speed(K, 1.74, 298.0).value;
  for (double v = 1.50; v < 1.74 - 1e-9; v += 0.005) EXPECT_LT(corrosion_speed(K, v, 298.0).value, at_threshold) << v;
  for (double v = 1.74; v <= 2.0; v += 0.005) EXPECT_GE(corrosion_speed(K, v, 298.0).value, at_threshold) << v;
}

TEST(CorrosionSpeed, ContinuousInVoltage)
{
  for (double v = 1.55; v < 1.99; v += 0.013) {
    const double a = corrosion_speed(K, v, 300.0).value;
    const double b = corrosion_speed(K, v + 1e-9, 300.0).value;
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(CorrosionSpeed, ClampsOutOfRange)
{
  const auto lo = corrosion_speed(K, 1.2, 298.0);
  EXPECT_TRUE(lo.clamped);
  EXPECT_DOUBLE_EQ(lo.value, K.speed.front());
  const auto hot = corrosion_speed(K, 1.8, 350.0);
  EXPECT_TRUE(hot.clamped);
  EXPECT_DOUBLE_EQ(hot.value, corrosion_speed(K, 1.8, 333.0).value);
  EXPECT_FALSE(corrosion_speed(K, 1.8, 300.0).clamped);
}

TEST(CorrosionLayer, ZeroSpeedNoGrowth)
{
  CorrosionState c;
  c.layer_thickness = 0.3;
  EXPECT_DOUBLE_EQ(grow_corrosion_layer(c, 0.0, 1.9, 900.0).layer_thickness, 0.3);
  EXPECT_DOUBLE_EQ(grow_corrosion_layer(c, 0.0, 1.6, 900.0).layer_thickness, 0.3);
}

TEST(CorrosionLayer, LinearRegimeAccumulates)
{
  CorrosionState c;
  c.layer_thickness = 0.1;
  const double ks = 5e-3;
  for (int n = 0; n < 40; ++n) c = grow_corrosion_layer(c, ks, 1.85, 900.0);
  EXPECT_NEAR(c.layer_thickness, 0.1 + 40 * ks * 0.25, 1e-12);
}

TEST(CorrosionLayer, PowerLawRegimeMatchesClosedForm)
{
  const double ks = 1.7e-3, tau = 500.0;
  CorrosionState c;
  const int n = 1000;
  for (int k = 0; k < n; ++k) c = grow_corrosion_layer(c, ks, 1.70, tau / n * 3600.0);
  EXPECT_NEAR(c.layer_thickness, ks * std::pow(tau, 0.6), 0.01 * ks * std::pow(tau, 0.6));
}

TEST(CorrosionLayer, ContinuousAcrossRegimeSwitch)
{
  CorrosionState c;
  const double ks = 3e-3;
  double prev = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double vp = (k / 20) % 2 ? 1.73 : 1.75;
    c = grow_corrosion_layer(c, ks, vp, 900.0);
    const double step = c.layer_thickness - prev;
    EXPECT_GE(step, 0.0);
    EXPECT_LE(step, ks * 0.25 + 1e-15);
    prev = c.layer_thickness;
  }
}

TEST(CorrosionLoss, LinearMap)
{
  CorrosionState c;
  c.w_limit = 2.0;
  c.c_corr_limit = 4.0;
  EXPECT_DOUBLE_EQ(corrosion_capacity_loss(c), 0.0);
  c.layer_thickness = 2.0;
  EXPECT_DOUBLE_EQ(corrosion_capacity_loss(c), 4.0);
  c.layer_thickness = 1.0;
  EXPECT_DOUBLE_EQ(corrosion_capacity_loss(c), 2.0);
}

TEST(SocFactor, NeutralAfterFullCharge)
{
  ActiveMassState am;
  am.min_soc_since_full_charge = 0.4;
  EXPECT_DOUBLE_EQ(soc_factor({}, am, 0.5), 1.0);
}

TEST(SocFactor, LowerMinSocWeighsMore)
{
  ActiveMassState a, b;
  a.time_since_full_charge_h = b.time_since_full_charge_h = 48.0;
  a.min_soc_since_full_charge = 0.9;
  b.min_soc_since_full_charge = 0.6;
  EXPECT_GT(soc_factor({}, b, 1.0), soc_factor({}, a, 1.0));
  EXPECT_GT(soc_factor({}, a, 1.0), 1.0);
}

TEST(WeightedCycles, Examples)
{
  ActiveMassState am;
  EXPECT_DOUBLE_EQ(accumulate_weighted_cycles(am, 0.0, 1.0, 3600.0, 20.0).weighted_cycles, 0.0);
  EXPECT_NEAR(accumulate_weighted_cycles(am, 2.0, 1.0, 10 * 3600.0, 20.0).weighted_cycles, 1.0, 1e-12);
  EXPECT_NEAR(accumulate_weighted_cycles(am, 2.0, 2.0, 5 * 3600.0, 20.0).weighted_cycles, 1.0, 1e-12);
}

TEST(ActiveMassLoss, ExponentialMap)
{
  ActiveMassState am;
  am.nominal_cycles = 450.0;
  am.c_deg_limit = 4.0;
  am.weighted_cycles = 450.0;
  EXPECT_DOUBLE_EQ(active_mass_loss(am), 4.0);
  am.weighted_cycles = 0.0;
  EXPECT_NEAR(active_mass_loss(am) / 4.0, 0.00674, 1e-5);
  am.weighted_cycles = 225.0;
  EXPECT_NEAR(active_mass_loss(am) / 4.0, 0.0821, 1e-4);
  double prev = 0.0;
  for (double z = 0.0; z < 600.0; z += 10.0) {
    am.weighted_cycles = z;
    EXPECT_GT(active_mass_loss(am), prev);
    prev = active_mass_loss(am);
  }
}

TEST(TotalLoss, SumAndEol)
{
  DegradationLedger l;
  l.corrosion.capacity_loss = 0.0;
  l.active_mass.capacity_loss = 0.0;
  auto t = total_loss_and_eol(l, P);
  EXPECT_DOUBLE_EQ(t.total, 0.0);
  EXPECT_FALSE(t.eol);
  l.corrosion.capacity_loss = 2.0;
  l.active_mass.capacity_loss = 2.0;
  t = total_loss_and_eol(l, P);
  EXPECT_DOUBLE_EQ(t.total, 4.0);
  EXPECT_TRUE(t.eol);
}

TEST(DailyDelta, CarryForwardOnZeroChange)
{
  DegradationLedger l;
  l.corrosion.capacity_loss = 0.3;
  l.total_loss = 0.4;
  const auto d1 = close_day(l);
  EXPECT_NEAR(d1.corrosion_fraction, 0.75, 1e-12);
  const auto d2 = close_day(l);
  EXPECT_DOUBLE_EQ(d2.d_total, 0.0);
  EXPECT_NEAR(d2.corrosion_fraction, 0.75, 1e-12);
}

TEST(Calibration, FloatLifeSelfConsistent)
{
  DegradationParams dp;
  Datasheet ds;
  calibrate_limits(P, dp, ds);
  const auto run = simulate_float(P, dp, ds, 2.0 * ds.float_life_years, true);
  ASSERT_TRUE(run.eol_years.has_value());
  EXPECT_NEAR(*run.eol_years, ds.float_life_years, 0.02 * ds.float_life_years);
}

TEST(Calibration, DoublingFloatLifeDoublesWlimit)
{
  DegradationParams a, b;
  Datasheet ds;
  const double w1 = calibrate_limits(P, a, ds).w_limit;
  ds.float_life_years *= 2.0;
  const double w2 = calibrate_limits(P, b, ds).w_limit;
  EXPECT_NEAR(w2 / w1, 2.0, 1e-3);
}

TEST(Calibration, LimitsAreTwentyPercentEach)
{
  DegradationParams dp;
  const auto lim = calibrate_limits(P, dp, {});
  EXPECT_DOUBLE_EQ(lim.c_corr_limit, 4.0);
  EXPECT_DOUBLE_EQ(lim.c_deg_limit, 4.0);
}

TEST(Calibration, RejectsZeroCorrosionSpeed)
{
  DegradationParams dp;
  for (auto &s : dp.corrosion_speed.speed) s = 0.0;
  EXPECT_THROW(calibrate_limits(P, dp, {}), ModelError);
}
