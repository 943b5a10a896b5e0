#include "shs/profiles.hpp"
#include "shs/stress.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

using namespace shs;

namespace {
double daily_load_wh(const TimeSeries &ts)
{
  double wh = 0.0;
  for (const auto &s : ts.samples) wh += s.load_w * ts.dt_s / 3600.0;
  return wh / (ts.duration_s() / 86400.0);
}
}

TEST(Archetype, DailyEnergyOrdering)
{
  const double high = daily_load_wh(generate_archetype(Archetype::high, 60, 1));
  const double moderate = daily_load_wh(generate_archetype(Archetype::moderate, 60, 1));
  const double low = daily_load_wh(generate_archetype(Archetype::low, 60, 1));
  const double infrequent = daily_load_wh(generate_archetype(Archetype::infrequent, 60, 1));
  EXPECT_GT(high, moderate);
  EXPECT_GT(moderate, low);
  EXPECT_GT(low, infrequent);
  EXPECT_NEAR(low, 40.0, 4.0);
}

TEST(Archetype, InfrequentHasLongNonUseRun)
{
  const auto ts = generate_archetype(Archetype::infrequent, 30, 3);
  const std::size_t per_day = 96;
  int run = 0, longest = 0;
  for (std::size_t d = 0; d < ts.size() / per_day; ++d) {
    double e = 0.0;
    for (std::size_t k = 0; k < per_day; ++k) e += ts.samples[d * per_day + k].load_w;
    run = e == 0.0 ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  EXPECT_GE(longest, 7);
}

TEST(Archetype, SolarBoundedAndDarkAtNight)
{
  const auto ts = generate_archetype(Archetype::moderate, 10, 1);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    EXPECT_GE(ts.samples[k].solar_w, 0.0);
    EXPECT_LE(ts.samples[k].solar_w, 50.0);
    if (k % 96 == 0) {
      EXPECT_DOUBLE_EQ(ts.samples[k].solar_w, 0.0);
    }
  }
}

TEST(Archetype, Deterministic)
{
  const auto a = generate_archetype(Archetype::low, 20, 42);
  const auto b = generate_archetype(Archetype::low, 20, 42);
  const auto c = generate_archetype(Archetype::low, 20, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Archetype, RejectsBadArguments)
{
  EXPECT_THROW(generate_archetype(Archetype::low, 0, 1), ModelError);
  EXPECT_THROW(generate_archetype(Archetype::low, 1, 1, 7.0), ModelError);
  EXPECT_THROW(archetype_from_string("daily"), ModelError);
}

TEST(Timestamps, RoundTrip)
{
  std::int64_t t = 0;
  ASSERT_TRUE(parse_iso8601("2024-03-01T12:15:00Z", t));
  EXPECT_EQ(format_iso8601(t), "2024-03-01T12:15:00Z");
  EXPECT_FALSE(parse_iso8601("yesterday", t));
}

TEST(IngestCsv, IdentityOnUniformGrid)
{
  std::stringstream in("timestamp,load_w,solar_w,temp_c\n"
                       "2024-01-01T00:00:00Z,1,0,20\n"
                       "2024-01-01T00:15:00Z,2,5,21\n"
                       "2024-01-01T00:30:00Z,3,10,22\n");
  const auto r = ingest_csv(in);
  ASSERT_EQ(r.series.size(), 3u);
  EXPECT_EQ(r.gaps.filled_slots, 0u);
  EXPECT_EQ(r.series.samples[1], (Sample{ 2, 5, 21 }));
}

TEST(IngestCsv, SingleGapIsFilled)
{
  std::stringstream in("timestamp,load_w,solar_w,temp_c\n"
                       "2024-01-01T00:00:00Z,1,0,20\n"
                       "2024-01-01T00:15:00Z,2,5,21\n"
                       "2024-01-01T00:45:00Z,3,10,22\n"
                       "2024-01-01T01:00:00Z,3,10,22\n"
                       "2024-01-01T01:15:00Z,3,10,22\n");
  const auto r = ingest_csv(in);
  EXPECT_EQ(r.gaps.filled_slots, 1u);
  EXPECT_EQ(r.series.size(), 6u);
  EXPECT_EQ(r.series.samples[2], r.series.samples[1]);
}

TEST(IngestCsv, NonMonotoneReportsIndex)
{
  std::stringstream in("timestamp,load_w,solar_w,temp_c\n"
                       "2024-01-01T00:00:00Z,1,0,20\n"
                       "2024-01-01T00:30:00Z,2,5,21\n"
                       "2024-01-01T00:15:00Z,3,10,22\n");
  try {
    ingest_csv(in);
    FAIL() << "expected IngestError";
  } catch (const IngestError &e) {
    ASSERT_EQ(e.lines().size(), 1u);
    EXPECT_EQ(e.lines()[0], 2u);
  }
}

TEST(IngestCsv, UnparseableLinesListed)
{
  std::stringstream in("timestamp,load_w,solar_w,temp_c\n"
                       "2024-01-01T00:00:00Z,1,0,20\n"
                       "2024-01-01T00:15:00Z,abc,5,21\n"
                       "2024-01-01T00:30:00Z,3,10\n");
  try {
    ingest_csv(in);
    FAIL() << "expected IngestError";
  } catch (const IngestError &e) {
    EXPECT_EQ(e.lines(), (std::vector<std::size_t>{ 3, 4 }));
  }
}

TEST(IngestCsv, TooManyGapsRejected)
{
  std::stringstream in("timestamp,load_w,solar_w,temp_c\n"
                       "2024-01-01T00:00:00Z,1,0,20\n"
                       "2024-01-01T01:00:00Z,1,0,20\n");
  EXPECT_THROW(ingest_csv(in), IngestError);
}

TEST(IngestCsv, MissingColumnAndEmptyInput)
{
  std::stringstream a("timestamp,load_w,temp_c\n2024-01-01T00:00:00Z,1,20\n");
  EXPECT_THROW(ingest_csv(a), IngestError);
  std::stringstream b("");
  EXPECT_THROW(ingest_csv(b), IngestError);
}

TEST(IngestCsv, WriteReadRoundTrip)
{
  auto ts = generate_archetype(Archetype::high, 3, 9);
  ts.start_time = 1704067200;
  std::stringstream buf;
  write_csv(buf, ts);
  const auto back = ingest_csv(buf);
  EXPECT_EQ(back.series.start_time, ts.start_time);
  EXPECT_DOUBLE_EQ(back.series.dt_s, ts.dt_s);
  EXPECT_EQ(back.series.samples, ts.samples);
}

TEST(IngestCsv, CustomColumnNames)
{
  ColumnMap cols{ "time", "demand", "pv", "ambient" };
  std::stringstream in("ambient,pv,demand,time\n20,0,1,2024-01-01T00:00:00Z\n21,5,2,2024-01-01T00:15:00Z\n");
  const auto r = ingest_csv(in, cols);
  EXPECT_EQ(r.series.samples[1], (Sample{ 2, 5, 21 }));
}

TEST(Stress, ToyThreeCycles)
{
  // four full-charge events 24 h apart with dips to 0.8, 0.6 and 0.7 in between; dt = 1 h
  std::vector<TracePoint> tr(73);
  for (auto &p : tr) p.soc = 1.0;
  for (std::size_t k : { 0, 24, 48, 72 }) tr[k].full_charge_event = true;
  tr[10].soc = 0.8;
  tr[30].soc = 0.6;
  tr[60].soc = 0.7;
  tr[10].current = -2.0;
  tr[11].current = 1.0;
  tr[12].current = 1.0;
  const auto sf = stress_factors(tr, 3600.0);
  EXPECT_EQ(sf.full_charge_count, 4u);
  ASSERT_TRUE(sf.time_between_full_charge_mean_h);
  EXPECT_DOUBLE_EQ(*sf.time_between_full_charge_mean_h, 24.0);
  EXPECT_DOUBLE_EQ(*sf.time_between_full_charge_max_h, 24.0);
  EXPECT_EQ(sf.partial_cycling[2], 1u);
  EXPECT_EQ(sf.partial_cycling[3], 1u);
  EXPECT_EQ(sf.partial_cycling[4], 1u);
  ASSERT_TRUE(sf.mean_cycle_depth);
  EXPECT_NEAR(*sf.mean_cycle_depth, 0.3, 1e-12);
  ASSERT_TRUE(sf.charge_factor);
  EXPECT_DOUBLE_EQ(*sf.charge_factor, 1.0);
  EXPECT_DOUBLE_EQ(sf.ah_throughput, 2.0);
  EXPECT_DOUBLE_EQ(sf.highest_discharge_rate, 2.0);
  EXPECT_EQ(sf.days, 4u);
  EXPECT_EQ(sf.full_recharge_days, 4u);
}

TEST(Stress, NoDischargeMeansNoChargeFactor)
{
  std::vector<TracePoint> tr(10);
  for (auto &p : tr) p.current = 0.5;
  EXPECT_FALSE(stress_factors(tr, 900.0).charge_factor.has_value());
}

TEST(Stress, LowSocTime)
{
  std::vector<TracePoint> tr(8);
  tr[2].soc = tr[3].soc = 0.4;
  EXPECT_DOUBLE_EQ(stress_factors(tr, 1800.0).time_at_low_soc_h, 1.0);
}

TEST(Stress, EmptyTraceThrows)
{
  std::vector<TracePoint> tr;
  EXPECT_THROW(stress_factors(tr, 900.0), ModelError);
}
