#include "records.hpp"

#include "hvac/errors.hpp"
#include "hvac/evaluation.hpp"
#include "hvac/trace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hvac;
using namespace hvac::testing;

namespace {

// Direct Nadaraya-Watson sum at one point.
double nw(const std::vector<double> &x, const std::vector<double> &y, double h, double at) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = std::exp(-0.5 * std::pow((x[i] - at) / h, 2));
    num += w * y[i];
    den += w;
  }
  return num / den;
}

// Midpoint-rule expectation of the interpolated curve under U[lo, hi].
double midpoint_mean(const Characteristic &c, double lo, double hi, int n = 200000) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += c(lo + (hi - lo) * (i + 0.5) / n);
  return s / n;
}

Characteristic curve_from(std::vector<double> grid, std::vector<double> values) {
  Characteristic c;
  c.grid = std::move(grid);
  c.values = std::move(values);
  c.counts.assign(c.grid.size(), 1);
  c.bandwidth = 1.0;
  return c;
}

std::vector<HourDistribution> all_hours(double lo, double hi) {
  return std::vector<HourDistribution>(24, HourDistribution{lo, hi});
}

} // namespace

TEST(Comfort, AtSetpointIsZero) {
  const std::vector<std::vector<double>> s(4, std::vector<double>{72.0, 70.0});
  const std::vector<double> sp{72.0, 70.0}, b{1.0, 1.0};
  EXPECT_EQ(comfort_hour(s, sp, b), 0.0);
}

TEST(Comfort, ConstantTwoDegreeExcursion) {
  const std::vector<std::vector<double>> s(4, std::vector<double>{74.0});
  const std::vector<double> sp{72.0}, b{1.0};
  EXPECT_NEAR(comfort_hour(s, sp, b), 1.0, 1e-12);
  const std::vector<std::vector<double>> cold(4, std::vector<double>{70.0});
  EXPECT_NEAR(comfort_hour(cold, sp, b), 1.0, 1e-12);
}

TEST(Comfort, SecondZoneInBandHalves) {
  const std::vector<std::vector<double>> s(4, std::vector<double>{74.0, 72.5});
  const std::vector<double> sp{72.0, 72.0}, b{1.0, 1.0};
  EXPECT_NEAR(comfort_hour(s, sp, b), 0.5, 1e-12);
}

TEST(Comfort, ZeroIffEverySampleInBand) {
  const std::vector<double> sp{72.0, 72.0}, b{1.0, 1.0};
  std::vector<std::vector<double>> s(4, std::vector<double>{72.9, 71.1});
  EXPECT_EQ(comfort_hour(s, sp, b), 0.0);
  s[3][1] = 70.99;
  EXPECT_GT(comfort_hour(s, sp, b), 0.0);
}

TEST(Comfort, ComfortableZoneScalesByZOverZPlusOne) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(68.0, 76.0);
  for (std::size_t z = 1; z <= 5; ++z) {
    std::vector<std::vector<double>> s(4, std::vector<double>(z));
    for (auto &row : s)
      for (auto &t : row)
        t = u(rng);
    std::vector<double> sp(z, 72.0), b(z, 1.0);
    const double c = comfort_hour(s, sp, b);
    for (auto &row : s)
      row.push_back(72.0);
    sp.push_back(72.0);
    b.push_back(1.0);
    EXPECT_NEAR(comfort_hour(s, sp, b), c * static_cast<double>(z) / static_cast<double>(z + 1), 1e-12);
  }
}

TEST(Comfort, InvariantToZoneRelabeling) {
  const std::vector<std::vector<double>> s{{74.0, 70.5, 72.0}, {73.5, 69.0, 72.2}};
  const std::vector<std::vector<double>> p{{72.0, 74.0, 70.5}, {72.2, 73.5, 69.0}};
  const std::vector<double> sp(3, 72.0), b(3, 1.0);
  EXPECT_DOUBLE_EQ(comfort_hour(s, sp, b), comfort_hour(p, sp, b));
}

TEST(Comfort, RejectsBadShapes) {
  const std::vector<double> sp{72.0}, none;
  EXPECT_THROW(comfort_hour({}, sp, sp), ValidationError);
  EXPECT_THROW(comfort_hour({{72.0}}, none, none), ValidationError);
  EXPECT_THROW(comfort_hour({{72.0, 73.0}}, sp, sp), ValidationError);
}

TEST(Kernel, ConstantReproduced) {
  const std::vector<double> x{60, 62.5, 70, 71, 80}, y(5, 5.0);
  const auto grid = make_grid(60, 80);
  const auto c = kernel_regression(x, y, 2.0, grid);
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (c.supported(g))
      EXPECT_NEAR(c.values[g], 5.0, 1e-12);
}

TEST(Kernel, MatchesDirectSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(60.0, 90.0);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(u(rng));
    y.push_back(u(rng));
  }
  const auto grid = make_grid(60, 90);
  const auto c = kernel_regression(x, y, 2.0, grid);
  for (std::size_t g = 0; g < grid.size(); ++g)
    EXPECT_NEAR(c.values[g], nw(x, y, 2.0, grid[g]), 1e-10);
}

TEST(Kernel, TwoClustersTinyBandwidth) {
  const std::vector<double> x{49.9, 50.0, 50.1, 69.9, 70.0, 70.1};
  const std::vector<double> y{1, 1, 1, 3, 3, 3};
  const std::vector<double> grid{50.0, 51.0, 69.0, 70.0};
  const auto c = kernel_regression(x, y, 0.2, grid);
  EXPECT_NEAR(c.values[0], 1.0, 1e-9);
  EXPECT_NEAR(c.values[1], 1.0, 1e-9);
  EXPECT_NEAR(c.values[2], 3.0, 1e-9);
  EXPECT_NEAR(c.values[3], 3.0, 1e-9);
  EXPECT_EQ(c.counts[0], 3u);
  EXPECT_EQ(c.counts[1], 0u); // nearest sample is 4.5 bandwidths away
  EXPECT_FALSE(c.supported(1));
}

TEST(Kernel, LinearDataSymmetricDesign) {
  std::vector<double> x, y;
  for (int i = 40; i <= 100; ++i) {
    x.push_back(i);
    y.push_back(i);
  }
  const auto grid = make_grid(60, 80);
  const auto c = kernel_regression(x, y, 1.0, grid);
  for (std::size_t g = 0; g < grid.size(); ++g)
    EXPECT_NEAR(c.values[g], grid[g], 1e-3);
}

TEST(Kernel, ConvexHullOfData) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
      x.push_back(60.0 + 30.0 * u(rng));
      y.push_back(-5.0 + 20.0 * u(rng));
    }
    const double lo = *std::min_element(y.begin(), y.end());
    const double hi = *std::max_element(y.begin(), y.end());
    const auto grid = make_grid(60, 90);
    const auto c = kernel_regression(x, y, 0.5 + 3.0 * u(rng), grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (std::isfinite(c.values[g])) {
        EXPECT_GE(c.values[g], lo - 1e-12);
        EXPECT_LE(c.values[g], hi + 1e-12);
      }
  }
}

TEST(Kernel, FarGridPointsUnsupported) {
  const std::vector<double> x{70.0}, y{1.0};
  const std::vector<double> grid{70.0, 200.0, 1000.0};
  const auto c = kernel_regression(x, y, 2.0, grid);
  EXPECT_TRUE(c.supported(0));
  EXPECT_FALSE(c.supported(1));
  EXPECT_FALSE(c.supported(2));
  EXPECT_TRUE(std::isnan(c.values[2]));
}

TEST(Kernel, RejectsBadInput) {
  const std::vector<double> none, one{1.0}, two{1.0, 2.0};
  EXPECT_THROW(kernel_regression(none, none, 1.0, one), ValidationError);
  EXPECT_THROW(kernel_regression(one, two, 1.0, one), ValidationError);
  EXPECT_THROW(kernel_regression(one, one, 0.0, one), ValidationError);
  EXPECT_THROW(kernel_regression(one, one, 1.0, none), ValidationError);
}

TEST(Grid, IntegerDegreeSpan) {
  EXPECT_EQ(make_grid(60.4, 62.1), (std::vector<double>{60, 61, 62, 63}));
  EXPECT_EQ(make_grid(70.0, 70.0), (std::vector<double>{70}));
  EXPECT_THROW(make_grid(2.0, 1.0), ValidationError);
}

TEST(DayEnergy, ConstantCurve) {
  const auto c = curve_from(make_grid(60, 90), std::vector<double>(31, 3.5));
  EXPECT_NEAR(day_energy(c, all_hours(63.2, 81.7)), 24.0 * 3.5, 1e-12);
}

TEST(DayEnergy, LinearCurveUniformHours) {
  const auto grid = make_grid(60, 90);
  const auto c = curve_from(grid, grid);
  EXPECT_NEAR(day_energy(c, all_hours(64.3, 77.9)), 24.0 * (64.3 + 77.9) / 2.0, 1e-10);
}

TEST(DayEnergy, PointMass) {
  const auto grid = make_grid(60, 90);
  std::vector<double> v;
  for (double g : grid)
    v.push_back(std::sin(g / 5.0));
  const auto c = curve_from(grid, v);
  EXPECT_NEAR(day_energy(c, all_hours(71.3, 71.3)), 24.0 * c(71.3), 1e-12);
  EXPECT_NEAR(day_energy(c, all_hours(90.0, 90.0)), 24.0 * v.back(), 1e-12);
}

TEST(DayEnergy, MatchesMidpointQuadrature) {
  const auto grid = make_grid(60, 90);
  std::vector<double> v;
  for (double g : grid)
    v.push_back(g * g / 100.0 + std::cos(g));
  const auto c = curve_from(grid, v);
  std::vector<HourDistribution> hours;
  double expect = 0.0;
  for (int h = 0; h < 24; ++h) {
    const double lo = 61.0 + 0.37 * h, hi = lo + 2.0 + 0.5 * h;
    hours.push_back({lo, hi});
    expect += midpoint_mean(c, lo, hi);
  }
  EXPECT_NEAR(day_energy(c, hours), expect, 1e-6);
}

TEST(DayEnergy, LinearInTheCurve) {
  const auto grid = make_grid(60, 90);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> f, g, mix;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f.push_back(u(rng));
    g.push_back(u(rng));
    mix.push_back(2.5 * f.back() - 0.7 * g.back());
  }
  const auto hours = all_hours(62.5, 88.25);
  const double lhs = day_energy(curve_from(grid, mix), hours);
  const double rhs = 2.5 * day_energy(curve_from(grid, f), hours) - 0.7 * day_energy(curve_from(grid, g), hours);
  EXPECT_NEAR(lhs, rhs, 1e-9);
}

TEST(DayEnergy, OutsideSupportThrows) {
  auto c = curve_from(make_grid(60, 90), std::vector<double>(31, 1.0));
  EXPECT_THROW(day_energy(c, all_hours(55.0, 65.0)), ValidationError);
  c.counts[10] = 0;
  EXPECT_THROW(day_energy(c, all_hours(68.0, 72.0)), ValidationError);
  EXPECT_NO_THROW(day_energy(c, all_hours(60.0, 69.0)));
}

TEST(Hourly, AggregatesCompleteHours) {
  TraceSet t;
  t.zones = 1;
  const auto start = parse_timestamp("2024-07-01T22:30:00Z");
  for (int k = 0; k < 10; ++k) {
    TraceRow r;
    r.time = start + std::chrono::minutes{15 * k};
    r.oat = 70.0 + k;
    r.sat = 52.0;
    r.mode = 1;
    r.zones = {ZoneState{72.0 + (k == 3 ? 3.0 : 0.0), 300.0, 0.0}};
    r.setpoints = {72.0};
    r.energy_kwh = 1.0 + k;
    t.rows.push_back(r);
  }
  const std::vector<double> bands{1.0};
  const auto recs = aggregate_hourly(t, bands, 5);
  // 22:30-22:45 and 01:00 onwards are incomplete.
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].hour, 23u);
  EXPECT_EQ(recs[0].day, 5u);
  EXPECT_DOUBLE_EQ(recs[0].oat, (72 + 73 + 74 + 75) / 4.0);
  EXPECT_DOUBLE_EQ(recs[0].energy, 3 + 4 + 5 + 6);
  EXPECT_DOUBLE_EQ(recs[0].comfort, 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(recs[0].zone_temps[0], 72.75);
  EXPECT_EQ(recs[1].hour, 0u);
  EXPECT_EQ(recs[1].day, 6u);
}

TEST(Overlap, PerHourIntersection) {
  std::vector<HourlyRecord> a, b;
  for (std::size_t h = 0; h < 24; ++h) {
    a.push_back(HourlyRecord{h, 0, 60.0 + h});
    a.push_back(HourlyRecord{h, 1, 70.0 + h});
    b.push_back(HourlyRecord{h, 0, 65.0 + h});
    b.push_back(HourlyRecord{h, 1, 80.0 + h});
  }
  const auto hours = overlapping_hours(a, b);
  for (std::size_t h = 0; h < 24; ++h) {
    EXPECT_EQ(hours[h].lo, 65.0 + h);
    EXPECT_EQ(hours[h].hi, 70.0 + h);
  }
  b[10].oat = 200.0;
  b[11].oat = 201.0; // hour 5 now disjoint
  EXPECT_THROW(overlapping_hours(a, b), ValidationError);
}

TEST(Bootstrap, IdenticalSetsGiveZeroDelta) {
  std::mt19937_64 rng(6);
  const auto a = synthetic_records(rng, 10);
  BootstrapOptions o;
  o.resamples = 1000;
  const auto r = bootstrap_compare(a, a, Statistic::Energy, o);
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_GT(r.p_value, 0.5);
  EXPECT_LE(r.ci_lo, 0.0);
  EXPECT_GE(r.ci_hi, 0.0);
}

TEST(Bootstrap, DoubledEnergyShift) {
  std::mt19937_64 rng(7);
  const auto a = synthetic_records(rng, 10);
  auto b = a;
  for (auto &r : b)
    r.energy *= 2.0;
  BootstrapOptions o;
  o.resamples = 1000;
  const auto r = bootstrap_compare(a, b, Statistic::Energy, o);
  EXPECT_NEAR(r.delta, r.stat_a, 1e-9 * r.stat_a);
  EXPECT_GT(r.ci_lo, 0.0);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(Bootstrap, PointEstimateIndependentOfSeedAndResamples) {
  std::mt19937_64 rng(8);
  const auto a = synthetic_records(rng, 6);
  const auto b = synthetic_records(rng, 6, 6.0, 5.0);
  BootstrapOptions o1, o2;
  o1.resamples = 1000;
  o1.seed = 1;
  o2.resamples = 1500;
  o2.seed = 99;
  const auto r1 = bootstrap_compare(a, b, Statistic::Energy, o1);
  const auto r2 = bootstrap_compare(a, b, Statistic::Energy, o2);
  EXPECT_EQ(r1.delta, r2.delta);
  EXPECT_EQ(r1.stat_a, r2.stat_a);
  EXPECT_GE(r1.delta, r1.ci_lo);
  EXPECT_LE(r1.delta, r1.ci_hi);
}

TEST(Bootstrap, SeededAndReproducible) {
  std::mt19937_64 rng(9);
  const auto a = synthetic_records(rng, 5);
  const auto b = synthetic_records(rng, 5);
  BootstrapOptions o;
  o.resamples = 1000;
  const auto r1 = bootstrap_compare(a, b, Statistic::Energy, o);
  const auto r2 = bootstrap_compare(a, b, Statistic::Energy, o);
  EXPECT_EQ(r1.p_value, r2.p_value);
  EXPECT_EQ(r1.ci_lo, r2.ci_lo);
  EXPECT_EQ(r1.ci_hi, r2.ci_hi);
  EXPECT_EQ(r1.curve_p_value, r2.curve_p_value);
}

TEST(Bootstrap, DeltaMatchesIndependentDayEnergy) {
  std::mt19937_64 rng(10);
  const auto a = synthetic_records(rng, 6);
  const auto b = synthetic_records(rng, 6, 6.0, -3.0);
  BootstrapOptions o;
  o.resamples = 1000;
  const auto r = bootstrap_compare(a, b, Statistic::Energy, o);
  // Recompute each side with the direct kernel sum and midpoint quadrature.
  const auto side = [&](const std::vector<HourlyRecord> &recs) {
    std::vector<double> x, y;
    for (const auto &h : recs) {
      x.push_back(h.oat);
      y.push_back(h.energy);
    }
    Characteristic c = r.curve_a;
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      c.values[g] = nw(x, y, 2.0, c.grid[g]);
    double total = 0.0;
    for (const auto &h : r.hours)
      total += h.hi > h.lo ? midpoint_mean(c, h.lo, h.hi, 20000) : c(h.lo);
    return total;
  };
  EXPECT_NEAR(r.stat_a, side(a), 1e-4);
  EXPECT_NEAR(r.stat_b, side(b), 1e-4);
  // A downward shift of 3 kWh per hour is 72 kWh per day, up to noise.
  EXPECT_NEAR(r.delta, -72.0, 25.0);
}

TEST(Bootstrap, DisjointOatRangesRejected) {
  std::mt19937_64 rng(11);
  const auto a = synthetic_records(rng, 4);
  auto b = synthetic_records(rng, 4);
  for (auto &r : b)
    r.oat += 40.0;
  BootstrapOptions o;
  o.resamples = 1000;
  try {
    bootstrap_compare(a, b, Statistic::Energy, o);
    FAIL() << "expected a ValidationError";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("no overlapping OAT support"), std::string::npos);
  }
}

TEST(Bootstrap, RejectsTooFewResamples) {
  std::mt19937_64 rng(12);
  const auto a = synthetic_records(rng, 2);
  BootstrapOptions o;
  o.resamples = 999;
  EXPECT_THROW(bootstrap_compare(a, a, Statistic::Energy, o), ValidationError);
  const std::vector<HourlyRecord> none;
  o.resamples = 1000;
  EXPECT_THROW(bootstrap_compare(a, none, Statistic::Energy, o), ValidationError);
}

TEST(Bootstrap, CompareReportsBothStatistics) {
  std::mt19937_64 rng(13);
  const auto a = synthetic_records(rng, 5);
  const auto b = synthetic_records(rng, 5);
  BootstrapOptions o;
  o.resamples = 1000;
  const auto rep = compare_controllers(a, b, o);
  EXPECT_EQ(rep.hours_a, a.size());
  EXPECT_EQ(rep.energy.statistic, Statistic::Energy);
  EXPECT_EQ(rep.comfort.statistic, Statistic::Comfort);
  EXPECT_FALSE(rep.energy.pointwise.empty());
  for (const auto &p : rep.energy.pointwise) {
    EXPECT_LE(p.ci_lo, p.delta);
    EXPECT_GE(p.ci_hi, p.delta);
  }
}
