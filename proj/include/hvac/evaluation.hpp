#pragma once

#include "hvac/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hvac {

/// One hour of building operation.
struct HourlyRecord {
  std::size_t hour = 0;   // hour of day, 0..23
  std::size_t day = 0;    // ordinal of the calendar day within its trace set
  double oat = 0.0;       // mean over the hour, degF
  double energy = 0.0;    // kWh over the hour
  double comfort = 0.0;   // comfort excess over the hour, degF h
  std::vector<double> zone_temps; // hourly means
  std::vector<double> setpoints;
};

/// Comfort excess over one hour: the zone average of the time-integral of
/// (|T - S| - B)_+, with the integral taken as the mean of the sub-hour
/// samples. `samples[s][j]` is zone j at sample s.
double comfort_hour(const std::vector<std::vector<double>> &samples,
                    std::span<const double> setpoints, std::span<const double> bands);

/// Groups 15-minute rows into complete clock hours. Incomplete hours at the
/// ends of a trace are dropped.
std::vector<HourlyRecord> aggregate_hourly(const TraceSet &trace, std::span<const double> bands,
                                           std::size_t day_offset = 0);

/// Smoothed curve of y against OAT on a fixed grid.
struct Characteristic {
  std::vector<double> grid;
  std::vector<double> values;       // NaN where the kernel weights vanish
  std::vector<std::size_t> counts;  // samples within one bandwidth
  double bandwidth = 0.0;

  bool supported(std::size_t i) const;
  /// Piecewise-linear interpolation of `values`.
  double operator()(double oat) const;
};

/// Integer-degree grid spanning [lo, hi] with the given spacing.
std::vector<double> make_grid(double lo, double hi, double spacing = 1.0);

/// Nadaraya-Watson estimate with a Gaussian kernel.
Characteristic kernel_regression(std::span<const double> x, std::span<const double> y,
                                 double bandwidth, std::span<const double> grid);

/// OAT distribution for one hour of the day: uniform on [lo, hi], a point
/// mass when lo == hi.
struct HourDistribution {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sum over hours of the curve's expectation under each hour's OAT
/// distribution. The expectation integrates the piecewise-linear curve
/// exactly. Throws ValidationError when a distribution leaves the curve's
/// support.
double day_energy(const Characteristic &curve, std::span<const HourDistribution> hours,
                  bool require_support = true);

/// Quadrature weights w with day_energy(curve) = sum_g w[g] * values[g].
std::vector<double> day_weights(std::span<const double> grid,
                                std::span<const HourDistribution> hours);

/// Per-hour uniform OAT distributions on the range both record sets
/// observed at that hour. Throws ValidationError when some hour has no
/// overlap.
std::vector<HourDistribution> overlapping_hours(std::span<const HourlyRecord> a,
                                                std::span<const HourlyRecord> b);

enum class Statistic { Energy, Comfort };

struct BootstrapOptions {
  std::size_t resamples = 2000;
  std::uint64_t seed = 1;
  double bandwidth = 2.0;
  double grid_spacing = 1.0;
  double confidence = 0.95;
  bool pointwise = true;
};

/// Supplementary pointwise comparison of the two curves at each grid
/// point supported by both.
struct PointwiseDelta {
  double oat = 0.0;
  double delta = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
};

struct BootstrapResult {
  Statistic statistic = Statistic::Energy;
  double stat_a = 0.0;
  double stat_b = 0.0;
  double delta = 0.0; // stat_b - stat_a
  double p_value = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t resamples = 0;
  Characteristic curve_a, curve_b;
  std::vector<HourDistribution> hours;
  std::vector<PointwiseDelta> pointwise;
  /// Sup-norm test of the whole curve difference over the common support.
  double curve_p_value = 1.0;
};

/// Percentile-bootstrap comparison of a day-level statistic between two
/// controllers. Hourly records are resampled with replacement within each
/// controller; the two-sided p-value is from the recentered bootstrap
/// distribution of the difference. Each resample draws from its own derived
/// seed, so the result does not depend on evaluation order.
BootstrapResult bootstrap_compare(std::span<const HourlyRecord> a, std::span<const HourlyRecord> b,
                                  Statistic statistic, const BootstrapOptions &opts = {});

struct ComparisonReport {
  BootstrapResult energy;
  BootstrapResult comfort;
  std::size_t hours_a = 0;
  std::size_t hours_b = 0;
};

ComparisonReport compare_controllers(std::span<const HourlyRecord> a,
                                     std::span<const HourlyRecord> b,
                                     const BootstrapOptions &opts = {});

} // namespace hvac
