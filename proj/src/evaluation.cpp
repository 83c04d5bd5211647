#include "hvac/evaluation.hpp"

#include "hvac/errors.hpp"
#include "hvac/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace hvac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Type-7 sample quantile of sorted data.
double quantile(const std::vector<double> &sorted, double prob) {
  if (sorted.empty())
    return kNaN;
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

double gaussian(double u) { return std::exp(-0.5 * u * u); }

} // namespace

double comfort_hour(const std::vector<std::vector<double>> &samples,
                    std::span<const double> setpoints, std::span<const double> bands) {
  const std::size_t zones = setpoints.size();
  if (zones == 0 || bands.size() != zones)
    throw ValidationError("comfort_hour: need one setpoint and band per zone");
  if (samples.empty())
    throw ValidationError("comfort_hour: no samples in the hour");
  double total = 0.0;
  for (std::size_t j = 0; j < zones; ++j) {
    double zone = 0.0;
    for (const auto &row : samples) {
      if (row.size() != zones)
        throw ValidationError("comfort_hour: sample row has the wrong zone count");
      zone += std::max(0.0, std::abs(row[j] - setpoints[j]) - bands[j]);
    }
    total += zone / static_cast<double>(samples.size());
  }
  return total / static_cast<double>(zones);
}

std::vector<HourlyRecord> aggregate_hourly(const TraceSet &trace, std::span<const double> bands,
                                           std::size_t day_offset) {
  trace.validate();
  if (bands.size() != trace.zones)
    throw ValidationError("aggregate_hourly: need one comfort band per zone");
  std::vector<HourlyRecord> out;
  if (trace.rows.empty())
    return out;
  using namespace std::chrono;
  const auto first_day = floor<days>(trace.rows.front().time);

  std::size_t i = 0;
  while (i < trace.rows.size()) {
    const auto hour_start = floor<hours>(trace.rows[i].time);
    std::size_t j = i;
    while (j < trace.rows.size() && floor<hours>(trace.rows[j].time) == hour_start)
      ++j;
    if (j - i == static_cast<std::size_t>(kSamplesPerHour)) {
      HourlyRecord rec;
      const auto day = floor<days>(hour_start);
      rec.hour = static_cast<std::size_t>((hour_start - day).count());
      rec.day = day_offset + static_cast<std::size_t>((day - first_day).count());
      rec.zone_temps.assign(trace.zones, 0.0);
      rec.setpoints = trace.rows[i].setpoints;
      std::vector<std::vector<double>> samples;
      for (std::size_t k = i; k < j; ++k) {
        const auto &r = trace.rows[k];
        rec.oat += r.oat;
        rec.energy += r.energy_kwh;
        std::vector<double> temps(trace.zones);
        for (std::size_t z = 0; z < trace.zones; ++z) {
          temps[z] = r.zones[z].temp;
          rec.zone_temps[z] += r.zones[z].temp;
        }
        samples.push_back(std::move(temps));
      }
      const double n = static_cast<double>(j - i);
      rec.oat /= n;
      for (auto &t : rec.zone_temps)
        t /= n;
      rec.comfort = comfort_hour(samples, rec.setpoints, bands);
      out.push_back(std::move(rec));
    }
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------

bool Characteristic::supported(std::size_t i) const {
  return counts[i] > 0 && std::isfinite(values[i]);
}

double Characteristic::operator()(double oat) const {
  if (grid.empty() || !(oat >= grid.front() - 1e-12) || !(oat <= grid.back() + 1e-12))
    return kNaN;
  if (grid.size() == 1)
    return values.front();
  auto it = std::upper_bound(grid.begin(), grid.end(), oat);
  std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()), grid.size() - 1);
  std::size_t lo = hi - 1;
  const double t = std::clamp((oat - grid[lo]) / (grid[hi] - grid[lo]), 0.0, 1.0);
  return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<double> make_grid(double lo, double hi, double spacing) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(spacing > 0.0) || lo > hi)
    throw ValidationError("make_grid: need finite lo <= hi and positive spacing");
  const double start = std::floor(lo / spacing) * spacing;
  const double stop = std::ceil(hi / spacing) * spacing;
  std::vector<double> g;
  for (long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * spacing;
    if (v > stop + 1e-9 * spacing)
      break;
    g.push_back(v);
  }
  return g;
}

Characteristic kernel_regression(std::span<const double> x, std::span<const double> y,
                                 double bandwidth, std::span<const double> grid) {
  if (x.empty())
    throw ValidationError("kernel_regression: no data points");
  if (x.size() != y.size())
    throw ValidationError("kernel_regression: x and y lengths differ");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ValidationError("kernel_regression: bandwidth must be positive");
  if (grid.empty())
    throw ValidationError("kernel_regression: empty grid");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ValidationError("kernel_regression: data must be finite");

  Characteristic c;
  c.bandwidth = bandwidth;
  c.grid.assign(grid.begin(), grid.end());
  c.values.assign(grid.size(), kNaN);
  c.counts.assign(grid.size(), 0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = (x[i] - grid[g]) / bandwidth;
      const double w = gaussian(u);
      num += w * y[i];
      den += w;
      if (std::abs(u) <= 1.0)
        ++c.counts[g];
    }
    if (den > 0.0)
      c.values[g] = num / den;
  }
  return c;
}

std::vector<double> day_weights(std::span<const double> grid,
                                std::span<const HourDistribution> hours) {
  if (grid.empty())
    throw ValidationError("day_weights: empty grid");
  std::vector<double> w(grid.size(), 0.0);
  const double tol = 1e-9;
  for (const auto &h : hours) {
    if (!(h.lo <= h.hi) || !std::isfinite(h.lo) || !std::isfinite(h.hi))
      throw ValidationError("hour distribution needs finite lo <= hi");
    if (h.lo < grid.front() - tol || h.hi > grid.back() + tol) {
      std::ostringstream oss;
      oss << "OAT distribution [" << h.lo << ", " << h.hi << "] leaves the curve's domain ["
          << grid.front() << ", " << grid.back() << "]";
      throw ValidationError(oss.str());
    }
    if (grid.size() == 1) {
      w[0] += 1.0;
      continue;
    }
    const double lo = std::clamp(h.lo, grid.front(), grid.back());
    const double hi = std::clamp(h.hi, grid.front(), grid.back());
    if (hi - lo <= 0.0) {
      // point mass
      std::size_t i = 0;
      while (i + 2 < grid.size() && lo > grid[i + 1])
        ++i;
      const double t = (lo - grid[i]) / (grid[i + 1] - grid[i]);
      w[i] += 1.0 - t;
      w[i + 1] += t;
      continue;
    }
    const double len = hi - lo;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double u = std::max(lo, grid[i]);
      const double v = std::min(hi, grid[i + 1]);
      if (v <= u)
        continue;
      const double step = grid[i + 1] - grid[i];
      const double right = grid[i + 1];
      const double left = grid[i];
      w[i] += ((right - u) * (right - u) - (right - v) * (right - v)) / (2.0 * step * len);
      w[i + 1] += ((v - left) * (v - left) - (u - left) * (u - left)) / (2.0 * step * len);
    }
  }
  return w;
}

double day_energy(const Characteristic &curve, std::span<const HourDistribution> hours,
                  bool require_support) {
  const auto w = day_weights(curve.grid, hours);
  double total = 0.0;
  for (std::size_t g = 0; g < w.size(); ++g) {
    if (w[g] == 0.0)
      continue;
    if ((require_support && !curve.supported(g)) || !std::isfinite(curve.values[g])) {
      std::ostringstream oss;
      oss << "OAT distribution reaches " << curve.grid[g]
          << " degF where the curve has no data support";
      throw ValidationError(oss.str());
    }
    total += w[g] * curve.values[g];
  }
  return total;
}

std::vector<HourDistribution> overlapping_hours(std::span<const HourlyRecord> a,
                                                std::span<const HourlyRecord> b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> alo(24, inf), ahi(24, -inf), blo(24, inf), bhi(24, -inf);
  for (const auto &r : a) {
    alo[r.hour % 24] = std::min(alo[r.hour % 24], r.oat);
    ahi[r.hour % 24] = std::max(ahi[r.hour % 24], r.oat);
  }
  for (const auto &r : b) {
    blo[r.hour % 24] = std::min(blo[r.hour % 24], r.oat);
    bhi[r.hour % 24] = std::max(bhi[r.hour % 24], r.oat);
  }
  std::vector<HourDistribution> out(24);
  for (std::size_t h = 0; h < 24; ++h) {
    out[h].lo = std::max(alo[h], blo[h]);
    out[h].hi = std::min(ahi[h], bhi[h]);
    if (!(out[h].lo <= out[h].hi)) {
      std::ostringstream oss;
      oss << "no overlapping OAT support between the two record sets at hour " << h;
      throw ValidationError(oss.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Kernel weights of every sample at every grid point, so a resample only
// needs multiplicities.
struct KernelTable {
  std::vector<double> k; // grid-major
  std::vector<double> y;
  std::size_t n = 0;
  std::size_t grid = 0;

  KernelTable(std::span<const double> xs, std::span<const double> ys,
              std::span<const double> g, double bandwidth)
      : y(ys.begin(), ys.end()), n(xs.size()), grid(g.size()) {
    k.resize(n * grid);
    for (std::size_t gi = 0; gi < grid; ++gi)
      for (std::size_t i = 0; i < n; ++i)
        k[gi * n + i] = gaussian((xs[i] - g[gi]) / bandwidth);
  }

  double value(std::size_t gi, std::span<const double> mult) const {
    double num = 0.0, den = 0.0;
    const double *row = &k[gi * n];
    for (std::size_t i = 0; i < n; ++i) {
      const double w = row[i] * mult[i];
      num += w * y[i];
      den += w;
    }
    return den > 0.0 ? num / den : kNaN;
  }
};

void draw_counts(std::mt19937_64 &rng, std::vector<double> &mult) {
  std::fill(mult.begin(), mult.end(), 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, mult.size() - 1);
  for (std::size_t i = 0; i < mult.size(); ++i)
    mult[pick(rng)] += 1.0;
}

} // namespace

BootstrapResult bootstrap_compare(std::span<const HourlyRecord> a, std::span<const HourlyRecord> b,
                                  Statistic statistic, const BootstrapOptions &opts) {
  if (a.empty() || b.empty())
    throw ValidationError("bootstrap_compare: both record sets must be non-empty");
  if (opts.resamples < 1000)
    throw ValidationError("bootstrap_compare: at least 1000 resamples are required");
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0))
    throw ValidationError("bootstrap_compare: confidence must lie in (0, 1)");

  BootstrapResult res;
  res.statistic = statistic;
  res.resamples = opts.resamples;
  res.hours = overlapping_hours(a, b);

  const auto extract = [statistic](std::span<const HourlyRecord> recs, std::vector<double> &x,
                                   std::vector<double> &y) {
    for (const auto &r : recs) {
      x.push_back(r.oat);
      y.push_back(statistic == Statistic::Energy ? r.energy : r.comfort);
    }
  };
  std::vector<double> xa, ya, xb, yb;
  extract(a, xa, ya);
  extract(b, xb, yb);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : xa) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : xb) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const auto grid = make_grid(lo, hi, opts.grid_spacing);
  res.curve_a = kernel_regression(xa, ya, opts.bandwidth, grid);
  res.curve_b = kernel_regression(xb, yb, opts.bandwidth, grid);
  try {
    res.stat_a = day_energy(res.curve_a, res.hours);
    res.stat_b = day_energy(res.curve_b, res.hours);
  } catch (const ValidationError &e) {
    throw ValidationError(std::string("insufficient overlapping OAT support: ") + e.what());
  }
  res.delta = res.stat_b - res.stat_a;

  const auto weights = day_weights(grid, res.hours);
  std::vector<std::size_t> needed;
  std::vector<std::size_t> common;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const bool both = res.curve_a.supported(g) && res.curve_b.supported(g);
    if (both)
      common.push_back(g);
    if (weights[g] != 0.0 || (opts.pointwise && both))
      needed.push_back(g);
  }

  const KernelTable ka(xa, ya, grid, opts.bandwidth);
  const KernelTable kb(xb, yb, grid, opts.bandwidth);
  std::vector<double> ma(xa.size()), mb(xb.size());
  std::vector<double> va(grid.size(), kNaN), vb(grid.size(), kNaN);

  std::vector<double> deltas;
  deltas.reserve(opts.resamples);
  std::vector<std::vector<double>> point_draws(opts.pointwise ? common.size() : 0);
  std::size_t exceed = 0;
  std::size_t sup_exceed = 0;

  double sup_obs = 0.0;
  for (std::size_t g : common)
    sup_obs = std::max(sup_obs, std::abs(res.curve_b.values[g] - res.curve_a.values[g]));

  for (std::size_t r = 0; r < opts.resamples; ++r) {
    std::mt19937_64 rng(derive_seed(opts.seed, r));
    draw_counts(rng, ma);
    draw_counts(rng, mb);
    for (std::size_t g : needed) {
      va[g] = ka.value(g, ma);
      vb[g] = kb.value(g, mb);
    }
    double sa = 0.0, sb = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (weights[g] == 0.0)
        continue;
      sa += weights[g] * va[g];
      sb += weights[g] * vb[g];
    }
    const double d = sb - sa;
    if (std::isfinite(d)) {
      deltas.push_back(d);
      if (std::abs(d - res.delta) >= std::abs(res.delta))
        ++exceed;
    }
    if (opts.pointwise) {
      double sup = 0.0;
      for (std::size_t c = 0; c < common.size(); ++c) {
        const std::size_t g = common[c];
        const double dv = vb[g] - va[g];
        point_draws[c].push_back(dv);
        const double obs = res.curve_b.values[g] - res.curve_a.values[g];
        if (std::isfinite(dv))
          sup = std::max(sup, std::abs(dv - obs));
      }
      if (sup >= sup_obs)
        ++sup_exceed;
    }
  }
  if (deltas.empty())
    throw NumericalError("bootstrap_compare: every resample produced an undefined statistic");

  const double n = static_cast<double>(deltas.size());
  res.p_value = (1.0 + static_cast<double>(exceed)) / (n + 1.0);
  std::sort(deltas.begin(), deltas.end());
  const double tail = 0.5 * (1.0 - opts.confidence);
  res.ci_lo = std::min(quantile(deltas, tail), res.delta);
  res.ci_hi = std::max(quantile(deltas, 1.0 - tail), res.delta);

  if (opts.pointwise) {
    res.curve_p_value = (1.0 + static_cast<double>(sup_exceed)) /
                        (static_cast<double>(opts.resamples) + 1.0);
    for (std::size_t c = 0; c < common.size(); ++c) {
      const std::size_t g = common[c];
      PointwiseDelta pd;
      pd.oat = grid[g];
      pd.delta = res.curve_b.values[g] - res.curve_a.values[g];
      auto draws = point_draws[c];
      draws.erase(std::remove_if(draws.begin(), draws.end(), [](double v) { return !std::isfinite(v); }),
                  draws.end());
      std::size_t ex = 0;
      for (double v : draws)
        if (std::abs(v - pd.delta) >= std::abs(pd.delta))
          ++ex;
      pd.p_value = (1.0 + static_cast<double>(ex)) / (static_cast<double>(draws.size()) + 1.0);
      std::sort(draws.begin(), draws.end());
      pd.ci_lo = std::min(quantile(draws, tail), pd.delta);
      pd.ci_hi = std::max(quantile(draws, 1.0 - tail), pd.delta);
      res.pointwise.push_back(pd);
    }
  }
  return res;
}

ComparisonReport compare_controllers(std::span<const HourlyRecord> a,
                                     std::span<const HourlyRecord> b,
                                     const BootstrapOptions &opts) {
  ComparisonReport rep;
  rep.hours_a = a.size();
  rep.hours_b = b.size();
  rep.energy = bootstrap_compare(a, b, Statistic::Energy, opts);
  BootstrapOptions copts = opts;
  copts.seed = derive_seed(opts.seed, 0xC0FFEE);
  rep.comfort = bootstrap_compare(a, b, Statistic::Comfort, copts);
  return rep;
}

} // namespace hvac
