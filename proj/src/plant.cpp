#include "hvac/plant.hpp"

#include "hvac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hvac {

double LoadProfile::at(double hour, double day_factor) const {
  const double h = std::fmod(hour, 24.0);
  double varying = 0.0;
  if (h >= occupied_from && h < occupied_to)
    varying += occupied;
  varying += solar * std::max(0.0, std::cos(std::numbers::pi * (h - solar_peak) / 12.0));
  return base + day_factor * varying;
}

double OatProfile::at(std::size_t step, double day_offset) const {
  if (!samples.empty())
    return samples[step % samples.size()] + day_offset;
  const double h = static_cast<double>(step) / kSamplesPerHour;
  return mean + day_offset + amplitude * std::cos(2.0 * std::numbers::pi * (h - peak) / 24.0);
}

void EnergyScale::validate() const {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(kappa3 > 0.0) || !std::isfinite(kappa1) ||
      !std::isfinite(kappa2) || !std::isfinite(kappa3))
    throw ValidationError("energy scale constants must be positive and finite");
}

double EnergyScale::step_energy(double total_flow, double total_reheat, double oat,
                                double sat) const {
  // The chiller does not return energy when the outside air is colder than
  // the supply air.
  return kappa1 * total_flow * total_flow * total_flow +
         kappa2 * std::max(0.0, oat - sat) * total_flow + kappa3 * total_reheat;
}

std::vector<VavConfig> PlantConfig::vav_configs() const {
  std::vector<VavConfig> out;
  out.reserve(zones.size());
  for (const auto &z : zones)
    out.push_back(z.vav);
  return out;
}

void PlantConfig::validate() const {
  make_modes(anchor_sats, 1);
  if (zones.empty())
    throw ValidationError("plant needs at least one zone");
  const std::size_t n = anchor_sats.size();
  for (const auto &z : zones) {
    if (z.a.size() != n || z.b.size() != n || z.c.size() != n)
      throw ValidationError("plant zone coefficients need one value per anchor SAT");
    z.vav.validate();
    if (!(z.flow_pi.kp >= 0.0) || !(z.flow_pi.ki >= 0.0) || !(z.reheat_pi.kp >= 0.0) ||
        !(z.reheat_pi.ki >= 0.0))
      throw ValidationError("PI gains must be non-negative");
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(z.a[i]) || !std::isfinite(z.b[i]) || !std::isfinite(z.c[i]))
        throw ValidationError("plant zone coefficients must be finite");
  }
  if (!(noise_sigma >= 0.0))
    throw ValidationError("measurement noise must be non-negative");
  if (!(sat_min < sat_max))
    throw ValidationError("plant SAT range is empty");
  if (!(oat.day_sigma >= 0.0))
    throw ValidationError("OAT day-to-day spread must be non-negative");
  energy.validate();
}

PlantConfig PlantConfig::matching(const HybridModel &model, std::span<const VavConfig> cfgs) {
  model.validate();
  if (cfgs.size() != model.zone_count())
    throw ValidationError("one VAV config per model zone");
  PlantConfig pc;
  pc.anchor_sats = mode_sats(model.modes);
  for (std::size_t j = 0; j < model.zone_count(); ++j) {
    PlantZone z;
    z.a = model.zones[j].a;
    z.b = model.zones[j].b;
    z.c = model.zones[j].c;
    z.vav = cfgs[j];
    z.flow_pi = PiGains{cfgs[j].omega - cfgs[j].alpha, 0.0};
    z.reheat_pi = PiGains{100.0, 0.0};
    z.load.base = model.q[j];
    pc.zones.push_back(z);
  }
  pc.oat = OatProfile{75.0, 0.0, 15.0, 0.0, {}};
  pc.noise_sigma = 0.0;
  pc.sat_min = pc.anchor_sats.front() - 10.0;
  pc.sat_max = pc.anchor_sats.back() + 10.0;
  return pc;
}

// ---------------------------------------------------------------------------

Plant::Plant(PlantConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
  const std::size_t zones = cfg_.zone_count();
  std::normal_distribution<double> unit(0.0, 1.0);
  oat_offset_ = cfg_.oat.day_sigma * unit(rng_);
  load_factor_.resize(zones);
  for (std::size_t j = 0; j < zones; ++j) {
    const double s = cfg_.zones[j].load.day_sigma;
    load_factor_[j] = std::exp(s * unit(rng_) - 0.5 * s * s);
  }
  temps_.resize(zones);
  for (std::size_t j = 0; j < zones; ++j)
    temps_[j] = cfg_.zones[j].vav.setpoint + cfg_.zones[j].initial_offset;
  int_flow_.assign(zones, 0.0);
  int_reheat_.assign(zones, 0.0);
  measured_.resize(zones);
  sense();
}

double Plant::oat(std::size_t step) const { return cfg_.oat.at(step, oat_offset_); }

double Plant::load(std::size_t zone, std::size_t step) const {
  return cfg_.zones[zone].load.at(static_cast<double>(step) / kSamplesPerHour, load_factor_[zone]);
}

namespace {

double interpolate(const std::vector<double> &xs, const std::vector<double> &ys, double x) {
  if (x <= xs.front())
    return ys.front();
  if (x >= xs.back())
    return ys.back();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (x == xs[i])
      return ys[i];
    if (x < xs[i + 1]) {
      const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
      return ys[i] + t * (ys[i + 1] - ys[i]);
    }
  }
  return ys.back();
}

} // namespace

double Plant::a_at(std::size_t zone, double sat) const {
  return interpolate(cfg_.anchor_sats, cfg_.zones[zone].a, sat);
}
double Plant::b_at(std::size_t zone, double sat) const {
  return interpolate(cfg_.anchor_sats, cfg_.zones[zone].b, sat);
}
double Plant::c_at(std::size_t zone, double sat) const {
  return interpolate(cfg_.anchor_sats, cfg_.zones[zone].c, sat);
}

void Plant::sense() {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t j = 0; j < cfg_.zone_count(); ++j) {
    const PlantZone &z = cfg_.zones[j];
    double t = temps_[j];
    if (cfg_.noise_sigma > 0.0)
      t += cfg_.noise_sigma * noise(rng_);
    const double e = t - z.vav.setpoint;
    const double span = z.vav.omega - z.vav.alpha;
    int_flow_[j] = std::clamp(int_flow_[j] + z.flow_pi.ki * e, 0.0, span);
    int_reheat_[j] = std::clamp(int_reheat_[j] - z.reheat_pi.ki * e, 0.0, 100.0);
    const double p_flow = std::clamp(z.vav.alpha + z.flow_pi.kp * e, z.vav.alpha, z.vav.omega);
    const double p_reheat = std::clamp(-z.reheat_pi.kp * e, 0.0, 100.0);
    measured_[j].temp = t;
    measured_[j].flow = std::clamp(p_flow + int_flow_[j], z.vav.alpha, z.vav.omega);
    measured_[j].reheat = std::clamp(p_reheat + int_reheat_[j], 0.0, 100.0);
  }
}

PlantStep Plant::step(double sat) {
  if (!std::isfinite(sat) || sat < cfg_.sat_min || sat > cfg_.sat_max)
    throw ValidationError("SAT command outside the equipment range");
  PlantStep out;
  out.step = step_;
  out.oat = oat(step_);
  out.sat = sat;
  out.measured = measured_;

  double total_flow = 0.0, total_reheat = 0.0;
  for (const auto &m : measured_) {
    total_flow += m.flow;
    total_reheat += m.reheat;
  }
  out.energy_kwh = cfg_.energy.step_energy(total_flow, total_reheat, out.oat, sat);

  for (std::size_t j = 0; j < cfg_.zone_count(); ++j) {
    const PlantZone &z = cfg_.zones[j];
    const ZoneState &m = measured_[j];
    temps_[j] = a_at(j, sat) * temps_[j] + b_at(j, sat) * m.flow + c_at(j, sat) * m.reheat +
                z.d * out.oat + load(j, step_);
  }
  ++step_;
  sense();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

int mode_of(std::span<const double> sats, double sat) {
  for (std::size_t i = 0; i < sats.size(); ++i)
    if (sats[i] == sat)
      return static_cast<int>(i) + 1;
  return 0;
}

TraceRow make_row(const PlantConfig &cfg, const DayOptions &opts, const PlantStep &s) {
  TraceRow r;
  r.time = opts.start + std::chrono::minutes{kSampleMinutes * static_cast<long>(s.step)};
  r.oat = s.oat;
  r.sat = s.sat;
  r.mode = mode_of(opts.mode_sats, s.sat);
  r.zones = s.measured;
  r.setpoints.reserve(cfg.zone_count());
  for (const auto &z : cfg.zones)
    r.setpoints.push_back(z.vav.setpoint);
  r.energy_kwh = s.energy_kwh;
  return r;
}

} // namespace

TraceSet default_controller(const PlantConfig &cfg, double sat, std::uint64_t seed,
                            const DayOptions &opts) {
  Plant plant(cfg, seed);
  TraceSet trace;
  trace.zones = cfg.zone_count();
  trace.rows.reserve(opts.steps);
  for (std::size_t k = 0; k < opts.steps; ++k)
    trace.rows.push_back(make_row(cfg, opts, plant.step(sat)));
  return trace;
}

TraceSet experiment_controller(const PlantConfig &cfg, const ExperimentSchedule &schedule,
                               double after_sat, std::uint64_t seed, const DayOptions &opts) {
  Plant plant(cfg, seed);
  TraceSet trace;
  trace.zones = cfg.zone_count();
  trace.rows.reserve(opts.steps);
  for (std::size_t k = 0; k < opts.steps; ++k) {
    double sat = after_sat;
    for (const auto &b : schedule.blocks)
      if (k >= b.first_sample && k < b.first_sample + b.samples)
        sat = b.sat;
    trace.rows.push_back(make_row(cfg, opts, plant.step(sat)));
  }
  return trace;
}

LbmpcDay lbmpc_controller(const PlantConfig &cfg, const HybridModel &model,
                          std::span<const VavConfig> cfgs, const CostWeights &weights,
                          std::uint64_t seed, const DayOptions &opts, std::size_t horizon,
                          const PlanOptions &plan_opts) {
  Plant plant(cfg, seed);
  LbmpcController ctl(model, std::vector<VavConfig>(cfgs.begin(), cfgs.end()), weights, horizon,
                      plan_opts);
  DayOptions row_opts = opts;
  if (row_opts.mode_sats.empty())
    row_opts.mode_sats = mode_sats(model.modes);
  LbmpcDay day;
  day.trace.zones = cfg.zone_count();
  std::vector<double> forecast(horizon);
  for (std::size_t k = 0; k < opts.steps; ++k) {
    day.predictions.push_back(k == 0 ? std::vector<double>{} : ctl.state().last_prediction);
    for (std::size_t i = 0; i < horizon; ++i)
      forecast[i] = plant.oat(k + i);
    const PlanResult res = ctl.step(k, plant.measurement(), forecast);
    day.corrections.push_back(ctl.state().corrections);
    day.trace.rows.push_back(make_row(cfg, row_opts, plant.step(res.first_sat)));
  }
  return day;
}

} // namespace hvac
