#include "hvac/thermal.hpp"

#include "hvac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvac {

std::vector<Mode> make_modes(std::span<const double> sats, std::size_t min_count) {
  if (sats.size() < min_count) {
    std::ostringstream oss;
    oss << "mode set needs at least " << min_count << " SAT values, got " << sats.size();
    throw ValidationError(oss.str());
  }
  std::vector<Mode> modes;
  modes.reserve(sats.size());
  for (std::size_t i = 0; i < sats.size(); ++i) {
    if (!std::isfinite(sats[i]))
      throw ValidationError("mode SAT values must be finite");
    if (i > 0 && !(sats[i] > sats[i - 1]))
      throw ValidationError("mode SAT values must be strictly increasing");
    modes.push_back(Mode{static_cast<int>(i) + 1, sats[i]});
  }
  return modes;
}

std::vector<double> mode_sats(std::span<const Mode> modes) {
  std::vector<double> out;
  out.reserve(modes.size());
  for (const auto &m : modes)
    out.push_back(m.sat);
  return out;
}

void check_coeffs(const ZoneCoeffs &coeffs, std::span<const Mode> modes,
                  const CoeffConstraints &cons, double slack) {
  const std::size_t p = modes.size();
  if (coeffs.a.size() != p || coeffs.b.size() != p || coeffs.c.size() != p)
    throw ValidationError("zone coefficients must have one entry per mode");
  for (std::size_t m = 0; m < p; ++m) {
    if (!std::isfinite(coeffs.a[m]) || !std::isfinite(coeffs.b[m]) || !std::isfinite(coeffs.c[m]))
      throw ValidationError("zone coefficients must be finite");
    if (std::abs(coeffs.a[m] - coeffs.a[0]) > slack)
      throw ValidationError("coefficient a must be identical across modes");
    if (std::abs(coeffs.c[m] - coeffs.c[0]) > slack)
      throw ValidationError("coefficient c must be identical across modes");
    if (coeffs.a[m] < cons.a_min - slack || coeffs.a[m] > cons.a_max + slack)
      throw ValidationError("coefficient a must lie in (0, 1]");
  }
  for (std::size_t r = 0; r + 1 < p; ++r) {
    const double ratio = modes[r + 1].sat / modes[r].sat;
    const double bound = ratio * coeffs.b[r];
    const bool ok = cons.order == GainOrder::Verbatim
                        ? coeffs.b[r + 1] <= bound - cons.epsilon + slack
                        : coeffs.b[r + 1] >= bound + cons.epsilon - slack;
    if (!ok) {
      std::ostringstream oss;
      oss << "airflow gain ordering violated between modes " << r + 1 << " and " << r + 2;
      throw ValidationError(oss.str());
    }
  }
}

void HybridModel::validate() const {
  if (modes.size() < 2)
    throw ValidationError("hybrid model needs at least two modes");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].index != static_cast<int>(i) + 1)
      throw ValidationError("mode indices must be 1..p in order");
    if (i > 0 && !(modes[i].sat > modes[i - 1].sat))
      throw ValidationError("mode SAT values must be strictly increasing");
  }
  if (zones.empty())
    throw ValidationError("hybrid model needs at least one zone");
  if (q.size() != zones.size())
    throw ValidationError("heating load must have one entry per zone");
  for (const auto &z : zones)
    if (z.mode_count() != modes.size() || z.b.size() != modes.size() || z.c.size() != modes.size())
      throw ValidationError("zone coefficients must have one entry per mode");
}

void VavConfig::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(omega) || !std::isfinite(setpoint) ||
      !std::isfinite(band))
    throw ValidationError("VAV configuration must be finite");
  if (!(alpha >= 0.0 && alpha < omega))
    throw ValidationError("VAV airflow limits must satisfy 0 <= alpha < omega");
  if (!(band >= 0.0))
    throw ValidationError("comfort band must be non-negative");
}

double reheat_control(double error) {
  if (!std::isfinite(error))
    throw ValidationError("temperature error must be finite");
  if (error < -1.0)
    return 100.0;
  if (error < 0.0)
    return -100.0 * error;
  return 0.0;
}

double flow_control(double error, const VavConfig &cfg) {
  if (!std::isfinite(error))
    throw ValidationError("temperature error must be finite");
  cfg.validate();
  if (error < 0.0)
    return cfg.alpha;
  if (error < 1.0)
    return (cfg.omega - cfg.alpha) * error + cfg.alpha;
  return cfg.omega;
}

ZoneState vav_state(double temp, const VavConfig &cfg) {
  const double e = temp - cfg.setpoint;
  return ZoneState{temp, flow_control(e, cfg), reheat_control(e)};
}

double step_zone(const ZoneState &state, const ZoneCoeffs &coeffs, const Mode &mode, double q) {
  if (mode.index < 1 || static_cast<std::size_t>(mode.index) > coeffs.mode_count() ||
      coeffs.b.size() != coeffs.a.size() || coeffs.c.size() != coeffs.a.size())
    throw ValidationError("mode index out of range for zone coefficients");
  const auto m = static_cast<std::size_t>(mode.index - 1);
  return coeffs.a[m] * state.temp + coeffs.b[m] * state.flow + coeffs.c[m] * state.reheat + q;
}

Trajectory simulate_closed_loop(const HybridModel &model, std::span<const VavConfig> cfgs,
                                std::span<const double> init_temps, std::span<const int> mode_seq,
                                const std::vector<std::vector<double>> &q_trace,
                                std::size_t steps) {
  model.validate();
  const std::size_t zones = model.zone_count();
  if (cfgs.size() != zones || init_temps.size() != zones)
    throw ValidationError("simulate_closed_loop: one VAV config and initial temperature per zone");
  if (mode_seq.size() < steps)
    throw ValidationError("simulate_closed_loop: mode sequence shorter than the horizon");
  if (q_trace.size() < steps)
    throw ValidationError("simulate_closed_loop: heating-load trace shorter than the horizon");
  for (std::size_t k = 0; k < steps; ++k)
    if (q_trace[k].size() != zones)
      throw ValidationError("simulate_closed_loop: heating-load row must have one value per zone");

  Trajectory traj;
  traj.reserve(steps + 1);
  ZoneStates row(zones);
  for (std::size_t j = 0; j < zones; ++j)
    row[j] = vav_state(init_temps[j], cfgs[j]);
  traj.push_back(row);

  for (std::size_t k = 0; k < steps; ++k) {
    const int idx = mode_seq[k];
    if (idx < 1 || static_cast<std::size_t>(idx) > model.mode_count())
      throw ValidationError("simulate_closed_loop: mode index out of range");
    const Mode &mode = model.modes[static_cast<std::size_t>(idx - 1)];
    ZoneStates next(zones);
    for (std::size_t j = 0; j < zones; ++j) {
      const double t = step_zone(traj.back()[j], model.zones[j], mode, q_trace[k][j]);
      next[j] = vav_state(t, cfgs[j]);
    }
    traj.push_back(std::move(next));
  }
  return traj;
}

Trajectory simulate_closed_loop(const HybridModel &model, std::span<const VavConfig> cfgs,
                                std::span<const double> init_temps, std::span<const int> mode_seq,
                                std::size_t steps) {
  std::vector<std::vector<double>> q_trace(steps, model.q);
  return simulate_closed_loop(model, cfgs, init_temps, mode_seq, q_trace, steps);
}

} // namespace hvac
