#pragma once

#include "hvac/lbmpc.hpp"
#include "hvac/seed.hpp"
#include "hvac/sysid.hpp"
#include "hvac/thermal.hpp"
#include "hvac/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hvac {

inline constexpr std::size_t kStepsPerDay = 24 * kSamplesPerHour;

struct PiGains {
  double kp = 0.0;
  double ki = 0.0;
};

/// Time-of-day heating load in degF per step:
///   base + occupied (during occupied hours) + solar * max(0, cos(pi (h - solar_peak) / 12))
/// Occupancy and solar terms are multiplied by a per-day lognormal-ish
/// factor exp(day_sigma * z - day_sigma^2 / 2).
struct LoadProfile {
  double base = 0.0;
  double occupied = 0.0;
  double occupied_from = 8.0; // hours
  double occupied_to = 18.0;
  double solar = 0.0;
  double solar_peak = 14.0;
  double day_sigma = 0.0;

  double at(double hour, double day_factor) const;
};

/// Daily outside air temperature, either a cosine profile
///   mean + day_offset + amplitude * cos(2 pi (h - peak) / 24)
/// with day_offset ~ N(0, day_sigma), or explicit per-step samples.
struct OatProfile {
  double mean = 75.0;
  double amplitude = 10.0;
  double peak = 15.0;
  double day_sigma = 0.0;
  std::vector<double> samples; // when non-empty, wraps around per step

  double at(std::size_t step, double day_offset) const;
};

/// Conversion from the three energy proxies to kWh per step.
struct EnergyScale {
  double kappa1 = 1.0; // fan, (sum F)^3
  double kappa2 = 1.0; // chiller, (To - Ts)_+ sum F
  double kappa3 = 1.0; // reheat, sum R

  void validate() const;
  double step_energy(double total_flow, double total_reheat, double oat, double sat) const;
};

/// Ground-truth zone. a, b and c are given at the plant's anchor SATs and
/// interpolated linearly in between (held flat outside).
struct PlantZone {
  std::vector<double> a, b, c;
  double d = 0.0; // OAT coupling
  VavConfig vav;
  PiGains flow_pi;   // kp in flow-units per degF
  PiGains reheat_pi; // kp in % per degF
  LoadProfile load;
  double initial_offset = 0.0; // degF from setpoint at the start of a day
};

struct PlantConfig {
  std::vector<double> anchor_sats;
  std::vector<PlantZone> zones;
  OatProfile oat;
  EnergyScale energy;
  double noise_sigma = 0.05; // degF, measurement noise
  double sat_min = 50.0;
  double sat_max = 70.0;

  std::size_t zone_count() const { return zones.size(); }
  std::vector<VavConfig> vav_configs() const;
  void validate() const;

  /// Plant whose dynamics coincide with `model`: anchors at the model's
  /// SATs, constant load q, no OAT coupling, proportional-only VAV loops and
  /// no noise.
  static PlantConfig matching(const HybridModel &model, std::span<const VavConfig> cfgs);
};

struct PlantStep {
  std::size_t step = 0;
  double oat = 0.0;
  double sat = 0.0;
  std::vector<ZoneState> measured; // sample at `step`, before the SAT acted
  double energy_kwh = 0.0;
};

/// Mutable plant state for one simulated day.
class Plant {
public:
  Plant(PlantConfig cfg, std::uint64_t seed);

  std::size_t step_index() const { return step_; }
  /// Noisy zone temperatures with the VAV outputs they produced.
  const std::vector<ZoneState> &measurement() const { return measured_; }
  const std::vector<double> &true_temps() const { return temps_; }
  const std::vector<double> &flow_integrators() const { return int_flow_; }
  const std::vector<double> &reheat_integrators() const { return int_reheat_; }
  double oat(std::size_t step) const;
  double load(std::size_t zone, std::size_t step) const;
  const PlantConfig &config() const { return cfg_; }

  /// Applies `sat` over the current step and advances to the next sample.
  PlantStep step(double sat);

  /// Zone coefficients at an arbitrary SAT.
  double a_at(std::size_t zone, double sat) const;
  double b_at(std::size_t zone, double sat) const;
  double c_at(std::size_t zone, double sat) const;

private:
  void sense();

  PlantConfig cfg_;
  std::mt19937_64 rng_;
  std::size_t step_ = 0;
  double oat_offset_ = 0.0;
  std::vector<double> load_factor_;
  std::vector<double> temps_;
  std::vector<double> int_flow_, int_reheat_;
  std::vector<ZoneState> measured_;
};

struct DayOptions {
  std::size_t steps = kStepsPerDay;
  TimePoint start;              // midnight of the simulated day
  std::vector<double> mode_sats; // for the trace's mode column
};

/// Constant-SAT operation with the VAV PI loops doing all the work.
TraceSet default_controller(const PlantConfig &cfg, double sat, std::uint64_t seed,
                            const DayOptions &opts);

/// SAT-cycling identification experiment followed by constant `after_sat`.
TraceSet experiment_controller(const PlantConfig &cfg, const ExperimentSchedule &schedule,
                               double after_sat, std::uint64_t seed, const DayOptions &opts);

struct LbmpcDay {
  TraceSet trace;
  std::vector<Corrections> corrections; // after the update at each step
  /// Corrected-model temperature predicted for each step, from the step
  /// before (empty row at step 0).
  std::vector<std::vector<double>> predictions;
};

/// Receding-horizon LBMPC against the plant; the OAT forecast is the
/// plant's own profile.
LbmpcDay lbmpc_controller(const PlantConfig &cfg, const HybridModel &model,
                          std::span<const VavConfig> cfgs, const CostWeights &weights,
                          std::uint64_t seed, const DayOptions &opts, std::size_t horizon = 16,
                          const PlanOptions &plan_opts = {});

} // namespace hvac
