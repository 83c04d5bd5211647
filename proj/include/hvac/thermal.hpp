#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hvac {

/// Minutes between samples. Every model in this library is discrete-time at
/// this rate.
inline constexpr int kSampleMinutes = 15;
inline constexpr int kSamplesPerHour = 60 / kSampleMinutes;

/// One element of the finite supply-air-temperature set. `index` is 1-based.
struct Mode {
  int index = 1;
  double sat = 0.0; // degF
};

/// Builds the mode list for the given SATs (index i+1 for sats[i]) and checks
/// that the SATs are finite and strictly increasing. `min_count` is 2 for a
/// hybrid model; identification and scheduling accept a single mode.
std::vector<Mode> make_modes(std::span<const double> sats, std::size_t min_count = 2);

std::vector<double> mode_sats(std::span<const Mode> modes);

/// Per-zone linear coefficients, one entry per mode.
///   T[k+1] = a[m] T[k] + b[m] F[k] + c[m] R[k] + q
struct ZoneCoeffs {
  std::vector<double> a;
  std::vector<double> b; // degF per flow-unit
  std::vector<double> c; // degF per reheat-%

  std::size_t mode_count() const { return a.size(); }
};

/// Direction of the cross-mode airflow-gain ordering.
///   Verbatim: b[r+1] <= (Ts[r+1]/Ts[r]) b[r] - eps
///   Flipped:  b[r+1] >= (Ts[r+1]/Ts[r]) b[r] + eps
enum class GainOrder { Verbatim, Flipped };

/// Tolerances used when checking an identified ZoneCoeffs against its
/// structural constraints.
struct CoeffConstraints {
  double epsilon = 1e-6;
  GainOrder order = GainOrder::Verbatim;
  double a_min = 1e-6; // lower bound standing in for the strict a > 0
  double a_max = 1.0;
};

/// Throws ValidationError if `coeffs` breaks any structural constraint
/// (shared a, shared c, ordered b, 0 < a <= 1). `slack` absorbs solver
/// round-off.
void check_coeffs(const ZoneCoeffs &coeffs, std::span<const Mode> modes,
                  const CoeffConstraints &cons, double slack = 1e-8);

/// The identified plant model: modes, per-zone coefficients and per-zone
/// heating load (degF per step).
struct HybridModel {
  std::vector<Mode> modes;
  std::vector<ZoneCoeffs> zones;
  std::vector<double> q;

  std::size_t zone_count() const { return zones.size(); }
  std::size_t mode_count() const { return modes.size(); }
  void validate() const;
};

struct VavConfig {
  double alpha = 0.0;    // minimum airflow
  double omega = 1.0;    // maximum airflow
  double setpoint = 72.0;
  double band = 1.0;     // comfort band, degF

  void validate() const;
};

struct ZoneState {
  double temp = 0.0;
  double flow = 0.0;
  double reheat = 0.0;
};

/// Proportional reheat law of a VAV box: 100 % below -1 degF error, linear
/// ramp -100 e in [-1, 0), zero at or above setpoint.
double reheat_control(double error);

/// Proportional airflow law of a VAV box: alpha below setpoint, linear ramp
/// (omega - alpha) e + alpha in [0, 1), omega at or above +1 degF.
double flow_control(double error, const VavConfig &cfg);

/// VAV state for a zone whose temperature is `temp`.
ZoneState vav_state(double temp, const VavConfig &cfg);

/// One step of the mode-`mode` linear zone dynamics.
double step_zone(const ZoneState &state, const ZoneCoeffs &coeffs, const Mode &mode, double q);

/// Rows indexed by step, columns by zone.
using ZoneStates = std::vector<ZoneState>;
using Trajectory = std::vector<ZoneStates>;

/// Runs the model forward under the fixed mode schedule `mode_seq` (1-based
/// indices, one per step) with the per-step heating load `q_trace[k][zone]`.
/// Flow and reheat at each step come from the VAV laws at the current error.
/// Returns steps + 1 rows; row 0 holds the initial temperatures.
Trajectory simulate_closed_loop(const HybridModel &model, std::span<const VavConfig> cfgs,
                                std::span<const double> init_temps, std::span<const int> mode_seq,
                                const std::vector<std::vector<double>> &q_trace, std::size_t steps);

/// Same, with the model's own constant heating load at every step.
Trajectory simulate_closed_loop(const HybridModel &model, std::span<const VavConfig> cfgs,
                                std::span<const double> init_temps, std::span<const int> mode_seq,
                                std::size_t steps);

} // namespace hvac
