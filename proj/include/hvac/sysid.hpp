#pragma once

#include "hvac/qp.hpp"
#include "hvac/thermal.hpp"

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hvac {

// ---------------------------------------------------------------------------
// Experiment schedule

struct ScheduleBlock {
  int mode = 1;
  double sat = 0.0;
  std::chrono::minutes start{0}; // since midnight
  std::chrono::minutes end{0};
  std::size_t first_sample = 0;  // sample index relative to midnight
  std::size_t samples = 0;
};

struct SatCommand {
  std::chrono::minutes time{0};
  int mode = 1;
  double sat = 0.0;
};

/// A transition window for one mode: transitions k -> k+1 for
/// first <= k < last. Consecutive windows may share their boundary sample.
struct ModeWindow {
  int mode = 1;
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t transitions() const { return last - first; }
};

struct ExperimentSchedule {
  std::vector<ScheduleBlock> blocks;

  /// One command per 15-minute sample across all blocks.
  std::vector<SatCommand> commands() const;
  /// Identification windows, one per block, offset so that sample 0 is the
  /// first sample of the first block.
  std::vector<ModeWindow> windows() const;
  std::size_t total_samples() const;
};

/// SAT-cycling experiment: one contiguous block per mode in ascending SAT
/// order, each `dwell` long, starting `start` after midnight.
ExperimentSchedule experiment_schedule(std::span<const double> sats,
                                       std::chrono::minutes dwell = std::chrono::minutes{120},
                                       std::chrono::minutes start = std::chrono::minutes{0});

// ---------------------------------------------------------------------------
// Bayesian constrained least squares

/// Gaussian priors, one (mean, variance) pair per mode for each coefficient.
struct Prior {
  std::vector<double> a_mean, a_var;
  std::vector<double> b_mean, b_var;
  std::vector<double> c_mean, c_var;

  std::size_t mode_count() const { return a_mean.size(); }
  void validate(std::size_t modes) const;

  /// Same prior for every mode except b, which has per-mode means.
  static Prior shared(std::size_t modes, double a_mean, double a_var, std::vector<double> b_mean,
                      double b_var, double c_mean, double c_var);
  /// Weakly informative defaults that satisfy the b ordering for `order`.
  static Prior defaults(std::span<const double> sats, GainOrder order = GainOrder::Verbatim);
};

struct ModeData {
  ModeWindow window;
  std::vector<ZoneState> samples; // window.transitions() + 1 samples
};

/// One zone's identification problem.
struct IdProblem {
  std::vector<double> sats;
  Prior prior;
  std::vector<ModeData> data;
  CoeffConstraints constraints;

  std::size_t mode_count() const { return sats.size(); }
  void validate() const;
};

/// Slices `series` (one zone, sample 0 = first experiment sample) into the
/// per-mode windows.
IdProblem make_id_problem(std::vector<double> sats, Prior prior,
                          std::span<const ZoneState> series, std::span<const ModeWindow> windows,
                          CoeffConstraints constraints = {});

/// The identification QP over x = (a^1..a^p, b^1..b^p, c^1..c^p, q). The
/// heating load enters as a single shared variable; equality rows tie the a
/// and c entries together; inequality rows carry the b ordering and the
/// 0 < a <= 1 box.
struct IdQp {
  QuadraticProgram qp;
  std::size_t modes = 0;
  std::size_t transitions = 0;
  /// Degrees of freedom left after the equality rows.
  std::size_t free_variables = 0;
  /// Condition number of the data Gram matrix over the free variables.
  double data_condition = 0.0;
  bool ill_conditioned = false;

  Eigen::Index a_index(std::size_t m) const { return static_cast<Eigen::Index>(m); }
  Eigen::Index b_index(std::size_t m) const { return static_cast<Eigen::Index>(modes + m); }
  Eigen::Index c_index(std::size_t m) const { return static_cast<Eigen::Index>(2 * modes + m); }
  Eigen::Index q_index() const { return static_cast<Eigen::Index>(3 * modes); }
};

IdQp build_qp(const IdProblem &problem);

struct IdResult {
  ZoneCoeffs coeffs;
  double q = 0.0;
  double objective = 0.0;   // full Bayesian objective at the optimum
  double residual_ss = 0.0; // data term only
  std::size_t transitions = 0;
  bool ill_conditioned = false;
};

IdResult identify_zone(const IdProblem &problem, const QpOptions &opts = {});

/// Identifies independent zones concurrently; results are in input order.
std::vector<IdResult> identify_zones(std::span<const IdProblem> problems,
                                     const QpOptions &opts = {});

} // namespace hvac
