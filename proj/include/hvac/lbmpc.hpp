#pragma once

#include "hvac/thermal.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hvac {

/// One-step learning offsets per zone: heating load (degF/step), airflow and
/// reheat. They are held constant over the planning horizon.
struct Corrections {
  std::vector<double> q_hat;
  std::vector<double> f_hat;
  std::vector<double> r_hat;

  static Corrections zeros(std::size_t zones);
  std::size_t zone_count() const { return q_hat.size(); }
  void validate(std::size_t zones) const;
};

struct CostWeights {
  double lambda = 0.0; // fan, (sum F)^3
  double mu = 0.0;     // chiller, (To - Ts) sum F
  double gamma = 0.0;  // reheat, sum R

  void validate() const;
  /// lambda = 6.7e4 / (sum alpha)^3, mu = 1.3e-3, gamma = 6.7.
  static CostWeights tuned(std::span<const VavConfig> cfgs);
};

/// Measured minus predicted, zone by zone.
Corrections update_corrections(std::span<const ZoneState> measured,
                               std::span<const ZoneState> predicted);

/// The nominal model's prediction of the zone states one step after
/// `previous` under `mode`. Temperature comes from the linear dynamics driven
/// by the measured airflow and reheat; airflow and reheat come from the VAV
/// laws at the newly measured temperatures, so their corrections isolate
/// the unmodeled integrator terms.
std::vector<ZoneState> one_step_prediction(const HybridModel &model,
                                           std::span<const VavConfig> cfgs,
                                           std::span<const ZoneState> previous, const Mode &mode,
                                           std::span<const double> measured_temps);

/// Tracking plus weighted energy proxies for one step of the horizon.
double stage_cost(std::span<const double> next_temps, std::span<const double> flows,
                  std::span<const double> reheats, double oat, double sat,
                  std::span<const double> setpoints, const CostWeights &w);

/// Mode held over consecutive blocks. `lengths[i]` steps use `blocks[i]`.
struct ModeSequence {
  std::vector<int> blocks;
  std::vector<std::size_t> lengths;

  std::size_t horizon() const;
  /// One 1-based mode index per step.
  std::vector<int> steps() const;
  bool operator==(const ModeSequence &) const = default;
};

/// How a horizon is cut into hold blocks. The first block may be shorter
/// when planning starts part-way through an hour.
struct SequenceLayout {
  std::size_t horizon = 16;
  std::size_t block = kSamplesPerHour;
  std::size_t first_block = kSamplesPerHour;

  std::vector<std::size_t> lengths() const;
};

/// All sequences over `modes` modes, in lexicographic order of block modes.
/// With `fixed_first` set, the first block is pinned to that mode.
std::vector<ModeSequence> enumerate_sequences(std::size_t modes, const SequenceLayout &layout,
                                              std::optional<int> fixed_first = std::nullopt);
std::vector<ModeSequence> enumerate_sequences(std::size_t modes, std::size_t horizon,
                                              std::size_t block = kSamplesPerHour);

struct PlanOptions {
  double temp_min = 66.0;
  double temp_max = 78.0;
  /// Multiplier on F-tilde's upper clamp, omega * (1 + margin).
  double flow_margin = 0.10;
};

struct Rollout {
  Trajectory nominal;   // model without corrections; checked against limits
  Trajectory corrected; // learned model; drives the cost
  double cost = 0.0;
  bool feasible = true;
  double violation = 0.0; // summed degF excursions of the nominal path
};

/// Simulates `seq` from the measured temperatures. Step i uses oat[i] and
/// the SAT of seq's i-th mode.
Rollout rollout_sequence(const HybridModel &model, std::span<const VavConfig> cfgs,
                         const Corrections &corr, std::span<const double> temps,
                         const ModeSequence &seq, std::span<const double> oat,
                         const CostWeights &w, const PlanOptions &opts = {});

struct SequenceCost {
  ModeSequence sequence;
  double cost = 0.0;
  bool feasible = true;
  double violation = 0.0;
};

struct PlanResult {
  ModeSequence best;
  double cost = 0.0;
  std::vector<SequenceCost> table;
  std::size_t best_index = 0;
  int first_mode = 1;
  double first_sat = 0.0;
  bool feasible = true;
};

/// Exhaustive search over every sequence of `layout`. Returns the cheapest
/// feasible sequence, ties going to the earliest in enumeration order; when
/// none is feasible, the one with the least violation (then cost).
PlanResult plan(const HybridModel &model, std::span<const VavConfig> cfgs,
                const Corrections &corr, std::span<const double> temps,
                std::span<const double> oat, const CostWeights &w, const SequenceLayout &layout,
                std::optional<int> fixed_first = std::nullopt, const PlanOptions &opts = {});

/// Planner state that must survive a restart.
struct PlannerState {
  Corrections corrections;
  std::optional<std::vector<ZoneState>> last_measured;
  int last_mode = 0;       // 0 before the first command
  std::size_t last_step = 0;
  /// Corrected-model temperatures predicted for the next sample.
  std::vector<double> last_prediction;
};

/// Receding-horizon controller: every 15 minutes it updates the corrections
/// from the newest measurement, plans, and returns the first mode. Blocks are
/// aligned to clock hours, so the SAT changes at most once per hour.
class LbmpcController {
public:
  LbmpcController(HybridModel model, std::vector<VavConfig> cfgs, CostWeights weights,
                  std::size_t horizon = 16, PlanOptions opts = {});

  /// `step` counts samples from midnight. `oat` must cover the horizon.
  PlanResult step(std::size_t step, std::span<const ZoneState> measured,
                  std::span<const double> oat);

  const PlannerState &state() const { return state_; }
  void restore(PlannerState state);
  const HybridModel &model() const { return model_; }
  std::size_t horizon() const { return horizon_; }

private:
  HybridModel model_;
  std::vector<VavConfig> cfgs_;
  CostWeights weights_;
  std::size_t horizon_;
  PlanOptions opts_;
  PlannerState state_;
};

} // namespace hvac
