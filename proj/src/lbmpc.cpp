#include "hvac/lbmpc.hpp"

#include "hvac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvac {

Corrections Corrections::zeros(std::size_t zones) {
  return Corrections{std::vector<double>(zones, 0.0), std::vector<double>(zones, 0.0),
                     std::vector<double>(zones, 0.0)};
}

void Corrections::validate(std::size_t zones) const {
  if (q_hat.size() != zones || f_hat.size() != zones || r_hat.size() != zones)
    throw ValidationError("corrections must have one entry per zone");
  for (std::size_t j = 0; j < zones; ++j)
    if (!std::isfinite(q_hat[j]) || !std::isfinite(f_hat[j]) || !std::isfinite(r_hat[j]))
      throw ValidationError("corrections must be finite");
}

void CostWeights::validate() const {
  if (!(lambda >= 0.0) || !(mu >= 0.0) || !(gamma >= 0.0) || !std::isfinite(lambda) ||
      !std::isfinite(mu) || !std::isfinite(gamma))
    throw ValidationError("cost weights must be finite and non-negative");
}

CostWeights CostWeights::tuned(std::span<const VavConfig> cfgs) {
  double total_alpha = 0.0;
  for (const auto &c : cfgs)
    total_alpha += c.alpha;
  if (!(total_alpha > 0.0))
    throw ValidationError("automatic fan weight needs a positive total minimum airflow");
  return CostWeights{6.7e4 / (total_alpha * total_alpha * total_alpha), 1.3e-3, 6.7};
}

Corrections update_corrections(std::span<const ZoneState> measured,
                               std::span<const ZoneState> predicted) {
  if (measured.size() != predicted.size())
    throw ValidationError("update_corrections: measured and predicted zone counts differ");
  Corrections c = Corrections::zeros(measured.size());
  for (std::size_t j = 0; j < measured.size(); ++j) {
    c.q_hat[j] = measured[j].temp - predicted[j].temp;
    c.f_hat[j] = measured[j].flow - predicted[j].flow;
    c.r_hat[j] = measured[j].reheat - predicted[j].reheat;
  }
  c.validate(measured.size());
  return c;
}

std::vector<ZoneState> one_step_prediction(const HybridModel &model,
                                           std::span<const VavConfig> cfgs,
                                           std::span<const ZoneState> previous, const Mode &mode,
                                           std::span<const double> measured_temps) {
  const std::size_t zones = model.zone_count();
  if (cfgs.size() != zones || previous.size() != zones || measured_temps.size() != zones)
    throw ValidationError("one_step_prediction: zone counts differ");
  std::vector<ZoneState> out(zones);
  for (std::size_t j = 0; j < zones; ++j) {
    const double e = measured_temps[j] - cfgs[j].setpoint;
    out[j].temp = step_zone(previous[j], model.zones[j], mode, model.q[j]);
    out[j].flow = flow_control(e, cfgs[j]);
    out[j].reheat = reheat_control(e);
  }
  return out;
}

double stage_cost(std::span<const double> next_temps, std::span<const double> flows,
                  std::span<const double> reheats, double oat, double sat,
                  std::span<const double> setpoints, const CostWeights &w) {
  const std::size_t zones = next_temps.size();
  if (flows.size() != zones || reheats.size() != zones || setpoints.size() != zones)
    throw ValidationError("stage_cost: inconsistent zone counts");
  double tracking = 0.0, flow = 0.0, reheat = 0.0;
  for (std::size_t j = 0; j < zones; ++j) {
    const double dev = next_temps[j] - setpoints[j];
    tracking += dev * dev;
    flow += flows[j];
    reheat += reheats[j];
  }
  return tracking + w.lambda * flow * flow * flow + w.gamma * reheat + w.mu * (oat - sat) * flow;
}

// ---------------------------------------------------------------------------

std::size_t ModeSequence::horizon() const {
  std::size_t n = 0;
  for (auto l : lengths)
    n += l;
  return n;
}

std::vector<int> ModeSequence::steps() const {
  std::vector<int> out;
  out.reserve(horizon());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    out.insert(out.end(), lengths[b], blocks[b]);
  return out;
}

std::vector<std::size_t> SequenceLayout::lengths() const {
  if (block == 0 || first_block == 0)
    throw ValidationError("sequence blocks must be at least one step long");
  std::vector<std::size_t> out;
  std::size_t left = horizon;
  std::size_t len = std::min(first_block, left);
  while (left > 0) {
    out.push_back(len);
    left -= len;
    len = std::min(block, left);
  }
  return out;
}

std::vector<ModeSequence> enumerate_sequences(std::size_t modes, const SequenceLayout &layout,
                                              std::optional<int> fixed_first) {
  if (modes == 0)
    throw ValidationError("enumerate_sequences: need at least one mode");
  if (fixed_first && (*fixed_first < 1 || static_cast<std::size_t>(*fixed_first) > modes))
    throw ValidationError("enumerate_sequences: pinned first mode out of range");
  const auto lengths = layout.lengths();
  const std::size_t nblocks = lengths.size();
  const std::size_t free_from = fixed_first ? 1 : 0;

  std::size_t count = 1;
  for (std::size_t b = free_from; b < nblocks; ++b)
    count *= modes;

  std::vector<ModeSequence> out;
  out.reserve(count);
  std::vector<int> digits(nblocks, 1);
  if (fixed_first && nblocks > 0)
    digits[0] = *fixed_first;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(ModeSequence{digits, lengths});
    // Odometer increment, last block fastest.
    for (std::size_t b = nblocks; b-- > free_from;) {
      if (static_cast<std::size_t>(digits[b]) < modes) {
        ++digits[b];
        break;
      }
      digits[b] = 1;
    }
  }
  return out;
}

std::vector<ModeSequence> enumerate_sequences(std::size_t modes, std::size_t horizon,
                                              std::size_t block) {
  return enumerate_sequences(modes, SequenceLayout{horizon, block, block});
}

Rollout rollout_sequence(const HybridModel &model, std::span<const VavConfig> cfgs,
                         const Corrections &corr, std::span<const double> temps,
                         const ModeSequence &seq, std::span<const double> oat,
                         const CostWeights &w, const PlanOptions &opts) {
  const std::size_t zones = model.zone_count();
  const std::size_t horizon = seq.horizon();
  if (cfgs.size() != zones || temps.size() != zones)
    throw ValidationError("rollout_sequence: zone counts differ");
  corr.validate(zones);
  if (oat.size() < horizon)
    throw ValidationError("rollout_sequence: OAT forecast shorter than the horizon");

  const auto modes = seq.steps();
  for (int m : modes)
    if (m < 1 || static_cast<std::size_t>(m) > model.mode_count())
      throw ValidationError("rollout_sequence: mode index out of range");

  Rollout out;
  out.nominal.reserve(horizon + 1);
  out.corrected.reserve(horizon + 1);

  ZoneStates nominal(zones), corrected(zones);
  std::vector<double> setpoints(zones);
  for (std::size_t j = 0; j < zones; ++j) {
    setpoints[j] = cfgs[j].setpoint;
    nominal[j] = vav_state(temps[j], cfgs[j]);
  }
  const auto correct = [&](double temp, std::size_t j) {
    ZoneState s = vav_state(temp, cfgs[j]);
    s.flow = std::clamp(s.flow + corr.f_hat[j], 0.0, cfgs[j].omega * (1.0 + opts.flow_margin));
    s.reheat = std::clamp(s.reheat + corr.r_hat[j], 0.0, 100.0);
    return s;
  };
  for (std::size_t j = 0; j < zones; ++j)
    corrected[j] = correct(temps[j], j);
  out.nominal.push_back(nominal);
  out.corrected.push_back(corrected);

  std::vector<double> next_t(zones), flows(zones), reheats(zones);
  for (std::size_t i = 0; i < horizon; ++i) {
    const Mode &mode = model.modes[static_cast<std::size_t>(modes[i] - 1)];
    ZoneStates nom_next(zones), cor_next(zones);
    for (std::size_t j = 0; j < zones; ++j) {
      const double tn = step_zone(nominal[j], model.zones[j], mode, model.q[j]);
      nom_next[j] = vav_state(tn, cfgs[j]);
      if (tn < opts.temp_min)
        out.violation += opts.temp_min - tn;
      else if (tn > opts.temp_max)
        out.violation += tn - opts.temp_max;

      const double tc = step_zone(corrected[j], model.zones[j], mode, model.q[j] + corr.q_hat[j]);
      cor_next[j] = correct(tc, j);
      next_t[j] = tc;
      flows[j] = corrected[j].flow;
      reheats[j] = corrected[j].reheat;
    }
    out.cost += stage_cost(next_t, flows, reheats, oat[i], mode.sat, setpoints, w);
    nominal = std::move(nom_next);
    corrected = std::move(cor_next);
    out.nominal.push_back(nominal);
    out.corrected.push_back(corrected);
  }
  out.feasible = out.violation == 0.0;
  return out;
}

PlanResult plan(const HybridModel &model, std::span<const VavConfig> cfgs,
                const Corrections &corr, std::span<const double> temps,
                std::span<const double> oat, const CostWeights &w, const SequenceLayout &layout,
                std::optional<int> fixed_first, const PlanOptions &opts) {
  model.validate();
  w.validate();
  if (oat.size() < layout.horizon) {
    std::ostringstream oss;
    oss << "plan: OAT forecast has " << oat.size() << " steps, horizon needs " << layout.horizon;
    throw ValidationError(oss.str());
  }
  if (layout.horizon == 0)
    throw ValidationError("plan: horizon must be positive");

  PlanResult res;
  const auto seqs = enumerate_sequences(model.mode_count(), layout, fixed_first);
  res.table.reserve(seqs.size());
  for (const auto &s : seqs) {
    const Rollout r = rollout_sequence(model, cfgs, corr, temps, s, oat, w, opts);
    res.table.push_back(SequenceCost{s, r.cost, r.feasible, r.violation});
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < res.table.size(); ++i)
    if (res.table[i].feasible && (!best || res.table[i].cost < res.table[*best].cost))
      best = i;
  res.feasible = best.has_value();
  if (!best) {
    best = 0;
    for (std::size_t i = 1; i < res.table.size(); ++i) {
      const auto &c = res.table[i];
      const auto &b = res.table[*best];
      if (c.violation < b.violation || (c.violation == b.violation && c.cost < b.cost))
        best = i;
    }
  }
  res.best_index = *best;
  res.best = res.table[*best].sequence;
  res.cost = res.table[*best].cost;
  res.first_mode = res.best.blocks.front();
  res.first_sat = model.modes[static_cast<std::size_t>(res.first_mode - 1)].sat;
  return res;
}

// ---------------------------------------------------------------------------

LbmpcController::LbmpcController(HybridModel model, std::vector<VavConfig> cfgs,
                                 CostWeights weights, std::size_t horizon, PlanOptions opts)
    : model_(std::move(model)), cfgs_(std::move(cfgs)), weights_(weights), horizon_(horizon),
      opts_(opts) {
  model_.validate();
  weights_.validate();
  if (cfgs_.size() != model_.zone_count())
    throw ValidationError("controller: one VAV config per model zone");
  for (const auto &c : cfgs_)
    c.validate();
  if (horizon_ == 0)
    throw ValidationError("controller: horizon must be positive");
  state_.corrections = Corrections::zeros(model_.zone_count());
}

void LbmpcController::restore(PlannerState state) {
  state.corrections.validate(model_.zone_count());
  if (state.last_measured && state.last_measured->size() != model_.zone_count())
    throw ValidationError("planner state zone count does not match the model");
  if (state.last_mode < 0 || static_cast<std::size_t>(state.last_mode) > model_.mode_count())
    throw ValidationError("planner state refers to an unknown mode");
  state_ = std::move(state);
}

PlanResult LbmpcController::step(std::size_t step, std::span<const ZoneState> measured,
                                 std::span<const double> oat) {
  const std::size_t zones = model_.zone_count();
  if (measured.size() != zones)
    throw ValidationError("controller: one measurement per zone");

  std::vector<double> temps(zones);
  for (std::size_t j = 0; j < zones; ++j)
    temps[j] = measured[j].temp;

  if (state_.last_measured && state_.last_mode > 0 && state_.last_step + 1 == step) {
    const Mode &prev = model_.modes[static_cast<std::size_t>(state_.last_mode - 1)];
    const auto predicted = one_step_prediction(model_, cfgs_, *state_.last_measured, prev, temps);
    state_.corrections = update_corrections(measured, predicted);
  }

  const std::size_t phase = step % kSamplesPerHour;
  SequenceLayout layout{horizon_, kSamplesPerHour, kSamplesPerHour - phase};
  std::optional<int> pinned;
  if (phase != 0 && state_.last_mode > 0 && state_.last_step + 1 == step)
    pinned = state_.last_mode;

  PlanResult res = plan(model_, cfgs_, state_.corrections, temps, oat, weights_, layout, pinned,
                        opts_);
  const Rollout chosen =
      rollout_sequence(model_, cfgs_, state_.corrections, temps, res.best, oat, weights_, opts_);

  state_.last_measured = std::vector<ZoneState>(measured.begin(), measured.end());
  state_.last_mode = res.first_mode;
  state_.last_step = step;
  state_.last_prediction.resize(zones);
  for (std::size_t j = 0; j < zones; ++j)
    state_.last_prediction[j] = chosen.corrected[1][j].temp;
  return res;
}

} // namespace hvac
