#pragma once

// Naive planner: four nested loops over hour blocks and a direct transcription
// of the nominal and corrected dynamics. Shares no code with the library
// beyond the data types.

#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace hvac::testing {

struct NaiveOutcome {
  double cost = 0.0;
  double violation = 0.0;
};

inline NaiveOutcome naive_rollout(const HybridModel &m, const std::vector<VavConfig> &v,
                                  const Corrections &corr, const std::vector<double> &t0,
                                  const std::vector<int> &steps, const std::vector<double> &oat,
                                  const CostWeights &w, double tmin = 66.0, double tmax = 78.0,
                                  double margin = 0.1) {
  const std::size_t z = m.zones.size();
  std::vector<double> tn = t0, tc = t0;
  NaiveOutcome out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto k = static_cast<std::size_t>(steps[i] - 1);
    double sq = 0.0, fsum = 0.0, rsum = 0.0;
    for (std::size_t j = 0; j < z; ++j) {
      const auto &c = m.zones[j];
      const double en = tn[j] - v[j].setpoint;
      const double fn = ref_flow(en, v[j].alpha, v[j].omega);
      const double rn = ref_reheat(en);
      tn[j] = c.a[k] * tn[j] + c.b[k] * fn + c.c[k] * rn + m.q[j];
      if (tn[j] < tmin)
        out.violation += tmin - tn[j];
      if (tn[j] > tmax)
        out.violation += tn[j] - tmax;

      const double ec = tc[j] - v[j].setpoint;
      double fc = ref_flow(ec, v[j].alpha, v[j].omega) + corr.f_hat[j];
      fc = std::min(std::max(fc, 0.0), v[j].omega * (1.0 + margin));
      double rc = ref_reheat(ec) + corr.r_hat[j];
      rc = std::min(std::max(rc, 0.0), 100.0);
      tc[j] = c.a[k] * tc[j] + c.b[k] * fc + c.c[k] * rc + m.q[j] + corr.q_hat[j];
      sq += (tc[j] - v[j].setpoint) * (tc[j] - v[j].setpoint);
      fsum += fc;
      rsum += rc;
    }
    out.cost += sq + w.lambda * std::pow(fsum, 3) + w.gamma * rsum +
                w.mu * (oat[i] - m.modes[k].sat) * fsum;
  }
  return out;
}

struct NaivePlan {
  std::array<int, 4> blocks{};
  double cost = 0.0;
  bool feasible = false;
};

/// Exhaustive search over four one-hour blocks of a 16-step horizon.
inline NaivePlan naive_plan(const HybridModel &m, const std::vector<VavConfig> &v,
                            const Corrections &corr, const std::vector<double> &t0,
                            const std::vector<double> &oat, const CostWeights &w) {
  const int p = static_cast<int>(m.modes.size());
  NaivePlan best;
  double best_violation = 0.0;
  bool have = false;
  for (int m1 = 1; m1 <= p; ++m1)
    for (int m2 = 1; m2 <= p; ++m2)
      for (int m3 = 1; m3 <= p; ++m3)
        for (int m4 = 1; m4 <= p; ++m4) {
          std::vector<int> steps;
          for (int b : {m1, m2, m3, m4})
            steps.insert(steps.end(), 4, b);
          const auto r = naive_rollout(m, v, corr, t0, steps, oat, w);
          const bool feasible = r.violation == 0.0;
          bool take = false;
          if (!have)
            take = true;
          else if (feasible != best.feasible)
            take = feasible;
          else if (feasible)
            take = r.cost < best.cost;
          else
            take = r.violation < best_violation ||
                   (r.violation == best_violation && r.cost < best.cost);
          if (take) {
            best = NaivePlan{{m1, m2, m3, m4}, r.cost, feasible};
            best_violation = r.violation;
            have = true;
          }
        }
  return best;
}

} // namespace hvac::testing

namespace hvac::testing {

struct OffsetRun {
  std::vector<Corrections> corrections;    // after each control step
  std::vector<std::vector<double>> errors; // realized minus predicted temps, from step 1
};

/// Closed loop of LbmpcController against a plant that is the model plus
/// constant offsets: dq on the dynamics, df and dr on the VAV outputs.
inline OffsetRun run_offset_plant(const HybridModel &m, const std::vector<VavConfig> &v,
                                  std::vector<double> temps, double dq, double df, double dr,
                                  std::size_t steps, double oat = 85.0) {
  LbmpcController ctl(m, v, CostWeights::tuned(v), 16);
  const std::size_t z = m.zones.size();
  const std::vector<double> forecast(16, oat);
  OffsetRun out;
  std::vector<double> predicted;
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<ZoneState> meas(z);
    for (std::size_t j = 0; j < z; ++j) {
      const double e = temps[j] - v[j].setpoint;
      meas[j] = ZoneState{temps[j], ref_flow(e, v[j].alpha, v[j].omega) + df, ref_reheat(e) + dr};
    }
    if (!predicted.empty()) {
      std::vector<double> err(z);
      for (std::size_t j = 0; j < z; ++j)
        err[j] = temps[j] - predicted[j];
      out.errors.push_back(err);
    }
    const auto res = ctl.step(k, meas, forecast);
    out.corrections.push_back(ctl.state().corrections);
    predicted = ctl.state().last_prediction;
    const auto mode = static_cast<std::size_t>(res.first_mode - 1);
    for (std::size_t j = 0; j < z; ++j) {
      const auto &c = m.zones[j];
      temps[j] = c.a[mode] * temps[j] + c.b[mode] * meas[j].flow + c.c[mode] * meas[j].reheat +
                 m.q[j] + dq;
    }
  }
  return out;
}

} // namespace hvac::testing
