#pragma once

// Shared builders for tests: small hybrid models and independent reference
// implementations of the zone and VAV equations.

#include "hvac/lbmpc.hpp"
#include "hvac/thermal.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace hvac::testing {

// Reference VAV laws, written from the case definitions directly.
inline double ref_reheat(double e) {
  if (e < -1.0)
    return 100.0;
  if (e < 0.0)
    return -100.0 * e;
  return 0.0;
}

inline double ref_flow(double e, double alpha, double omega) {
  if (e < 0.0)
    return alpha;
  if (e < 1.0)
    return (omega - alpha) * e + alpha;
  return omega;
}

inline HybridModel single_mode_pair(double a, double b, double c, double q) {
  HybridModel m;
  m.modes = make_modes(std::vector<double>{52.0, 62.0});
  m.zones.push_back(ZoneCoeffs{{a, a}, {b, b}, {c, c}});
  m.q = {q};
  return m;
}

/// Random model with verbatim-ordered airflow gains.
inline HybridModel random_model(std::mt19937_64 &rng, std::size_t zones,
                                std::vector<double> sats = {52.0, 58.0, 62.0}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HybridModel m;
  m.modes = make_modes(sats);
  for (std::size_t j = 0; j < zones; ++j) {
    ZoneCoeffs z;
    const double a = 0.85 + 0.1 * u(rng);
    const double c = 0.005 + 0.01 * u(rng);
    double b = -(0.0005 + 0.001 * u(rng));
    for (std::size_t k = 0; k < sats.size(); ++k) {
      if (k > 0)
        b = sats[k] / sats[k - 1] * b - 1e-5 - 1e-4 * u(rng);
      z.a.push_back(a);
      z.b.push_back(b);
      z.c.push_back(c);
    }
    m.zones.push_back(z);
    m.q.push_back(6.0 + 2.0 * u(rng));
  }
  return m;
}

inline std::vector<VavConfig> random_vavs(std::mt19937_64 &rng, std::size_t zones) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<VavConfig> out;
  for (std::size_t j = 0; j < zones; ++j) {
    VavConfig v;
    v.alpha = 100.0 + 100.0 * u(rng);
    v.omega = v.alpha + 400.0 + 400.0 * u(rng);
    v.setpoint = 71.0 + 2.0 * u(rng);
    v.band = 1.0;
    out.push_back(v);
  }
  return out;
}

} // namespace hvac::testing
