#pragma once

#include <random>

#include "preempt/preempt.hpp"

namespace fixtures {

inline preempt::PawlinaKortParams baseline() {
  preempt::PawlinaKortParams p;
  p.r = 0.1;
  p.mu = 0.08;
  p.sigma = 0.2;
  p.D00 = 0.0;
  p.D01 = 0.0;
  p.D10 = 2.5;
  p.D11 = 1.0;
  p.I1 = 1.0;
  p.I2 = 1.0;
  p.x0 = 0.06;
  return p;
}

/// beta1 = 2 family with x_F1 = 120; D01 = 0, D11 = 1, D10 = 1 + c, D00 = 1 - d.
inline preempt::PawlinaKortParams asymmetric(double c, double d, double cost_ratio) {
  preempt::PawlinaKortParams p;
  p.r = 0.08;
  p.mu = 0.02;
  p.sigma = 0.2;
  p.D01 = 0.0;
  p.D11 = 1.0;
  p.D10 = 1.0 + c;
  p.D00 = 1.0 - d;
  p.I1 = 1000.0;
  p.I2 = 1000.0 * cost_ratio;
  p.x0 = 50.0;
  return p;
}

inline preempt::GrenadierParams grenadier_example() {
  preempt::GrenadierParams p;
  p.r = 0.08;
  p.mu = 0.02;
  p.sigma = 0.2;
  p.delta = 0.0;
  p.R = 0.08;
  p.gamma = 0.5;
  p.I = 1.0;
  p.D1 = 2.0;
  p.D2 = 1.0;
  p.x0 = 0.1;
  return p;
}

/// Random asymmetric-cost model satisfying the orderings, with D10 > D00.
inline preempt::PawlinaKortParams random_pk(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  preempt::PawlinaKortParams p;
  p.r = 0.03 + 0.12 * u(rng);
  p.mu = -0.03 + (p.r - 0.01 + 0.03) * u(rng);
  p.sigma = 0.05 + 0.35 * u(rng);
  p.D01 = 0.5 * u(rng);
  const double unit = 0.2 + 0.8 * u(rng);
  p.D11 = p.D01 + unit;
  p.D10 = p.D11 + (0.05 + 1.95 * u(rng)) * unit;
  p.D00 = p.D11 - u(rng) * unit;
  p.I1 = 0.5 + 1.5 * u(rng);
  p.I2 = p.I1 * (1.0 + 0.6 * u(rng));
  p.x0 = 1.0;
  return p;
}

/// Moves every rule interval that starts at `lo` down to `factor * lo`.
inline preempt::CandidateStrategyPair shift_entry(preempt::CandidateStrategyPair c, double lo,
                                                  double factor) {
  for (auto* rule : {&c.firm1, &c.firm2}) {
    for (auto& iv : rule->intervals) {
      if (iv.lo == lo) iv.lo = factor * lo;
    }
  }
  return c;
}

inline preempt::LatticeSpec oracle_spec(const preempt::PawlinaKortParams& p, int n_steps) {
  const auto t = preempt::thresholds(p);
  return {n_steps, 5.0 / p.r, 0.5 * t.xF2.value()};
}

}  // namespace fixtures
