#pragma once

// Monte Carlo payoffs of interval strategies. Only the first investment time
// is simulated; what follows is valued in closed form. Paths use exact
// lognormal increments with a Brownian-bridge test for barrier crossings
// between grid times, and the crossing time is refined by bisecting the bridge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "preempt/error.hpp"
#include "preempt/lattice.hpp"
#include "preempt/payoffs.hpp"
#include "preempt/streams_model.hpp"

namespace preempt {

struct MonteCarloSpec {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  double horizon = 0.0;  ///< 0 selects 10 / r
  int n_steps = 1000;
  int refine_levels = 12;  ///< bridge bisections of the step containing a crossing
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct GamePayoffEstimate {
  MonteCarloEstimate firm[2];
  std::size_t invested_paths = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent engine per (seed, path) so results never depend on the order
/// in which paths are evaluated.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ path));
}

class Accumulator {
 public:
  void add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }
  MonteCarloEstimate estimate() const {
    if (n_ == 0) return {};
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Probability that a Brownian bridge in log space from a to c over time h
/// touches level l, for a and c on the same side of l.
inline double bridge_cross(double a, double c, double l, double var_h) {
  if ((a - l) * (c - l) <= 0.0) return 1.0;
  return std::exp(-2.0 * (l - a) * (l - c) / var_h);
}

struct Hit {
  double t = 0.0;
  double x = 0.0;       ///< state at entry (a set boundary, or x0 when t = 0)
  double x_prev = 0.0;  ///< grid state just before entry
  bool upward = true;
};

class PathSimulator {
 public:
  PathSimulator(const GbmParams& g, const MonteCarloSpec& spec) : g_(g), spec_(spec) {
    g_.validate();
    if (!(g_.sigma > 0.0)) throw InvalidParameter("Monte Carlo requires sigma > 0");
    if (spec.n_paths < 1) throw InvalidParameter("n_paths must be >= 1");
    if (spec.n_steps < 1) throw InvalidParameter("n_steps must be >= 1");
    horizon_ = spec.horizon > 0.0 ? spec.horizon : 10.0 / g_.r;
    dt_ = horizon_ / spec.n_steps;
    drift_ = (g_.mu - 0.5 * g_.sigma * g_.sigma) * dt_;
    vol_ = g_.sigma * std::sqrt(dt_);
  }

  double horizon() const { return horizon_; }

  /// First entry of the path from x0 into the set where `rule` invests.
  std::optional<Hit> first_entry(const InvestmentRule& rule, double x0, std::mt19937_64& rng) const {
    if (rule.invests(x0)) return Hit{0.0, x0, x0, true};
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    double a = std::log(x0);
    for (int k = 0; k < spec_.n_steps; ++k) {
      const double x = std::exp(a);
      double up = std::numeric_limits<double>::infinity();
      double down = -std::numeric_limits<double>::infinity();
      for (const auto& iv : rule.intervals) {
        if (iv.lo > x) up = std::min(up, std::log(iv.lo));
        if (iv.hi.is_finite() && iv.hi.value() < x && iv.hi.value() > 0.0) {
          down = std::max(down, std::log(iv.hi.value()));
        } else if (iv.hi.is_finite() && iv.hi.value() == x) {
          down = std::max(down, std::log(x));
        }
      }
      const double c = a + drift_ + vol_ * normal(rng);
      std::optional<double> level;
      if (c >= up) {
        level = up;
      } else if (c <= down) {
        level = down;
      } else {
        const double var = vol_ * vol_;
        if (std::isfinite(up) && unif(rng) < bridge_cross(a, c, up, var)) {
          level = up;
        } else if (std::isfinite(down) && unif(rng) < bridge_cross(a, c, down, var)) {
          level = down;
        }
      }
      if (level) {
        const double t0 = k * dt_;
        const double tc = refine(t0, a, t0 + dt_, c, *level, rng);
        return Hit{tc, std::exp(*level), x, *level > a};
      }
      a = c;
    }
    return std::nullopt;
  }

 private:
  /// Crossing time of level l inside [t0, t1], given endpoints a and c and
  /// that the bridge crosses; bisects by sampling the midpoint conditionally.
  double refine(double t0, double a, double t1, double c, double l, std::mt19937_64& rng) const {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double s2 = g_.sigma * g_.sigma;
    for (int level = 0; level < spec_.refine_levels; ++level) {
      const double h = t1 - t0;
      const double tm = t0 + 0.5 * h;
      for (int tries = 0;; ++tries) {
        const double m = 0.5 * (a + c) + 0.5 * g_.sigma * std::sqrt(h) * normal(rng);
        const double p1 = bridge_cross(a, m, l, s2 * 0.5 * h);
        const double p2 = bridge_cross(m, c, l, s2 * 0.5 * h);
        const double pc = 1.0 - (1.0 - p1) * (1.0 - p2);
        if (unif(rng) < pc || tries > 100000) {
          if (unif(rng) * pc < p1) {
            t1 = tm;
            c = m;
          } else {
            t0 = tm;
            a = m;
          }
          break;
        }
      }
    }
    return 0.5 * (t0 + t1);
  }

  GbmParams g_;
  MonteCarloSpec spec_;
  double horizon_ = 0.0;
  double dt_ = 0.0;
  double drift_ = 0.0;
  double vol_ = 0.0;
};

inline InvestmentRule union_rule(const InvestmentRule& a, const InvestmentRule& b) {
  std::vector<InvestmentRule::Interval> all = a.intervals;
  all.insert(all.end(), b.intervals.begin(), b.intervals.end());
  std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
    return l.lo < r.lo || (l.lo == r.lo && l.lo_closed && !r.lo_closed);
  });
  InvestmentRule out;
  for (const auto& iv : all) {
    if (!out.intervals.empty()) {
      auto& last = out.intervals.back();
      const bool touches = last.hi > iv.lo || (last.hi == iv.lo && (last.hi_closed || iv.lo_closed));
      if (touches) {
        if (iv.hi > last.hi) {
          last.hi = iv.hi;
          last.hi_closed = iv.hi_closed;
        } else if (iv.hi == last.hi) {
          last.hi_closed = last.hi_closed || iv.hi_closed;
        }
        continue;
      }
    }
    out.intervals.push_back(iv);
  }
  return out;
}

}  // namespace detail

/// Value of switching from `from` to `to` on first entry into the rule's set,
/// starting at x0. Paths that never enter keep the `from` perpetuity.
inline MonteCarloEstimate monte_carlo_switch(const GbmParams& g, const AffineStream& from,
                                             const AffineStream& to, const InvestmentRule& rule,
                                             double x0, const MonteCarloSpec& spec = {}) {
  rule.validate();
  const detail::PathSimulator sim(g, spec);
  detail::Accumulator acc;
  const double base = perpetuity_value(from, g, x0);
  for (std::size_t i = 0; i < spec.n_paths; ++i) {
    auto rng = detail::path_engine(spec.seed, i);
    const auto hit = sim.first_entry(rule, x0, rng);
    double v = base;
    if (hit) v += std::exp(-g.r * hit->t) * perpetuity_value(to - from, g, hit->x);
    acc.add(v);
  }
  return acc.estimate();
}

/// Payoffs of both firms under a strategy pair from x0, with the same tie
/// rule and region-entry convention as the lattice deviation check.
inline GamePayoffEstimate monte_carlo_payoff(const AffineStreamModel& m,
                                             const CandidateStrategyPair& cand, double x0,
                                             const MonteCarloSpec& spec = {}) {
  cand.firm1.validate();
  cand.firm2.validate();
  const auto& g = m.gbm();
  const ValueFunctions vf(m);
  const detail::PathSimulator sim(g, spec);
  const auto any = detail::union_rule(cand.firm1, cand.firm2);

  detail::Accumulator acc[2];
  GamePayoffEstimate out;
  for (std::size_t i = 0; i < spec.n_paths; ++i) {
    auto rng = detail::path_engine(spec.seed, i);
    const auto hit = sim.first_entry(any, x0, rng);
    if (!hit) {
      acc[0].add(vf.idle(1, x0));
      acc[1].add(vf.idle(2, x0));
      continue;
    }
    ++out.invested_paths;
    const double x = hit->x;
    // Nudge into the set so that open endpoints register as entered.
    const double probe = hit->t == 0.0 ? x : x * (hit->upward ? 1.0 + 1e-12 : 1.0 - 1e-12);
    const bool a1 = cand.firm1.invests(probe);
    const bool a2 = cand.firm2.invests(probe);
    double pay[2];
    if (a1 && a2) {
      const bool in_region =
          cand.tie == TieRule::PreemptionFollowerPayoffs && cand.preemption.contains(probe);
      if (in_region && hit->t > 0.0 && !cand.preemption.contains(hit->x_prev)) {
        pay[0] = vf.leader(1, x);
        pay[1] = vf.follower(2, x);
      } else if (in_region) {
        pay[0] = vf.follower(1, x);
        pay[1] = vf.follower(2, x);
      } else {
        pay[0] = vf.simultaneous(1, x);
        pay[1] = vf.simultaneous(2, x);
      }
    } else if (a1) {
      pay[0] = vf.leader(1, x);
      pay[1] = vf.follower(2, x);
    } else {
      pay[0] = vf.follower(1, x);
      pay[1] = vf.leader(2, x);
    }
    const double disc = std::exp(-g.r * hit->t);
    for (int f = 0; f < 2; ++f) {
      acc[f].add(vf.idle(f + 1, x0) + disc * (pay[f] - vf.idle(f + 1, x)));
    }
  }
  out.firm[0] = acc[0].estimate();
  out.firm[1] = acc[1].estimate();
  return out;
}

}  // namespace preempt
