#pragma once

// Binomial-lattice oracle: single-agent optimal stopping by backward
// induction, and a one-shot-deviation check of interval strategy pairs in the
// discrete-time timing game.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "preempt/equilibrium.hpp"
#include "preempt/error.hpp"
#include "preempt/payoffs.hpp"
#include "preempt/stopping.hpp"
#include "preempt/streams_model.hpp"
#include "preempt/threshold.hpp"

namespace preempt {

struct LatticeSpec {
  int n_steps = 2000;
  double horizon = 50.0;
  double x0 = 1.0;
};

/// Cox-Ross-Rubinstein parameters with the up-probability matched to the
/// GBM mean, so E[x_{t+dt}] = x_t e^{mu dt} on the lattice.
struct LatticeGeometry {
  int n_steps = 0;
  double x0 = 0.0;
  double dt = 0.0;
  double up = 0.0;
  double down = 0.0;
  double p_up = 0.0;
  double disc = 0.0;
  double log_up = 0.0;

  /// State at layer k (0..n), node j (0..k).
  double node(int k, int j) const { return x0 * std::exp(log_up * (2.0 * j - k)); }
};

inline LatticeGeometry make_geometry(const LatticeSpec& spec, const GbmParams& g) {
  g.validate();
  if (spec.n_steps < 1) throw InvalidLattice("n_steps must be >= 1");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) {
    throw InvalidLattice("horizon must be finite and > 0");
  }
  if (!(spec.x0 > 0.0) || !std::isfinite(spec.x0)) throw InvalidLattice("x0 must be > 0");
  if (!(g.sigma > 0.0)) throw InvalidLattice("the lattice requires sigma > 0");
  LatticeGeometry geo;
  geo.n_steps = spec.n_steps;
  geo.x0 = spec.x0;
  geo.dt = spec.horizon / spec.n_steps;
  geo.log_up = g.sigma * std::sqrt(geo.dt);
  geo.up = std::exp(geo.log_up);
  geo.down = 1.0 / geo.up;
  geo.p_up = (std::exp(g.mu * geo.dt) - geo.down) / (geo.up - geo.down);
  geo.disc = std::exp(-g.r * geo.dt);
  if (!(geo.p_up > 0.0 && geo.p_up < 1.0)) {
    throw InvalidLattice("up-probability " + std::to_string(geo.p_up) +
                         " outside (0, 1); increase n_steps");
  }
  return geo;
}

/// Stopping is optional on (lo, hi) and forced at or outside its ends.
/// lo = 0 means no lower barrier.
struct StoppingConstraint {
  double lo = 0.0;
  Threshold hi;

  bool forced(double x) const { return (lo > 0.0 && x <= lo) || hi <= x; }
};

enum class NodeAction : std::uint8_t { Wait = 0, Stop = 1, ForcedStop = 2 };

struct LatticeStoppingResult {
  double value = 0.0;
  LatticeGeometry geometry;
  /// Per layer k, the action at node j (empty unless recording was requested).
  std::vector<std::vector<NodeAction>> actions;

  /// Lowest node of layer k where stopping is voluntary and optimal, if any.
  std::optional<double> lowest_voluntary_stop(int k) const {
    const auto& row = actions.at(static_cast<std::size_t>(k));
    for (int j = 0; j <= k; ++j) {
      if (row[static_cast<std::size_t>(j)] == NodeAction::Stop) return geometry.node(k, j);
    }
    return std::nullopt;
  }
};

/// Expected discounted `s` flow over one lattice step starting from x.
inline double step_flow(const AffineStream& s, const GbmParams& g, const LatticeGeometry& geo,
                        double x) {
  return perpetuity_value(s, g, x) -
         geo.disc * perpetuity_value(s, g, x * std::exp(g.mu * geo.dt));
}

/// Switching from `from` to `to` by backward induction. Stop value at x is the
/// perpetuity of `to`; waiting earns the `from` flow. At the horizon the
/// better of switching and never switching is taken.
inline LatticeStoppingResult lattice_stopping(const LatticeSpec& spec, const GbmParams& g,
                                              const AffineStream& from, const AffineStream& to,
                                              const StoppingConstraint& feasible = {},
                                              bool record_actions = false) {
  const auto geo = make_geometry(spec, g);
  const int n = geo.n_steps;
  LatticeStoppingResult out;
  out.geometry = geo;
  if (record_actions) out.actions.resize(static_cast<std::size_t>(n) + 1);

  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  auto decide = [&](int k, int j, double cont, bool terminal) {
    const double x = geo.node(k, j);
    const double stop = perpetuity_value(to, g, x);
    NodeAction a;
    double val;
    if (feasible.forced(x)) {
      a = NodeAction::ForcedStop;
      val = stop;
    } else {
      const double wait = terminal ? perpetuity_value(from, g, x) : step_flow(from, g, geo, x) + cont;
      if (stop >= wait) {
        a = NodeAction::Stop;
        val = stop;
      } else {
        a = NodeAction::Wait;
        val = wait;
      }
    }
    if (record_actions) out.actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = a;
    return val;
  };

  if (record_actions) out.actions[static_cast<std::size_t>(n)].resize(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) v[static_cast<std::size_t>(j)] = decide(n, j, 0.0, true);
  for (int k = n - 1; k >= 0; --k) {
    if (record_actions) out.actions[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double cont = geo.disc * (geo.p_up * v[uj + 1] + (1.0 - geo.p_up) * v[uj]);
      v[uj] = decide(k, j, cont, false);
    }
  }
  out.value = v[0];
  return out;
}

/// Union of disjoint state intervals on which a firm invests.
struct InvestmentRule {
  struct Interval {
    double lo = 0.0;
    Threshold hi;
    bool lo_closed = true;
    bool hi_closed = false;

    bool contains(double x) const {
      const bool above = lo_closed ? x >= lo : x > lo;
      const bool below = hi_closed ? hi >= x : hi > x;
      return above && below;
    }
  };

  std::vector<Interval> intervals;

  bool invests(double x) const {
    for (const auto& iv : intervals) {
      if (iv.contains(x)) return true;
    }
    return false;
  }

  /// Throws InvalidParameter unless intervals are sorted and disjoint.
  void validate() const {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto& iv = intervals[i];
      if (!(iv.lo >= 0.0) || iv.hi < iv.lo) throw InvalidParameter("malformed rule interval");
      if (i > 0) {
        const auto& prev = intervals[i - 1];
        if (prev.hi.is_infinite() || prev.hi > iv.lo ||
            (prev.hi == iv.lo && prev.hi_closed && iv.lo_closed)) {
          throw InvalidParameter("rule intervals must be sorted and disjoint");
        }
      }
    }
  }

  static InvestmentRule never() { return {}; }
  static InvestmentRule at_or_above(double level) {
    InvestmentRule r;
    r.intervals.push_back({level, Threshold::infinite(), true, false});
    return r;
  }
  static InvestmentRule always() { return at_or_above(0.0); }
};

enum class TieRule { PreemptionFollowerPayoffs, SimultaneousPayoffs };

/// Strategy pair of interval rules, with the outcome rule when both firms
/// invest at the same state.
struct CandidateStrategyPair {
  InvestmentRule firm1;
  InvestmentRule firm2;
  TieRule tie = TieRule::PreemptionFollowerPayoffs;
  /// States where a joint attempt counts as mutual preemption.
  PreemptionRegion preemption;

  const InvestmentRule& rule(int i) const { return i == 1 ? firm1 : firm2; }
};

namespace detail {

inline void append_merged(InvestmentRule& r, const Segment& s) {
  if (!r.intervals.empty()) {
    auto& last = r.intervals.back();
    if (last.hi == s.lo && (last.hi_closed || s.lo_closed)) {
      last.hi = s.hi;
      last.hi_closed = s.hi_closed;
      return;
    }
  }
  r.intervals.push_back({s.lo, s.hi, s.lo_closed, s.hi_closed});
}

}  // namespace detail

/// Strategy pair implied by an equilibrium report: firm 1 invests wherever
/// some firm invests, firm 2 only in the preemption and joint segments.
inline CandidateStrategyPair candidate_from_report(const EquilibriumReport& rep) {
  CandidateStrategyPair c;
  c.preemption = rep.preemption;
  for (const auto& s : rep.segments) {
    if (s.label == SegmentLabel::NoInvestment) continue;
    detail::append_merged(c.firm1, s);
    if (s.label != SegmentLabel::Leader1Invests) detail::append_merged(c.firm2, s);
  }
  return c;
}

struct DeviationOptions {
  /// Tolerance; when absent, 10 dt r times the payoff scale.
  std::optional<double> epsilon;
  /// Only layers with t <= check_fraction * horizon are checked, away from
  /// the truncation boundary.
  double check_fraction = 0.5;
  /// A path entering the preemption region from outside does so at its
  /// boundary in continuous time, where firm 1 leads and firm 2 is
  /// indifferent; apply that outcome on the lattice step that enters.
  bool entry_leader = true;
  std::size_t max_recorded = 1000;
};

enum class DeviationKind { InvestInsteadOfWait, WaitInsteadOfInvest };

inline const char* to_string(DeviationKind k) {
  return k == DeviationKind::InvestInsteadOfWait ? "invest_instead_of_wait"
                                                 : "wait_instead_of_invest";
}

struct DeviationViolation {
  int layer = 0;
  double t = 0.0;
  double x = 0.0;
  int firm = 0;
  DeviationKind kind = DeviationKind::InvestInsteadOfWait;
  double gain = 0.0;
};

struct DeviationReport {
  double epsilon = 0.0;
  double scale = 0.0;
  std::size_t nodes_checked = 0;
  std::size_t violation_count = 0;
  double max_gain[2] = {0.0, 0.0};  ///< largest deviation gain per firm (may be <= 0)
  double max_gain_x[2] = {0.0, 0.0};
  std::vector<DeviationViolation> violations;  ///< first max_recorded violations

  bool passed() const { return violation_count == 0; }
};

/// Payoff magnitude used to scale the tolerance: the largest absolute
/// perpetuity value of any stream at x_ref = max(x0, x_F2), the top of the
/// strategic zone (or the largest finite threshold when x_F2 is infinite).
inline double payoff_scale(const AffineStreamModel& m, double x0) {
  const auto t = thresholds(m);
  double x = x0;
  if (t.xF2.is_finite()) {
    x = std::max(x, t.xF2.value());
  } else {
    for (const auto& th : {t.xF1, t.xL1, t.xL2, t.xM1, t.xDelta2}) {
      if (th.is_finite()) x = std::max(x, th.value());
    }
  }
  double scale = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const auto& f = m.firm(i);
    for (const auto* s : {&f.s0, &f.sL, &f.sF, &f.sB}) {
      scale = std::max(scale, std::abs(perpetuity_value(*s, m.gbm(), x)));
    }
  }
  return scale;
}

inline double default_deviation_epsilon(const LatticeGeometry& geo, const AffineStreamModel& m) {
  return 10.0 * geo.dt * m.gbm().r * payoff_scale(m, geo.x0);
}

/// Values both firms under the candidate by backward induction and reports
/// every node where a single-step deviation gains more than epsilon.
inline DeviationReport one_shot_deviation_check(const LatticeSpec& spec,
                                                const AffineStreamModel& m,
                                                const CandidateStrategyPair& cand,
                                                const DeviationOptions& opt = {}) {
  cand.firm1.validate();
  cand.firm2.validate();
  const auto& g = m.gbm();
  const auto geo = make_geometry(spec, g);
  const ValueFunctions vf(m);
  const int n = geo.n_steps;

  DeviationReport rep;
  rep.scale = payoff_scale(m, geo.x0);
  rep.epsilon = opt.epsilon.value_or(10.0 * geo.dt * g.r * rep.scale);
  rep.max_gain[0] = rep.max_gain[1] = -std::numeric_limits<double>::infinity();
  const int last_checked = static_cast<int>(std::floor(opt.check_fraction * n + 1e-9));

  auto joint_payoff = [&](int i, double x) {
    if (cand.tie == TieRule::PreemptionFollowerPayoffs && cand.preemption.contains(x)) {
      return vf.follower(i, x);
    }
    return vf.simultaneous(i, x);
  };
  // Value to firm i of the action profile (a1, a2) at x; cont[i-1] is the
  // expected discounted continuation when both wait.
  auto outcome = [&](int i, double x, bool a1, bool a2, const double* cont) {
    const bool ai = i == 1 ? a1 : a2;
    const bool aj = i == 1 ? a2 : a1;
    if (ai && aj) return joint_payoff(i, x);
    if (ai) return vf.leader(i, x);
    if (aj) return vf.follower(i, x);
    return cont[i - 1];
  };

  std::vector<double> v1(static_cast<std::size_t>(n) + 1), v2(v1.size());
  // Value seen by a parent outside the region: on entry firm 1 leads.
  std::vector<double> e1(v1.size()), e2(v1.size());

  auto record = [&](int k, double x, int firm, DeviationKind kind, double gain) {
    const int fi = firm - 1;
    if (gain > rep.max_gain[fi]) {
      rep.max_gain[fi] = gain;
      rep.max_gain_x[fi] = x;
    }
    if (gain > rep.epsilon) {
      ++rep.violation_count;
      if (rep.violations.size() < opt.max_recorded) {
        rep.violations.push_back({k, k * geo.dt, x, firm, kind, gain});
      }
    }
  };

  for (int k = n; k >= 0; --k) {
    const bool terminal = k == n;
    for (int j = 0; j <= k; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double x = geo.node(k, j);
      double cont[2];
      if (terminal) {
        cont[0] = vf.idle(1, x);
        cont[1] = vf.idle(2, x);
      } else {
        const bool inside = cand.preemption.contains(x);
        const auto& u1 = (opt.entry_leader && !inside) ? e1 : v1;
        const auto& u2 = (opt.entry_leader && !inside) ? e2 : v2;
        const double p = geo.p_up;
        cont[0] = step_flow(m.firm(1).s0, g, geo, x) +
                  geo.disc * (p * u1[uj + 1] + (1.0 - p) * u1[uj]);
        cont[1] = step_flow(m.firm(2).s0, g, geo, x) +
                  geo.disc * (p * u2[uj + 1] + (1.0 - p) * u2[uj]);
      }
      const bool a1 = cand.firm1.invests(x);
      const bool a2 = cand.firm2.invests(x);
      const double val1 = outcome(1, x, a1, a2, cont);
      const double val2 = outcome(2, x, a1, a2, cont);

      if (k <= last_checked) {
        ++rep.nodes_checked;
        const double dev1 = outcome(1, x, !a1, a2, cont) - val1;
        const double dev2 = outcome(2, x, a1, !a2, cont) - val2;
        record(k, x, 1, a1 ? DeviationKind::WaitInsteadOfInvest : DeviationKind::InvestInsteadOfWait,
               dev1);
        record(k, x, 2, a2 ? DeviationKind::WaitInsteadOfInvest : DeviationKind::InvestInsteadOfWait,
               dev2);
      }

      // Write after reading children at index j and j+1 (j+1 is not yet
      // overwritten in this layer).
      v1[uj] = val1;
      v2[uj] = val2;
      const bool entry = a1 && a2 && cand.tie == TieRule::PreemptionFollowerPayoffs &&
                         cand.preemption.contains(x);
      e1[uj] = entry ? vf.leader(1, x) : val1;
      e2[uj] = entry ? vf.follower(2, x) : val2;
    }
  }
  return rep;
}

}  // namespace preempt
