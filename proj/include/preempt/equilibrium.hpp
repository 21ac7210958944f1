#pragma once

// Subgame perfect equilibrium classification along the state axis and
// existence tests for joint-investment and sequential equilibria.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "preempt/error.hpp"
#include "preempt/payoffs.hpp"
#include "preempt/stopping.hpp"
#include "preempt/streams_model.hpp"
#include "preempt/threshold.hpp"

namespace preempt {

enum class SegmentLabel { NoInvestment, PreemptionStop, Leader1Invests, SimultaneousInvestment };

inline const char* to_string(SegmentLabel l) {
  switch (l) {
    case SegmentLabel::NoInvestment: return "no_investment";
    case SegmentLabel::PreemptionStop: return "preemption_stop";
    case SegmentLabel::Leader1Invests: return "leader1_invests";
    case SegmentLabel::SimultaneousInvestment: return "simultaneous_investment";
  }
  return "?";
}

/// Interval of the state axis with explicit endpoint closedness.
struct Segment {
  double lo = 0.0;
  Threshold hi;
  bool lo_closed = false;
  bool hi_closed = false;
  SegmentLabel label = SegmentLabel::NoInvestment;

  bool contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? hi >= x : hi > x;
    return above && below;
  }
};

enum class RegionCase { EmptyP, ConnectedP, DetachedP };

inline const char* to_string(RegionCase c) {
  switch (c) {
    case RegionCase::EmptyP: return "empty";
    case RegionCase::ConnectedP: return "connected";
    case RegionCase::DetachedP: return "detached";
  }
  return "?";
}

struct EquilibriumReport {
  std::vector<Segment> segments;
  std::string leader_rule;
  PreemptionRegion preemption;
  ThresholdSet thresholds;
  RegionCase region_case = RegionCase::EmptyP;
  /// Set for the market-entry special case (no revenue effect on the laggard),
  /// where the equilibrium is unique.
  bool unique = false;
  /// Constrained leader problem above the region, DetachedP with sigma > 0.
  std::optional<TwoSidedRegion> constrained_leader;

  SegmentLabel label_at(double x) const {
    for (const auto& s : segments) {
      if (s.contains(x)) return s.label;
    }
    throw InvalidParameter("state not covered by the segment partition");
  }
};

namespace detail {

class SegmentBuilder {
 public:
  /// Appends [cursor, hi) (or up to hi inclusive) when nonempty.
  void push(Threshold hi, bool hi_closed, SegmentLabel label) {
    if (done_) return;
    if (hi < cursor_ || (hi == cursor_ && !(cursor_closed_ && hi_closed))) return;
    Segment s;
    s.lo = cursor_;
    s.lo_closed = cursor_closed_;
    s.hi = hi;
    s.hi_closed = hi_closed && hi.is_finite();
    s.label = label;
    if (!out_.empty() && out_.back().label == label) {
      out_.back().hi = s.hi;
      out_.back().hi_closed = s.hi_closed;
    } else {
      out_.push_back(s);
    }
    if (hi.is_finite()) {
      cursor_ = hi.value();
      cursor_closed_ = !s.hi_closed;
    } else {
      done_ = true;
    }
  }

  bool done() const { return done_; }
  std::vector<Segment> take() { return std::move(out_); }

 private:
  std::vector<Segment> out_;
  double cursor_ = 0.0;
  bool cursor_closed_ = false;
  bool done_ = false;
};

inline std::string fmt(const Threshold& t) { return t.to_string(); }

}  // namespace detail

/// Equilibrium behavior as a function of the current state when neither firm
/// has invested yet. Firm 1 is the low-cost firm.
inline EquilibriumReport classify_spe(const AffineStreamModel& m, PreemptionRegion region) {
  EquilibriumReport rep;
  rep.thresholds = thresholds(m);
  rep.preemption = region;
  const auto& t = rep.thresholds;
  const auto& f1 = m.firm(1);
  rep.unique = f1.s0 == f1.sF && m.firm(2).s0 == m.firm(2).sF;

  detail::SegmentBuilder b;
  const Threshold xL1 = t.xL1;
  const Threshold xF2 = t.xF2;

  if (region.empty) {
    rep.region_case = RegionCase::EmptyP;
    const Threshold start = min(xL1, xF2);
    b.push(start, false, SegmentLabel::NoInvestment);
    b.push(xF2, false, SegmentLabel::Leader1Invests);
    b.push(Threshold::infinite(), false, SegmentLabel::SimultaneousInvestment);
    rep.leader_rule = "firm 1 invests at min(x_L1, x_F2) = " + detail::fmt(start);
    rep.segments = b.take();
    return rep;
  }

  const Threshold lower = Threshold::at(region.lower);
  const Threshold upper = region.upper;
  // The preemption stop region is closed at lower and at upper, except that
  // upper = x_F2 belongs to the simultaneous-investment segment.
  const bool upper_closed = upper < xF2;

  if (xL1 <= upper) {
    rep.region_case = RegionCase::ConnectedP;
    b.push(min(lower, xL1), false, SegmentLabel::NoInvestment);
    b.push(lower, false, SegmentLabel::Leader1Invests);
    b.push(upper, upper_closed, SegmentLabel::PreemptionStop);
    b.push(xF2, false, SegmentLabel::Leader1Invests);
    b.push(Threshold::infinite(), false, SegmentLabel::SimultaneousInvestment);
    rep.leader_rule = "firm 1 invests on [min(x_L1, lower), x_F2) = [" +
                      detail::fmt(min(lower, xL1)) + ", " + detail::fmt(xF2) + ")";
    rep.segments = b.take();
    return rep;
  }

  rep.region_case = RegionCase::DetachedP;
  b.push(lower, false, SegmentLabel::NoInvestment);
  b.push(upper, upper_closed, SegmentLabel::PreemptionStop);
  if (upper < xF2) {
    Threshold start;
    if (m.gbm().deterministic()) {
      start = constrained_threshold(SwitchProblem(f1.s0, f1.sL, m.gbm()), xF2);
    } else {
      const double gain = f1.sL.a - f1.s0.a;
      const double cost = (f1.s0.b - f1.sL.b) / m.gbm().r;
      rep.constrained_leader = two_sided_leader_region(m.gbm(), gain, cost, upper.value(), xF2);
      start = rep.constrained_leader->investment_start();
    }
    b.push(start, false, SegmentLabel::NoInvestment);
    b.push(xF2, false, SegmentLabel::Leader1Invests);
    rep.leader_rule = start < xF2 ? "firm 1 invests on the preemption region and on [" +
                                        detail::fmt(start) + ", " + detail::fmt(xF2) + ")"
                                  : "firm 1 invests on the preemption region, then waits for x_F2 = " +
                                        detail::fmt(xF2);
  } else {
    rep.leader_rule = "firm 1 invests on the preemption region only";
  }
  b.push(Threshold::infinite(), false, SegmentLabel::SimultaneousInvestment);
  rep.segments = b.take();
  return rep;
}

inline EquilibriumReport classify_spe(const AffineStreamModel& m) {
  return classify_spe(m, preemption_region(m));
}

inline EquilibriumReport classify_spe(const PawlinaKortParams& p) {
  return classify_spe(from_pawlina_kort(p), preemption_region(p));
}

struct ExistenceVerdict {
  bool exists = false;
  std::string binding_condition;
  /// Signed slack of the deciding inequality; positive means it holds strictly.
  double margin = 0.0;
};

namespace detail {

inline double pos(double v) { return v > 0.0 ? v : 0.0; }

/// Relative slack of a >= b; +inf when a is infinite.
inline double ratio_margin(const Threshold& a, const Threshold& b) {
  if (a.is_infinite()) return std::numeric_limits<double>::infinity();
  return a.value() / b.value() - 1.0;
}

}  // namespace detail

/// Left-hand side of the joint-investment existence inequality at threshold xJ.
inline double joint_condition_lhs(const PawlinaKortParams& p, double beta1, double xL1,
                                  Threshold xJ) {
  const double k = std::pow(p.I2 / p.I1, beta1 - 1.0);
  if (xJ.is_infinite()) return k;
  const double ratio = xL1 / xJ.value();
  const double slope = beta1 * (p.D11 - p.D00) / (p.D10 - p.D00);
  return k * (1.0 + std::pow(ratio, beta1) * (beta1 - 1.0) - std::pow(ratio, beta1 - 1.0) * slope);
}

inline double joint_condition_rhs(const PawlinaKortParams& p, double beta1) {
  const double den = p.D10 - p.D00;
  return beta1 * (p.D10 - p.D11) / den * std::pow(detail::pos(p.D11 - p.D01) / den, beta1 - 1.0);
}

/// Is simultaneous investment at the first passage of xJ an equilibrium?
inline ExistenceVerdict joint_equilibrium(const PawlinaKortParams& p, Threshold xJ) {
  const auto t = thresholds(p);
  if (t.xM1 < t.xF2) {
    throw PremiseViolated("x_M1 = " + t.xM1.to_string() + " < x_F2 = " + t.xF2.to_string());
  }
  if (xJ < t.xF2 || xJ > t.xM1) {
    throw InvalidThreshold("x_J = " + xJ.to_string() + " outside [x_F2, x_M1] = [" +
                           t.xF2.to_string() + ", " + t.xM1.to_string() + "]");
  }
  if (t.xL1 >= t.xF2) {
    return {true, "x_L1 >= x_F2", detail::ratio_margin(t.xL1, t.xF2)};
  }
  const double b1 = beta_roots(p.gbm()).beta1;
  const double lhs = joint_condition_lhs(p, b1, t.xL1.value(), xJ);
  const double rhs = joint_condition_rhs(p, b1);
  const double margin = rhs - lhs;
  return {margin >= 0.0, "joint condition: rhs - lhs >= 0", margin};
}

/// Left-hand side of the sequential-equilibrium inequality, increasing in I2/I1.
inline double sequential_condition_lhs(const PawlinaKortParams& p, double beta1) {
  const double k = p.I2 / p.I1;
  const double q = detail::pos(p.D11 - p.D01) / (p.D10 - p.D00);
  return (beta1 - 1.0) * k + std::pow(k, 1.0 - beta1) * std::pow(q, beta1);
}

inline double sequential_condition_rhs(const PawlinaKortParams& p, double beta1) {
  const double den = p.D10 - p.D00;
  const double q = detail::pos(p.D11 - p.D01) / den;
  return beta1 * ((p.D10 - p.D01) / den - (p.D10 - p.D11) / den * std::pow(q, beta1 - 1.0));
}

/// Does firm 1 lead at its monopoly threshold with firm 2 following at x_F2?
inline ExistenceVerdict sequential_equilibrium(const PawlinaKortParams& p) {
  const auto t = thresholds(p);
  if (!(t.xL1 < t.xF2)) {
    throw NotApplicable("sequential test requires x_L1 < x_F2 (x_L1 = " + t.xL1.to_string() +
                        ", x_F2 = " + t.xF2.to_string() + ")");
  }
  if (t.xL1 >= t.xF1) {
    return {true, "x_L1 >= x_F1", detail::ratio_margin(t.xL1, t.xF1)};
  }
  const double b1 = beta_roots(p.gbm()).beta1;
  const double margin = sequential_condition_lhs(p, b1) - sequential_condition_rhs(p, b1);
  return {margin >= 0.0, "sequential condition: lhs - rhs >= 0", margin};
}

struct StateInterval {
  double lo = 0.0;
  Threshold hi;
};

/// States above x_F2 where an immediate joint investment is inefficient for
/// firm 1, so equilibria with alternating joint-investment zones exist.
inline std::optional<StateInterval> inefficient_joint_intervals(const PawlinaKortParams& p) {
  const auto t = thresholds(p);
  if (t.xF2.is_infinite()) return std::nullopt;
  const double gain = detail::pos(p.D11 - p.D00);
  const double x = t.xF2.value();
  if (!(gain * x < p.r * p.I1)) return std::nullopt;
  StateInterval out;
  out.lo = x;
  out.hi = gain > 0.0 ? Threshold::at(p.r * p.I1 / gain) : Threshold::infinite();
  return out;
}

struct GrenadierReport {
  double beta1 = 0.0;
  double x_F = 0.0;
  double x_L = 0.0;
  double x_Delta = 0.0;
  double x_M = 0.0;
  bool region_nonempty = false;
  PreemptionRegion region;

  bool no_delay = false;         ///< D2 e^{-(r-mu)delta} x_F >= rI + R
  double no_delay_margin = 0.0;  ///< lhs - rhs of the primitive inequality
  double gamma_bound_printed = 0.0;
  double gamma_bound_restated = 0.0;
  bool printed_form_holds = false;  ///< gamma <= printed bound
  bool forms_disagree = false;      ///< printed verdict differs from the primitive one

  /// Falling-demand preemption: solved only when the no-delay test fails.
  std::optional<TwoSidedRegion> falling_demand;

  double gamma_avoid_first = 0.0;
  double gamma_avoid_second = 0.0;
  bool joint_avoidance = false;
};

namespace detail {

/// (rI/R + 1) * factor with the R = 0 limit.
inline double rent_scaled(double r, double I, double R, double factor) {
  if (R > 0.0) return (r * I / R + 1.0) * factor;
  if (factor == 0.0) return 0.0;
  return factor > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline GrenadierReport grenadier_analysis(const GrenadierParams& p) {
  const auto m = from_grenadier(p);
  const auto t = thresholds(m);
  const auto g = p.gbm();
  GrenadierReport out;
  out.beta1 = beta_roots(g).beta1;
  out.x_F = t.xF1.value();
  out.x_L = t.xL1.value();
  out.x_Delta = t.xDelta2.value();
  out.x_M = t.xM1.value();
  out.region = preemption_region(m);
  out.region_nonempty = !out.region.empty;

  const double f = p.delay_factor();
  const double lhs = p.D2 * f * out.x_F;
  const double rhs = p.r * p.I + p.R;
  out.no_delay = lhs >= rhs;
  out.no_delay_margin = lhs - rhs;

  const double b1 = out.beta1;
  const double gap = p.r - p.mu;
  out.gamma_bound_printed = detail::rent_scaled(p.r, p.I, p.R, 1.0 - (b1 - 1.0) / (b1 * gap));
  out.gamma_bound_restated =
      detail::rent_scaled(p.r, p.I, p.R, 1.0 - p.r * (b1 - 1.0) / (b1 * gap));
  out.printed_form_holds = p.gamma <= out.gamma_bound_printed;
  out.forms_disagree = out.printed_form_holds != out.no_delay;

  if (!out.no_delay && g.sigma > 0.0) {
    out.falling_demand = two_sided_leader_region(g, p.D2 * f, p.I + p.R / p.r, out.x_F,
                                                 Threshold::at(out.x_M));
  }

  out.gamma_avoid_first = detail::rent_scaled(p.r, p.I, p.R, 1.0 - p.D2 / p.D1);
  double second_factor = 0.0;
  if (p.D1 != p.D2) {
    const double inner =
        b1 * (p.D1 - p.D2) / (std::pow(p.D1, b1) - std::pow(p.D2, b1));
    second_factor = 1.0 - p.D2 * std::pow(inner, 1.0 / (b1 - 1.0));
  }
  out.gamma_avoid_second = detail::rent_scaled(p.r, p.I, p.R, second_factor);
  out.joint_avoidance = p.gamma >= out.gamma_avoid_first || p.gamma >= out.gamma_avoid_second;
  return out;
}

}  // namespace preempt
