#pragma once

// Leader, follower and simultaneous-investment values as functions of the
// current state (before anyone has invested), investment thresholds, and the
// preemption region where both firms strictly prefer leading.

#include <algorithm>
#include <cmath>
#include <optional>

#include "preempt/error.hpp"
#include "preempt/root_find.hpp"
#include "preempt/stopping.hpp"
#include "preempt/streams_model.hpp"
#include "preempt/threshold.hpp"

namespace preempt {

struct ThresholdSet {
  Threshold xF1;      ///< firm 1 follower: sF -> sB
  Threshold xF2;      ///< firm 2 follower
  Threshold xL1;      ///< firm 1 monopoly leader: s0 -> sL
  Threshold xL2;
  Threshold xM1;      ///< firm 1 joint investment: s0 -> sB
  Threshold xDelta2;  ///< firm 2 laggard-to-leader stream: sF -> sL
};

namespace detail {

inline Threshold stream_threshold(const AffineStream& from, const AffineStream& to,
                                  const GbmParams& g) {
  return switch_threshold(SwitchProblem(from, to, g));
}

inline int other(int i) { return i == 1 ? 2 : 1; }

}  // namespace detail

inline ThresholdSet thresholds(const AffineStreamModel& m) {
  const auto& g = m.gbm();
  const auto& f1 = m.firm(1);
  const auto& f2 = m.firm(2);
  ThresholdSet t;
  t.xF1 = detail::stream_threshold(f1.sF, f1.sB, g);
  t.xF2 = detail::stream_threshold(f2.sF, f2.sB, g);
  t.xL1 = detail::stream_threshold(f1.s0, f1.sL, g);
  t.xL2 = detail::stream_threshold(f2.s0, f2.sL, g);
  t.xM1 = detail::stream_threshold(f1.s0, f1.sB, g);
  t.xDelta2 = detail::stream_threshold(f2.sF, f2.sL, g);
  return t;
}

inline ThresholdSet thresholds(const PawlinaKortParams& p) { return thresholds(from_pawlina_kort(p)); }

inline Threshold follower_threshold(const AffineStreamModel& m, int i) {
  const auto& f = m.firm(i);
  return detail::stream_threshold(f.sF, f.sB, m.gbm());
}

/// Closed-form state-value functions with thresholds and beta1 cached, for
/// repeated evaluation.
class ValueFunctions {
 public:
  explicit ValueFunctions(const AffineStreamModel& m) : m_(m), t_(preempt::thresholds(m)) {
    beta1_ = beta_roots(m.gbm()).beta1;
  }

  const AffineStreamModel& model() const noexcept { return m_; }
  const ThresholdSet& thresholds() const noexcept { return t_; }
  double beta1() const noexcept { return beta1_; }

  Threshold follower_threshold(int i) const { return i == 1 ? t_.xF1 : t_.xF2; }

  double perpetuity(const AffineStream& s, double x) const {
    return perpetuity_value(s, m_.gbm(), x);
  }

  /// M^i: both firms invest now.
  double simultaneous(int i, double x) const { return perpetuity(m_.firm(i).sB, x); }

  /// F^i: the rival invests now, firm i follows optimally.
  double follower(int i, double x) const {
    const auto& f = m_.firm(i);
    const Threshold xF = follower_threshold(i);
    if (xF.is_infinite()) return perpetuity(f.sF, x);
    const double lvl = xF.value();
    if (x >= lvl) return perpetuity(f.sB, x);
    return perpetuity(f.sF, x) + perpetuity(f.sB - f.sF, lvl) * std::pow(x / lvl, beta1_);
  }

  /// L^i: firm i invests now, the rival follows at its follower threshold.
  double leader(int i, double x) const {
    const auto& f = m_.firm(i);
    const Threshold xFj = follower_threshold(detail::other(i));
    if (xFj.is_infinite()) return perpetuity(f.sL, x);
    const double lvl = xFj.value();
    if (x >= lvl) return perpetuity(f.sB, x);
    return perpetuity(f.sL, x) - perpetuity(f.sL - f.sB, lvl) * std::pow(x / lvl, beta1_);
  }

  /// Value before anyone invests if nobody ever does.
  double idle(int i, double x) const { return perpetuity(m_.firm(i).s0, x); }

 private:
  AffineStreamModel m_;
  ThresholdSet t_;
  double beta1_ = 0.0;
};

inline double simultaneous_value(const AffineStreamModel& m, int i, double x) {
  return ValueFunctions(m).simultaneous(i, x);
}

inline double follower_value(const AffineStreamModel& m, int i, double x) {
  return ValueFunctions(m).follower(i, x);
}

inline double leader_value(const AffineStreamModel& m, int i, double x) {
  return ValueFunctions(m).leader(i, x);
}

inline double leader_value(const PawlinaKortParams& p, int i, double x) {
  return leader_value(from_pawlina_kort(p), i, x);
}
inline double follower_value(const PawlinaKortParams& p, int i, double x) {
  return follower_value(from_pawlina_kort(p), i, x);
}
inline double simultaneous_value(const PawlinaKortParams& p, int i, double x) {
  return simultaneous_value(from_pawlina_kort(p), i, x);
}

/// L^i(x) - F^i(x).
inline double leader_advantage(const AffineStreamModel& m, int i, double x) {
  return leader_value(m, i, x) - follower_value(m, i, x);
}

/// Open interval (lower, upper) of states with L^2 > F^2.
struct PreemptionRegion {
  bool empty = true;
  double lower = 0.0;
  Threshold upper;

  bool contains(double x) const { return !empty && x > lower && upper > x; }
};

namespace detail {

/// Zero of the firm-2 net flow from leading instead of lagging; h <= 0 below it.
inline double preemption_floor(const AffineStreamModel& m) {
  const auto& f2 = m.firm(2);
  const AffineStream d = f2.sL - f2.sF;
  const auto& g = m.gbm();
  return -d.b / g.r * (g.r - g.mu) / d.a;
}

inline PreemptionRegion bracket_region(const AffineStreamModel& m, const ThresholdSet& t) {
  PreemptionRegion out;
  const ValueFunctions vf(m);
  auto h = [&](double x) { return vf.leader(2, x) - vf.follower(2, x); };
  const double xd = t.xDelta2.value();
  if (!(h(xd) > 0.0)) return out;
  const double floor = preemption_floor(m);
  if (!(floor < xd)) throw NumericalFailure("preemption floor not below x_Delta^2");
  out.empty = false;
  out.lower = floor > 0.0 ? bisect(h, floor, xd).root : bisect(h, 1e-12 * xd, xd).root;
  if (t.xF1 == t.xF2) {
    out.upper = t.xF2;
  } else {
    out.upper = Threshold::at(bisect(h, xd, t.xF1.value()).root);
  }
  return out;
}

}  // namespace detail

/// Region for a general affine model: nonempty iff L^2 > F^2 at x_Delta^2.
inline PreemptionRegion preemption_region(const AffineStreamModel& m) {
  const auto t = thresholds(m);
  if (t.xDelta2.is_infinite()) return {};
  if (t.xF1.is_infinite()) {
    // The rival never follows: L^2 - F^2 is the perpetuity of sL - sF.
    PreemptionRegion out;
    out.empty = false;
    out.lower = std::max(0.0, detail::preemption_floor(m));
    out.upper = Threshold::infinite();
    return out;
  }
  if (t.xDelta2 >= t.xF1) return {};
  return detail::bracket_region(m, t);
}

/// Closed-form emptiness test for the asymmetric-cost model: the region is
/// nonempty iff (I2/I1)^(beta1-1) < ((1+c)^beta1 - 1)/(beta1 c) with
/// c = (D10-D11)/(D11-D01), or D10 > D01 >= D11.
inline bool cost_ratio_test(const PawlinaKortParams& p) {
  p.validate();
  if (!(p.D10 > std::max(p.D11, p.D01))) return false;
  if (p.D11 <= p.D01) return true;
  const double b1 = beta_roots(p.gbm()).beta1;
  const double c = (p.D10 - p.D11) / (p.D11 - p.D01);
  const double lhs = std::pow(p.I2 / p.I1, b1 - 1.0);
  const double rhs = (std::pow(1.0 + c, b1) - 1.0) / (b1 * c);
  return lhs < rhs;
}

/// Cost ratio I2/I1 at which the region collapses to the single point x_Delta^2.
inline double boundary_cost_ratio(double beta1, double c) {
  return std::pow((std::pow(1.0 + c, beta1) - 1.0) / (beta1 * c), 1.0 / (beta1 - 1.0));
}

inline PreemptionRegion preemption_region(const PawlinaKortParams& p) {
  const auto m = from_pawlina_kort(p);
  if (!cost_ratio_test(p)) return {};
  const auto t = thresholds(m);
  if (t.xF1.is_infinite()) {
    PreemptionRegion out;
    out.empty = false;
    out.lower = (p.r - p.mu) * p.I2 / (p.D10 - p.D01);
    return out;
  }
  return detail::bracket_region(m, t);
}

}  // namespace preempt
