#pragma once

// Single-agent stopping problems with affine payoffs under GBM: perpetuities,
// threshold switching (optionally capped by an upper barrier), and switching
// constrained to the exit time of an interval.

#include <cmath>
#include <optional>
#include <string>

#include "preempt/error.hpp"
#include "preempt/root_find.hpp"
#include "preempt/streams_model.hpp"
#include "preempt/threshold.hpp"

namespace preempt {

/// E[int_0^inf e^{-rt} (a x_t + b) dt] given x_0 = x.
inline double perpetuity_value(const AffineStream& s, const GbmParams& g, double x) {
  return s.a * x / (g.r - g.mu) + s.b / g.r;
}

/// Switching irreversibly from `from` to `to`, paying the capitalized cost
/// I = (from.b - to.b) / r for a gain of D = to.a - from.a per unit state.
class SwitchProblem {
 public:
  SwitchProblem(AffineStream from, AffineStream to, GbmParams g) : from_(from), to_(to), g_(g) {
    g_.validate();
    if (!(to.b - from.b < 0.0)) {
      throw InvalidParameter("switching must carry a strictly positive capitalized cost");
    }
  }

  const AffineStream& from() const noexcept { return from_; }
  const AffineStream& to() const noexcept { return to_; }
  const GbmParams& gbm() const noexcept { return g_; }

  double gain() const noexcept { return to_.a - from_.a; }
  double cost() const noexcept { return (from_.b - to_.b) / g_.r; }

  /// Value of switching immediately at state x, net of the `from` perpetuity.
  double switch_payoff(double x) const { return perpetuity_value(to_ - from_, g_, x); }

 private:
  AffineStream from_;
  AffineStream to_;
  GbmParams g_;
};

/// beta1/(beta1-1) * I (r-mu) / D for D > 0, +inf otherwise.
inline Threshold switch_threshold(const SwitchProblem& p) {
  const double d = p.gain();
  if (!(d > 0.0)) return Threshold::infinite();
  const auto roots = beta_roots(p.gbm());
  return Threshold::at(markup(roots) * p.cost() * (p.gbm().r - p.gbm().mu) / d);
}

/// Optimal rule when stopping is forced once x reaches `cap`.
inline Threshold constrained_threshold(const SwitchProblem& p, Threshold cap) {
  if (!(cap > 0.0)) throw InvalidParameter("upper barrier must be > 0");
  return min(switch_threshold(p), cap);
}

/// Value of the threshold rule "switch once x >= level" from state x,
/// including the `from` perpetuity. Exact for GBM via the first-passage
/// discount factor (x/level)^beta1.
inline double threshold_rule_value(const SwitchProblem& p, Threshold level, double x) {
  const auto& g = p.gbm();
  const double base = perpetuity_value(p.from(), g, x);
  if (level.is_infinite()) return base;
  const double lv = level.value();
  if (x >= lv) return base + p.switch_payoff(x);
  const double beta1 = beta_roots(g).beta1;
  return base + p.switch_payoff(lv) * std::pow(x / lv, beta1);
}

enum class TwoSidedKind { InvestEverywhere, WaitUntilExit, InteriorThreshold };

inline const char* to_string(TwoSidedKind k) {
  switch (k) {
    case TwoSidedKind::InvestEverywhere: return "invest_everywhere";
    case TwoSidedKind::WaitUntilExit: return "wait_until_exit";
    case TwoSidedKind::InteriorThreshold: return "interior_threshold";
  }
  return "?";
}

/// Solution of the leader problem on (lower, upper) where stopping is forced
/// when the state leaves the interval. The value function on the waiting part
/// is A x^beta1 + B x^beta2.
struct TwoSidedRegion {
  TwoSidedKind kind = TwoSidedKind::InvestEverywhere;
  std::optional<double> x_hat;  ///< InteriorThreshold only
  /// Root of the pasting equation even when it lies at or above `upper`
  /// (smooth pasting fails there and the rule is to wait for the exit).
  std::optional<double> pasting_root;
  double lower = 0.0;
  Threshold upper;
  double A = 0.0;
  double B = 0.0;
  double gain = 0.0;  ///< D
  double cost = 0.0;  ///< I
  double beta1 = 0.0;
  double beta2 = 0.0;
  double growth_gap = 0.0;  ///< r - mu

  /// Point where the investment region begins above `lower`.
  Threshold investment_start() const {
    switch (kind) {
      case TwoSidedKind::InvestEverywhere: return Threshold::at(lower);
      case TwoSidedKind::WaitUntilExit: return upper;
      case TwoSidedKind::InteriorThreshold: return Threshold::at(*x_hat);
    }
    return upper;
  }

  double stop_payoff(double x) const { return gain * x / growth_gap - cost; }

  /// Value function of the constrained problem for x in [lower, upper].
  double value(double x) const {
    if (kind == TwoSidedKind::InvestEverywhere || x <= lower) return stop_payoff(x);
    if (x >= investment_start()) return stop_payoff(x);
    return A * std::pow(x, beta1) + B * std::pow(x, beta2);
  }
};

namespace detail {

/// Coefficients (A, B) matching the stop payoff at `lower` and at x, returned
/// scaled as alpha = A lower^beta1 and beta = B lower^beta2 for conditioning.
struct ScaledAB {
  double alpha;
  double beta;
};

inline ScaledAB scaled_value_matching(double gain, double cost, double growth_gap, double b1,
                                      double b2, double lower, double x) {
  const double y = x / lower;
  const double g_lo = gain * lower / growth_gap - cost;
  const double g_x = gain * x / growth_gap - cost;
  const double y1 = std::pow(y, b1);
  const double y2 = std::pow(y, b2);
  const double det = y2 - y1;
  return {(g_lo * y2 - g_x) / det, (g_x - g_lo * y1) / det};
}

}  // namespace detail

/// Left side minus right side of the pasting condition
/// (beta1-1) A(x) x^beta1 + (beta2-1) B(x) x^beta2 = I.
inline double pasting_residual(const GbmParams& g, const BetaRoots& roots, double gain, double cost,
                               double lower, double x) {
  const double b1 = roots.beta1;
  const double b2 = *roots.beta2;
  const auto ab = detail::scaled_value_matching(gain, cost, g.r - g.mu, b1, b2, lower, x);
  const double y = x / lower;
  return (b1 - 1.0) * ab.alpha * std::pow(y, b1) + (b2 - 1.0) * ab.beta * std::pow(y, b2) - cost;
}

/// Solves the leader problem with forced investment once the state leaves
/// (lower, upper). Requires sigma > 0.
inline TwoSidedRegion two_sided_leader_region(const GbmParams& g, double gain, double cost,
                                              double lower, Threshold upper) {
  g.validate();
  if (g.sigma == 0.0) throw InvalidParameter("two-sided leader problem requires sigma > 0");
  if (!(lower > 0.0) || !std::isfinite(lower)) throw InvalidParameter("lower barrier must be > 0");
  if (!(cost > 0.0)) throw InvalidParameter("cost must be > 0");
  if (upper < lower) throw InvalidParameter("upper barrier must be >= lower barrier");

  const auto roots = beta_roots(g);
  TwoSidedRegion out;
  out.lower = lower;
  out.upper = upper;
  out.gain = gain;
  out.cost = cost;
  out.beta1 = roots.beta1;
  out.beta2 = *roots.beta2;
  out.growth_gap = g.r - g.mu;

  auto set_ab = [&](double exit_point) {
    const auto ab = detail::scaled_value_matching(gain, cost, out.growth_gap, out.beta1, out.beta2,
                                                  lower, exit_point);
    out.A = ab.alpha * std::pow(lower, -out.beta1);
    out.B = ab.beta * std::pow(lower, -out.beta2);
  };

  if (upper == lower || lower * gain >= g.r * cost) {
    out.kind = TwoSidedKind::InvestEverywhere;
    return out;
  }
  if (!(gain > 0.0)) {
    out.kind = TwoSidedKind::WaitUntilExit;
    if (upper.is_finite()) {
      set_ab(upper.value());
    } else {
      out.A = 0.0;
      out.B = out.stop_payoff(lower) * std::pow(lower, -out.beta2);
    }
    return out;
  }

  // Bracket: the residual is <= 0 at the zero-flow level rI/D and > 0 at the
  // unconstrained threshold.
  const double left = g.r * cost / gain;
  const double right = markup(roots) * cost * out.growth_gap / gain;
  auto f = [&](double x) { return pasting_residual(g, roots, gain, cost, lower, x); };
  double root;
  const double f_left = f(left);
  if (f_left > 0.0) {
    if (f_left > 1e-12 * cost) {
      throw NumericalFailure("pasting residual positive at the zero-flow level");
    }
    root = left;
  } else {
    root = bisect(f, left, right, {1e-10, 200}).root;
  }
  out.pasting_root = root;

  if (upper.is_finite() && root >= upper.value()) {
    // Smooth pasting fails: the optimum is to wait until the state exits.
    out.kind = TwoSidedKind::WaitUntilExit;
    set_ab(upper.value());
    return out;
  }
  out.kind = TwoSidedKind::InteriorThreshold;
  out.x_hat = root;
  set_ab(root);
  return out;
}

}  // namespace preempt
