#pragma once

// Composite analyses behind the command-line tool: the normalized (c, d)
// parameter sweep and the oracle verification suite.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "preempt/equilibrium.hpp"
#include "preempt/error.hpp"
#include "preempt/lattice.hpp"
#include "preempt/monte_carlo.hpp"
#include "preempt/payoffs.hpp"
#include "preempt/stopping.hpp"

namespace preempt {

/// Relative revenue parameters: c = (D10-D11)/(D11-D01), d = (D11-D00)/(D11-D01).
struct NormalizedShape {
  double c = 0.0;
  double d = 0.0;
};

inline NormalizedShape normalized_shape(const PawlinaKortParams& p) {
  const double unit = p.D11 - p.D01;
  if (!(unit > 0.0)) throw InvalidParameter("normalization requires D11 > D01");
  return {(p.D10 - p.D11) / unit, (p.D11 - p.D00) / unit};
}

/// Sets D10 and D00 from (c, d), keeping D01, D11 and I1, and puts I2 at the
/// cost ratio where the preemption region collapses to x_Delta^2.
inline PawlinaKortParams with_shape_at_collapse(PawlinaKortParams p, NormalizedShape s) {
  if (!(s.c > 0.0)) throw InvalidParameter("c must be > 0");
  const double unit = p.D11 - p.D01;
  if (!(unit > 0.0)) throw InvalidParameter("normalization requires D11 > D01");
  p.D10 = p.D11 + s.c * unit;
  p.D00 = p.D11 - s.d * unit;
  p.I2 = p.I1 * boundary_cost_ratio(beta_roots(p.gbm()).beta1, s.c);
  p.validate();
  return p;
}

struct SweepRow {
  double value = 0.0;  ///< swept parameter
  double bar_x = 0.0;
  std::optional<double> x_hat;  ///< absent when x_L1 <= bar_x (leader region unconstrained)
  Threshold xL1;
  Threshold xF2;
  Threshold xM1;
  std::optional<bool> joint_exists;  ///< at x_J = x_M1; absent when the premise fails
  std::optional<bool> seq_exists;    ///< absent when not applicable
};

/// One point of the collapsed-region sweep: bar_x = x_Delta^2 and the start
/// of firm 1's constrained investment region above it.
inline SweepRow sweep_point(const PawlinaKortParams& base, NormalizedShape s, double value) {
  const auto p = with_shape_at_collapse(base, s);
  const auto t = thresholds(p);
  SweepRow row;
  row.value = value;
  row.bar_x = t.xDelta2.value();
  row.xL1 = t.xL1;
  row.xF2 = t.xF2;
  row.xM1 = t.xM1;
  if (row.bar_x < t.xL1) {
    const auto reg = two_sided_leader_region(p.gbm(), p.D10 - p.D00, p.I1, row.bar_x, t.xF2);
    row.x_hat = reg.investment_start().as_double();
  }
  try {
    row.joint_exists = joint_equilibrium(p, t.xM1).exists;
  } catch (const PremiseViolated&) {
  }
  try {
    row.seq_exists = sequential_equilibrium(p).exists;
  } catch (const NotApplicable&) {
  }
  return row;
}

struct OracleSettings {
  int n_steps = 2000;
  double horizon = 0.0;  ///< 0 selects 5 / r
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  double lattice_rel_tol = 5e-3;
  double mc_z_tol = 3.0;
};

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerificationReport {
  double x0 = 0.0;
  std::vector<OracleCheck> checks;
  DeviationReport deviation;
  std::vector<std::string> warnings;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return deviation.passed();
  }
};

/// Default starting state: the model's x0 if given, else half of x_F2.
inline double verification_state(const AffineStreamModel& m, bool x0_given) {
  if (x0_given) return m.gbm().x0;
  const auto t = thresholds(m);
  if (t.xF2.is_finite()) return 0.5 * t.xF2.value();
  return m.gbm().x0;
}

/// Lattice and Monte Carlo values against closed forms, and the deviation
/// check of the candidate implied by `eq`.
inline VerificationReport verify_model(const AffineStreamModel& m, const EquilibriumReport& eq,
                                       double x0, const OracleSettings& os) {
  const auto& g = m.gbm();
  const double horizon = os.horizon > 0.0 ? os.horizon : 5.0 / g.r;
  const LatticeSpec spec{os.n_steps, horizon, x0};
  const ValueFunctions vf(m);
  const auto& t = vf.thresholds();
  VerificationReport rep;
  rep.x0 = x0;

  auto lattice_check = [&](std::string name, double value, double ref) {
    const double err = std::abs(value / ref - 1.0);
    const bool ok = err <= os.lattice_rel_tol;
    rep.checks.push_back({std::move(name), value, ref, err, os.lattice_rel_tol, ok});
    if (!ok) {
      rep.warnings.push_back(rep.checks.back().name +
                             ": lattice not converged; increase --steps");
    }
  };

  for (int i = 1; i <= 2; ++i) {
    const auto& f = m.firm(i);
    const auto lat = lattice_stopping(spec, g, f.sF, f.sB);
    lattice_check("lattice_follower_firm" + std::to_string(i), lat.value, vf.follower(i, x0));
  }

  const auto& f1 = m.firm(1);
  const SwitchProblem mono(f1.s0, f1.sL, g);
  const Threshold cap = t.xF2.is_finite() ? constrained_threshold(mono, t.xF2) : switch_threshold(mono);
  const auto lat_mono = lattice_stopping(spec, g, f1.s0, f1.sL, {0.0, t.xF2});
  lattice_check("lattice_constrained_monopoly_firm1", lat_mono.value,
                threshold_rule_value(mono, cap, x0));

  MonteCarloSpec mcs;
  mcs.n_paths = os.n_paths;
  mcs.seed = os.seed;
  const auto& f2 = m.firm(2);
  if (t.xF2.is_finite()) {
    const auto mc = monte_carlo_switch(g, f2.sF, f2.sB, InvestmentRule::at_or_above(t.xF2.value()),
                                       x0, mcs);
    const double ref = vf.follower(2, x0);
    const double z = mc.std_error > 0.0 ? std::abs(mc.mean - ref) / mc.std_error
                                        : (mc.mean == ref ? 0.0 : std::numeric_limits<double>::infinity());
    rep.checks.push_back({"monte_carlo_follower_firm2", mc.mean, ref, z, os.mc_z_tol, z <= os.mc_z_tol});
  }

  rep.deviation = one_shot_deviation_check(spec, m, candidate_from_report(eq));
  return rep;
}

}  // namespace preempt
