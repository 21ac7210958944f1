// Command-line front end: thresholds, value curves, equilibrium reports,
// existence tests, the collapsed-region sweep and oracle verification.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "preempt/model_io.hpp"
#include "preempt/preempt.hpp"

namespace {

using nlohmann::ordered_json;
using namespace preempt;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInputError = 2;
constexpr int kNotApplicable = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// 12 significant digits in JSON; infinities as the string "inf".
ordered_json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return std::stod(fmt12(v));
}

ordered_json num(const Threshold& t) { return num(t.as_double()); }

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;

  double at(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("invalid number '" + s + "' in " + what);
  }
}

Grid parse_grid(const std::string& spec, const std::string& what) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw InputError(what + " must have the form a:b:n");
  Grid g;
  g.lo = parse_double(parts[0], what);
  g.hi = parse_double(parts[1], what);
  const double n = parse_double(parts[2], what);
  if (n != std::floor(n) || n < 2 || n > 1e7) throw InputError(what + ": n must be an integer >= 2");
  g.n = static_cast<int>(n);
  if (!(g.lo < g.hi) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) {
    throw InputError(what + ": grid must be strictly increasing");
  }
  return g;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

ordered_json thresholds_json(const ThresholdSet& t) {
  ordered_json j;
  j["xF1"] = num(t.xF1);
  j["xF2"] = num(t.xF2);
  j["xL1"] = num(t.xL1);
  j["xL2"] = num(t.xL2);
  j["xM1"] = num(t.xM1);
  j["xDelta2"] = num(t.xDelta2);
  return j;
}

ordered_json region_json(const PreemptionRegion& r) {
  ordered_json j;
  j["empty"] = r.empty;
  if (!r.empty) {
    j["lower"] = num(r.lower);
    j["upper"] = num(r.upper);
  }
  return j;
}

ordered_json two_sided_json(const TwoSidedRegion& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["lower"] = num(r.lower);
  j["upper"] = num(r.upper);
  j["x_hat"] = r.x_hat ? num(*r.x_hat) : ordered_json(nullptr);
  j["pasting_root"] = r.pasting_root ? num(*r.pasting_root) : ordered_json(nullptr);
  j["A"] = num(r.A);
  j["B"] = num(r.B);
  return j;
}

ordered_json verdict_json(const ExistenceVerdict& v) {
  ordered_json j;
  j["exists"] = v.exists;
  j["binding_condition"] = v.binding_condition;
  j["margin"] = num(v.margin);
  return j;
}

PreemptionRegion region_for(const LoadedModel& lm) {
  return lm.pawlina_kort ? preemption_region(*lm.pawlina_kort) : preemption_region(lm.model);
}

EquilibriumReport classify_for(const LoadedModel& lm) {
  return classify_spe(lm.model, region_for(lm));
}

const PawlinaKortParams& require_pk(const LoadedModel& lm, const char* cmd) {
  if (!lm.pawlina_kort) {
    throw InputError(std::string(cmd) + " requires a pawlina-kort, weeds or ft model");
  }
  return *lm.pawlina_kort;
}

void emit(Output& out, const ordered_json& j) { out.stream() << j.dump(2) << "\n"; }

int cmd_thresholds(const LoadedModel& lm, Output& out) {
  const auto roots = beta_roots(lm.model.gbm());
  ordered_json j;
  j["model"] = to_string(lm.kind);
  j["effective_r"] = num(lm.effective_r);
  j["beta1"] = num(roots.beta1);
  j["beta2"] = roots.beta2 ? num(*roots.beta2) : ordered_json(nullptr);
  j["thresholds"] = thresholds_json(thresholds(lm.model));
  emit(out, j);
  return kOk;
}

int cmd_curves(const LoadedModel& lm, const std::optional<std::string>& grid_spec, Output& out) {
  const ValueFunctions vf(lm.model);
  Grid grid;
  if (grid_spec) {
    grid = parse_grid(*grid_spec, "--grid");
    if (!(grid.lo > 0.0)) throw InputError("--grid: states must be > 0");
  } else {
    const auto& t = vf.thresholds();
    const double ref = t.xF2.is_finite() ? t.xF2.value() : lm.model.gbm().x0;
    grid = {0.02 * ref, 1.5 * ref, 200};
  }
  const auto region = region_for(lm);
  auto& os = out.stream();
  os << "x,L1,F1,M1,L2,F2,M2,in_preemption\n";
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.at(i);
    os << fmt12(x) << ',' << fmt12(vf.leader(1, x)) << ',' << fmt12(vf.follower(1, x)) << ','
       << fmt12(vf.simultaneous(1, x)) << ',' << fmt12(vf.leader(2, x)) << ','
       << fmt12(vf.follower(2, x)) << ',' << fmt12(vf.simultaneous(2, x)) << ','
       << (region.contains(x) ? 1 : 0) << '\n';
  }
  return kOk;
}

int cmd_classify(const LoadedModel& lm, Output& out) {
  const auto rep = classify_for(lm);
  ordered_json j;
  j["case"] = to_string(rep.region_case);
  j["unique"] = rep.unique;
  j["leader_rule"] = rep.leader_rule;
  j["thresholds"] = thresholds_json(rep.thresholds);
  j["preemption"] = region_json(rep.preemption);
  ordered_json segs = ordered_json::array();
  for (const auto& s : rep.segments) {
    ordered_json sj;
    sj["lo"] = num(s.lo);
    sj["hi"] = num(s.hi);
    sj["lo_closed"] = s.lo_closed;
    sj["hi_closed"] = s.hi_closed;
    sj["label"] = to_string(s.label);
    segs.push_back(sj);
  }
  j["segments"] = segs;
  j["constrained_leader"] =
      rep.constrained_leader ? two_sided_json(*rep.constrained_leader) : ordered_json(nullptr);
  emit(out, j);
  return kOk;
}

int cmd_joint(const LoadedModel& lm, const std::optional<double>& xj, Output& out) {
  const auto& p = require_pk(lm, "joint");
  const auto t = thresholds(p);
  Threshold x = t.xM1;
  if (xj) {
    if (!(*xj >= 0.0)) throw InputError("--xj must be >= 0");
    x = Threshold::from_double(*xj);
  } else if (t.xM1 < t.xF2) {
    throw PremiseViolated("x_M1 = " + t.xM1.to_string() + " < x_F2 = " + t.xF2.to_string());
  }
  ExistenceVerdict v;
  try {
    v = joint_equilibrium(p, x);
  } catch (const InvalidThreshold& e) {
    throw InputError(e.what());
  }
  auto j = verdict_json(v);
  j["x_J"] = num(x);
  emit(out, j);
  return kOk;
}

int cmd_seq(const LoadedModel& lm, Output& out) {
  const auto& p = require_pk(lm, "seq");
  auto j = verdict_json(sequential_equilibrium(p));
  const auto region = preemption_region(p);
  j["xL1"] = num(thresholds(p).xL1);
  j["preemption"] = region_json(region);
  emit(out, j);
  return kOk;
}

int cmd_grenadier(const LoadedModel& lm, Output& out) {
  if (!lm.grenadier) throw InputError("grenadier requires a grenadier model");
  const auto r = grenadier_analysis(*lm.grenadier);
  ordered_json j;
  j["beta1"] = num(r.beta1);
  j["x_F"] = num(r.x_F);
  j["x_L"] = num(r.x_L);
  j["x_Delta"] = num(r.x_Delta);
  j["x_M"] = num(r.x_M);
  j["region_nonempty"] = r.region_nonempty;
  j["preemption"] = region_json(r.region);
  ordered_json nd;
  nd["holds"] = r.no_delay;
  nd["margin"] = num(r.no_delay_margin);
  nd["gamma_bound_restated"] = num(r.gamma_bound_restated);
  nd["gamma_bound_printed"] = num(r.gamma_bound_printed);
  nd["printed_form_holds"] = r.printed_form_holds;
  nd["forms_disagree"] = r.forms_disagree;
  j["no_delay"] = nd;
  if (r.falling_demand) {
    ordered_json fd = two_sided_json(*r.falling_demand);
    fd["zone_lo"] = num(r.x_F);
    fd["zone_hi"] = num(r.falling_demand->investment_start());
    j["falling_demand"] = fd;
  } else {
    j["falling_demand"] = nullptr;
  }
  ordered_json ja;
  ja["holds"] = r.joint_avoidance;
  ja["gamma_bound_first"] = num(r.gamma_avoid_first);
  ja["gamma_bound_second"] = num(r.gamma_avoid_second);
  j["joint_avoidance"] = ja;
  emit(out, j);
  return kOk;
}

int cmd_sweep(const LoadedModel& lm, const std::optional<std::string>& sweep_spec, Output& out) {
  const auto& p = require_pk(lm, "sweep");
  if (!sweep_spec) throw InputError("sweep requires --sweep name=a:b:n");
  const auto eq = sweep_spec->find('=');
  if (eq == std::string::npos) throw InputError("--sweep must have the form name=a:b:n");
  const std::string name = sweep_spec->substr(0, eq);
  if (name != "c" && name != "d") throw InputError("--sweep parameter must be c or d");
  const Grid grid = parse_grid(sweep_spec->substr(eq + 1), "--sweep");
  const NormalizedShape base = normalized_shape(p);

  auto flag = [](const std::optional<bool>& b) -> std::string {
    if (!b) return "na";
    return *b ? "true" : "false";
  };
  std::vector<SweepRow> rows(static_cast<std::size_t>(grid.n));
  for (int i = 0; i < grid.n; ++i) {
    NormalizedShape s = base;
    const double v = grid.at(i);
    (name == "c" ? s.c : s.d) = v;
    rows[static_cast<std::size_t>(i)] = sweep_point(p, s, v);
  }
  auto& os = out.stream();
  os << name << ",bar_x,x_hat,xL1,xF2,xM1,joint_exists,seq_exists\n";
  for (const auto& r : rows) {
    os << fmt12(r.value) << ',' << fmt12(r.bar_x) << ',' << (r.x_hat ? fmt12(*r.x_hat) : "na")
       << ',' << fmt12(r.xL1.as_double()) << ',' << fmt12(r.xF2.as_double()) << ','
       << fmt12(r.xM1.as_double()) << ',' << flag(r.joint_exists) << ',' << flag(r.seq_exists)
       << '\n';
  }
  return kOk;
}

int cmd_verify(const LoadedModel& lm, const OracleSettings& os, Output& out) {
  const double x0 = verification_state(lm.model, lm.x0_given);
  const auto rep = verify_model(lm.model, classify_for(lm), x0, os);
  ordered_json j;
  j["x0"] = num(rep.x0);
  j["n_steps"] = os.n_steps;
  j["horizon"] = num(os.horizon > 0.0 ? os.horizon : 5.0 / lm.model.gbm().r);
  j["n_paths"] = os.n_paths;
  j["seed"] = os.seed;
  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = num(c.value);
    cj["reference"] = num(c.reference);
    cj["error"] = num(c.error);
    cj["tolerance"] = num(c.tolerance);
    cj["passed"] = c.passed;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  const auto& d = rep.deviation;
  ordered_json dj;
  dj["epsilon"] = num(d.epsilon);
  dj["scale"] = num(d.scale);
  dj["nodes_checked"] = d.nodes_checked;
  dj["violations"] = d.violation_count;
  dj["max_gain_firm1"] = num(d.max_gain[0]);
  dj["max_gain_firm2"] = num(d.max_gain[1]);
  dj["passed"] = d.passed();
  j["deviation_check"] = dj;
  j["warnings"] = rep.warnings;
  j["passed"] = rep.passed();
  emit(out, j);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  return rep.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-firm investment timing games under geometric Brownian motion"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_path;
  std::optional<std::string> grid;
  std::optional<std::string> sweep;
  std::optional<double> xj;
  OracleSettings oracle;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", model_path, "model JSON file")->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
  };

  auto* thresholds_cmd = app.add_subcommand("thresholds", "investment thresholds and beta roots");
  auto* curves_cmd = app.add_subcommand("curves", "leader/follower/simultaneous values on a grid");
  auto* classify_cmd = app.add_subcommand("classify", "equilibrium behavior along the state axis");
  auto* joint_cmd = app.add_subcommand("joint", "joint-investment equilibrium test");
  auto* seq_cmd = app.add_subcommand("seq", "sequential equilibrium test");
  auto* gren_cmd = app.add_subcommand("grenadier", "redevelopment game analysis");
  auto* sweep_cmd = app.add_subcommand("sweep", "collapsed-region sweep over c or d");
  auto* verify_cmd = app.add_subcommand("verify", "lattice and Monte Carlo verification");
  for (auto* s : {thresholds_cmd, curves_cmd, classify_cmd, joint_cmd, seq_cmd, gren_cmd, sweep_cmd,
                  verify_cmd}) {
    add_common(s);
  }
  curves_cmd->add_option("--grid", grid, "state grid a:b:n");
  sweep_cmd->add_option("--sweep", sweep, "swept parameter name=a:b:n (c or d)");
  joint_cmd->add_option("--xj", xj, "joint threshold (default x_M1)");
  verify_cmd->add_option("--steps", oracle.n_steps, "lattice steps");
  verify_cmd->add_option("--horizon", oracle.horizon, "lattice horizon (default 5/r)");
  verify_cmd->add_option("--paths", oracle.n_paths, "Monte Carlo paths");
  verify_cmd->add_option("--seed", oracle.seed, "Monte Carlo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (verify_cmd->parsed() && (oracle.n_steps < 2 || oracle.n_paths < 1 || oracle.horizon < 0)) {
      throw InputError("--steps must be >= 2, --paths >= 1 and --horizon > 0");
    }
    const auto lm = load_model(model_path);
    Output out(out_path);
    if (thresholds_cmd->parsed()) return cmd_thresholds(lm, out);
    if (curves_cmd->parsed()) return cmd_curves(lm, grid, out);
    if (classify_cmd->parsed()) return cmd_classify(lm, out);
    if (joint_cmd->parsed()) return cmd_joint(lm, xj, out);
    if (seq_cmd->parsed()) return cmd_seq(lm, out);
    if (gren_cmd->parsed()) return cmd_grenadier(lm, out);
    if (sweep_cmd->parsed()) return cmd_sweep(lm, sweep, out);
    if (verify_cmd->parsed()) return cmd_verify(lm, oracle, out);
  } catch (const PremiseViolated& e) {
    std::cerr << "premise violated: " << e.what() << "\n";
    return kNotApplicable;
  } catch (const NotApplicable& e) {
    std::cerr << "not applicable: " << e.what() << "\n";
    return kNotApplicable;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidOrdering& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DegenerateDynamics& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidLattice& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
