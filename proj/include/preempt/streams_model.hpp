#pragma once

// Parametric two-firm investment model: geometric Brownian motion state and
// four affine revenue streams per firm, plus adapters for the standard
// literature specifications.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "preempt/error.hpp"

namespace preempt {

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be finite");
}

}  // namespace detail

/// dx = mu x dt + sigma x dB, discounted at rate r.
struct GbmParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double x0 = 1.0;

  /// Throws InvalidParameter unless r > max(mu, 0), sigma >= 0 and x0 > 0.
  void validate() const {
    detail::require_finite(r, "r");
    detail::require_finite(mu, "mu");
    detail::require_finite(sigma, "sigma");
    detail::require_finite(x0, "x0");
    detail::require(r > 0.0 && r > mu, "discount rate must satisfy r > max(mu, 0)");
    detail::require(sigma >= 0.0, "sigma must be >= 0");
    detail::require(x0 > 0.0, "x0 must be > 0");
  }

  bool deterministic() const noexcept { return sigma == 0.0; }
};

/// Revenue flow a*x + b per unit time (undiscounted). Capitalized investment
/// cost I enters as b = -r*I.
struct AffineStream {
  double a = 0.0;
  double b = 0.0;

  friend AffineStream operator-(const AffineStream& l, const AffineStream& r) {
    return {l.a - r.a, l.b - r.b};
  }
  friend AffineStream operator+(const AffineStream& l, const AffineStream& r) {
    return {l.a + r.a, l.b + r.b};
  }
  friend bool operator==(const AffineStream&, const AffineStream&) = default;

  double flow(double x) const noexcept { return a * x + b; }
};

/// Componentwise dominance: lhs >= rhs for every state x > 0.
inline bool dominates(const AffineStream& lhs, const AffineStream& rhs) noexcept {
  return lhs.a >= rhs.a && lhs.b >= rhs.b;
}

/// Streams of one firm: before any investment (s0), as sole investor (sL),
/// as laggard after the rival invested (sF), and after both invested (sB).
struct FirmStreams {
  AffineStream s0;
  AffineStream sL;
  AffineStream sF;
  AffineStream sB;

  friend bool operator==(const FirmStreams&, const FirmStreams&) = default;
};

/// Validated duopoly. Firm 1 is the (weakly) advantaged firm.
class AffineStreamModel {
 public:
  AffineStreamModel(GbmParams gbm, FirmStreams firm1, FirmStreams firm2)
      : gbm_(gbm), firms_{firm1, firm2} {
    gbm_.validate();
    for (int i = 1; i <= 2; ++i) {
      const auto& f = firm(i);
      for (const auto* s : {&f.s0, &f.sL, &f.sF, &f.sB}) {
        detail::require_finite(s->a, "stream coefficient");
        detail::require_finite(s->b, "stream intercept");
      }
      const std::string tag = std::to_string(i);
      if (!dominates(f.sL, f.sB)) fail("pi^L" + tag + " >= pi^B" + tag);
      if (!dominates(f.s0, f.sF)) fail("pi^0" + tag + " >= pi^F" + tag);
    }
    const auto& f1 = firm(1);
    const auto& f2 = firm(2);
    if (!dominates(f1.sB - f1.sF, f2.sB - f2.sF)) fail("pi^B2 - pi^F2 <= pi^B1 - pi^F1");
    if (!dominates(f1.sL - f1.sF, f2.sL - f2.sF)) fail("pi^L2 - pi^F2 <= pi^L1 - pi^F1");
  }

  const GbmParams& gbm() const noexcept { return gbm_; }

  /// i in {1, 2}.
  const FirmStreams& firm(int i) const {
    if (i != 1 && i != 2) throw InvalidParameter("firm index must be 1 or 2");
    return firms_[static_cast<std::size_t>(i - 1)];
  }

  bool symmetric() const noexcept { return firms_[0] == firms_[1]; }

 private:
  [[noreturn]] static void fail(const std::string& inequality) {
    throw InvalidOrdering("stream ordering violated: " + inequality);
  }

  GbmParams gbm_;
  std::array<FirmStreams, 2> firms_;
};

/// Asymmetric-cost duopoly with multiplicative demand shocks.
struct PawlinaKortParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double D00 = 0.0;
  double D01 = 0.0;
  double D10 = 0.0;
  double D11 = 0.0;
  double I1 = 1.0;
  double I2 = 1.0;
  double x0 = 1.0;

  GbmParams gbm() const { return {r, mu, sigma, x0}; }

  void validate() const {
    gbm().validate();
    for (double v : {D00, D01, D10, D11, I1, I2}) detail::require_finite(v, "revenue or cost");
    if (!(D10 >= D11)) throw InvalidOrdering("D10 >= D11 violated");
    if (!(D00 >= D01)) throw InvalidOrdering("D00 >= D01 violated");
    if (!(I1 > 0.0)) throw InvalidOrdering("I1 > 0 violated");
    if (!(I2 >= I1)) throw InvalidOrdering("I2 >= I1 violated");
  }
};

/// Symmetric real-estate redevelopment game with construction delay.
struct GrenadierParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double delta = 0.0;  ///< construction time
  double R = 0.0;      ///< pre-investment rent
  double gamma = 0.0;  ///< fraction of rent lost when the rival redevelops
  double I = 1.0;
  double D1 = 1.0;
  double D2 = 1.0;
  double x0 = 1.0;

  GbmParams gbm() const { return {r, mu, sigma, x0}; }

  void validate() const {
    gbm().validate();
    for (double v : {delta, R, gamma, I, D1, D2}) detail::require_finite(v, "parameter");
    detail::require(delta >= 0.0, "delta must be >= 0");
    detail::require(R >= 0.0, "R must be >= 0");
    detail::require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
    detail::require(I > 0.0, "I must be > 0");
    if (!(D2 > 0.0)) throw InvalidOrdering("D2 > 0 violated");
    if (!(D2 <= D1)) throw InvalidOrdering("D2 <= D1 violated");
  }

  /// e^{-(r-mu) delta}: present-value factor of rents that start after the delay.
  double delay_factor() const { return std::exp(-(r - mu) * delta); }
};

/// R&D race with success arrival rate h.
struct WeedsParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double h = 0.0;
  double K = 1.0;
  double x0 = 1.0;

  void validate() const {
    for (double v : {r, mu, sigma, h, K, x0}) detail::require_finite(v, "parameter");
    detail::require(h > 0.0, "h must be > 0");
    detail::require(K > 0.0, "K must be > 0");
    detail::require(r >= 0.0, "r must be >= 0");
    GbmParams{r + h, mu, sigma, x0}.validate();
  }
};

/// Deterministic adoption game with discounted cost e^{-(r+a)t} and flow
/// profits pi_k(n) for a firm with k adoptions among n total.
struct FTParams {
  double r = 0.0;
  double a = 0.0;
  double pi0_0 = 0.0;
  double pi0_1 = 0.0;
  double pi1_1 = 0.0;
  double pi1_2 = 0.0;

  void validate() const {
    for (double v : {r, a, pi0_0, pi0_1, pi1_1, pi1_2}) detail::require_finite(v, "parameter");
    detail::require(r > 0.0, "r must be > 0");
    GbmParams{r + a, a, 0.0, 1.0}.validate();
  }
};

/// Roots of sigma^2/2 beta(beta-1) + mu beta - r = 0.
struct BetaRoots {
  double beta1 = 0.0;                ///< > 1
  std::optional<double> beta2;       ///< < 0; absent in the deterministic limit
};

/// Quadratic residual sigma^2/2 beta(beta-1) + mu beta - r.
inline double beta_residual(const GbmParams& g, double beta) {
  return 0.5 * g.sigma * g.sigma * beta * (beta - 1.0) + g.mu * beta - g.r;
}

/// Stable closed form (no cancellation in either root). For sigma = 0 the
/// positive root degenerates to r/mu, which requires mu > 0.
inline BetaRoots beta_roots(const GbmParams& g) {
  g.validate();
  if (g.sigma == 0.0) {
    if (!(g.mu > 0.0)) {
      throw DegenerateDynamics("sigma = 0 requires mu > 0 for a finite positive root");
    }
    return {g.r / g.mu, std::nullopt};
  }
  const double qa = 0.5 * g.sigma * g.sigma;
  const double qb = g.mu - qa;
  const double qc = -g.r;
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  // q has the sign of -qb (or is negative when qb = 0) and never cancels.
  const double q = -0.5 * (qb + (qb >= 0.0 ? disc : -disc));
  const double r1 = q / qa;
  const double r2 = qc / q;
  return {std::max(r1, r2), std::min(r1, r2)};
}

/// beta1 / (beta1 - 1), the option-value markup on the zero-NPV threshold.
inline double markup(const BetaRoots& roots) { return roots.beta1 / (roots.beta1 - 1.0); }

inline FirmStreams pawlina_kort_streams(const PawlinaKortParams& p, double cost) {
  return {{p.D00, 0.0}, {p.D10, -p.r * cost}, {p.D01, 0.0}, {p.D11, -p.r * cost}};
}

inline AffineStreamModel from_pawlina_kort(const PawlinaKortParams& p) {
  p.validate();
  return AffineStreamModel(p.gbm(), pawlina_kort_streams(p, p.I1), pawlina_kort_streams(p, p.I2));
}

inline AffineStreamModel from_grenadier(const GrenadierParams& p) {
  p.validate();
  const double f = p.delay_factor();
  const FirmStreams s{{0.0, p.R}, {p.D1 * f, -p.r * p.I}, {0.0, (1.0 - p.gamma) * p.R},
                      {p.D2 * f, -p.r * p.I}};
  return AffineStreamModel(p.gbm(), s, s);
}

/// Equivalent asymmetric-cost specification with the augmented discount rate.
inline PawlinaKortParams weeds_as_pawlina_kort(const WeedsParams& p) {
  p.validate();
  const double re = p.r + p.h;
  PawlinaKortParams pk;
  pk.r = re;
  pk.mu = p.mu;
  pk.sigma = p.sigma;
  pk.D00 = 0.0;
  pk.D01 = 0.0;
  pk.D10 = p.h;
  pk.D11 = p.h * (re - p.mu) / (re + p.h - p.mu);
  pk.I1 = p.K;
  pk.I2 = p.K;
  pk.x0 = p.x0;
  return pk;
}

struct WeedsModel {
  AffineStreamModel model;
  double effective_r;
};

inline WeedsModel from_weeds(const WeedsParams& p) {
  const auto pk = weeds_as_pawlina_kort(p);
  return {from_pawlina_kort(pk), pk.r};
}

/// Deterministic equivalent: the state grows at rate a from x0 = 1 and the
/// unit adoption cost is capitalized at the augmented rate r + a.
inline PawlinaKortParams ft_as_pawlina_kort(const FTParams& p) {
  p.validate();
  PawlinaKortParams pk;
  pk.r = p.r + p.a;
  pk.mu = p.a;
  pk.sigma = 0.0;
  pk.D00 = p.pi0_0;
  pk.D01 = p.pi0_1;
  pk.D10 = p.pi1_1;
  pk.D11 = p.pi1_2;
  pk.I1 = 1.0;
  pk.I2 = 1.0;
  pk.x0 = 1.0;
  return pk;
}

inline AffineStreamModel from_ft(const FTParams& p) { return from_pawlina_kort(ft_as_pawlina_kort(p)); }

}  // namespace preempt
