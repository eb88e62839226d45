#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riemalpha/calculus.hpp"

namespace riemalpha {

// 1 - 4u + 2u^2; decreasing on [0, 1 - sqrt(2)/2] with a root at the right
// endpoint.
double psi(double u);

// The five universal constants. Each is re-derived numerically; the decimal
// values quoted in tests are acceptance references, not sources.
struct TheoryConstants {
  double alpha0 = 0.0;  // root of 2u = psi(u)^2 on [0, 1 - sqrt(2)/2]
  double sigma = 0.0;   // sum_{k>=0} (1/2)^{2^k - 1}
  double s0 = 0.0;      // 1/(sigma + ((1-sigma a0)^2/psi(sigma a0))(1 + sigma/(1-sigma a0)))
  double nu0 = 0.0;     // smallest positive root of nu/psi(nu)^2 = alpha0
  double t0 = 0.0;      // s0/(s0 + (1-nu0)/psi(nu0))
};

TheoryConstants compute_constants();
const TheoryConstants& theory_constants();  // computed once, then shared

// (K + 2 - sqrt(K^2 + 4K + 2)) / 2, the admissible step contraction for a
// geodesic spreading constant K >= 1.
double nu_spread(double k);

enum class RadiusTerm { InjectivityRadius, CurvatureGammaTerm, AltInjectivityTerm, AltGammaTerm };
std::string to_string(RadiusTerm t);

struct BasinRadius {
  double value = 0.0;
  RadiusTerm binding_term = RadiusTerm::InjectivityRadius;
  std::optional<double> k_used;  // empty for the alt radius
};

// min(r, nu_spread(K)/gamma). An unbounded spreading constant (empty k) is
// refused with DegenerateRadius; the alt radius is a separate claim and
// callers fall back to it explicitly. gamma = +inf is DegenerateRadius too
// (no basin on the singular locus); gamma = 0 makes the curvature term
// infinite, so r binds.
BasinRadius gamma_radius(std::optional<double> k, double gamma, double r);

// min(t0 r, nu0/gamma); needs no spreading bound.
BasinRadius gamma_radius_alt(double gamma, double r);

enum class RadiusComparison { ClassicSharper, AltSharper, Equal };
std::string to_string(RadiusComparison c);

RadiusComparison radius_comparator(double k, double gamma, double r, double tol = 1e-9);

// Spreading constant at which the two radii cross for r = +inf, located by
// bisection on K; closed form 1/(2 nu0) + nu0 - 2.
double radius_crossover_k();

enum class Verdict { Certified, NotCertified, SingularDerivative };
std::string to_string(Verdict v);

struct AlphaCertificate {
  double beta = 0.0;
  GammaBracket gamma_bracket;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;  // beta * gamma_bracket.upper; decides the verdict
  double r_z = 0.0;
  Verdict verdict = Verdict::NotCertified;
  std::optional<double> root_distance_bound;  // sigma * beta when certified
};

// Certified iff beta <= s0 r_z and alpha_upper < alpha0. The conservative
// bracket end is deliberate: a certificate must not rest on a gamma
// underestimate. On certification a zero lies within sigma*beta of z.
AlphaCertificate alpha_certify(const Problem& problem, const Point& z,
                               const GammaOptions& opts = {});

// Radius around a verified zero containing no other zero and no singular
// point. Uses the curvature radius with the manifold's spreading constant;
// when that constant is unbounded, falls back to the alt radius. Throws
// NotAZero when beta(zero) > 1e-10 and DegenerateRadius when gamma is
// infinite.
double separation_bound(const Problem& problem, const Point& zero,
                        const GammaOptions& opts = {});

struct LemmaRow {
  std::string name;
  int samples = 0;
  int passes = 0;
  // min over samples of (rhs + slack) - lhs; nonnegative when every sample
  // passed. Slack is 1e-9 (1 + |rhs|) throughout.
  double worst_margin = 0.0;
  bool holds() const { return passes == samples; }
};

struct LemmaReport {
  std::vector<LemmaRow> rows;
  bool all_hold = true;
  const LemmaRow* find(const std::string& name) const;
};

// Samples points y = exp(t u) around base in the admissible nu-range and
// checks the contraction inequalities behind the convergence theory:
//   derivative_ratio      ||Df(y)^-1 Df(x)|| <= (1-nu)^2/psi(nu)
//   linearized_residual   ||Df(Z)^-1(Df(y) log_y(Z) + f(y))|| <= nu d/(1-nu)^2
//   step_displacement     ||log_y(N(y)) - log_y(Z)|| <= nu d/psi(nu)
//   invariant_drift       beta/gamma growth bounds between x and y
//   newton_contraction    beta and alpha decay across one Newton step
//   radius_slip           r_x - d(x,y) <= r_y
// plus two scalar rows, binomial_series and spread_scalars. Each row is fed
// by the samples satisfying its own hypothesis, so counts can differ: the
// residual and displacement rows need base to be a zero (beta <= 1e-10), and
// the contraction row needs the step invariant at the sample small enough.
// When the base itself satisfies the step hypothesis, draws outside it are
// redrawn closer in, so every row reaches the full sample count there.
// Vector fields run the same checks with parallel transport moving tangent
// data between the points involved. Samples are drawn deterministically from
// the seed and evaluated concurrently; inadmissible draws are redrawn closer
// in.
LemmaReport lemma_suite(const Problem& problem, const Point& base, int n_samples = 200,
                        std::uint64_t seed = 20260822);

}  // namespace riemalpha
