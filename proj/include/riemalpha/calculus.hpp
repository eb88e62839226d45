#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "riemalpha/problem.hpp"

namespace riemalpha {

// Condition-number threshold beyond which a tangent-frame derivative counts
// as singular (double-precision working limit).
inline constexpr double kSingularCond = 1e14;

// Orthonormal basis of T_z with coordinate transforms. Frame coordinates
// carry the metric to the Euclidean 2-norm, so all invariant norms below are
// plain vector norms.
struct TangentFrame {
  Point base;
  std::vector<VectorXd> basis;

  VectorXd to_frame(const VectorXd& ambient) const;
  VectorXd to_ambient(const VectorXd& coords) const;
};

TangentFrame tangent_frame(const Point& z);

// First-order data of f (or of the transported pullback of X) at z: the
// value and the n x n derivative matrix, both in frame coordinates for
// fields and codomain coordinates for maps.
struct LocalSystem {
  TangentFrame frame;
  VectorXd value;
  MatrixXd jacobian;
  double cond = 0.0;
  bool singular = false;

  // jacobian^{-1} rhs; throws SingularDerivative when singular.
  VectorXd solve(const VectorXd& rhs) const;
};

LocalSystem local_system(const Problem& problem, const Point& z);

// Taylor coefficients c_0..c_K of t -> f(exp_z(tu)) for maps, or of the
// transported pullback t -> P^{-1} X(exp_z(tu)) for fields (coefficients
// tangent at the base point, ambient coordinates). The direction is stored
// normalized, so t is arclength.
struct GeodesicJet {
  Point base;
  VectorXd direction;
  int order = 0;
  std::vector<VectorXd> coefficients;
  // min(r_z, 1/gamma) estimated from the solved coefficients; evaluation
  // beyond it has no convergence guarantee.
  double convergence_radius = 0.0;

  // Partial sum at t; throws JetDivergence outside the convergence ball.
  VectorXd eval(double t) const;
};

GeodesicJet geodesic_jet(const Problem& problem, const Point& z, const Tangent& u, int order);

// Curve coefficients without the GeodesicJet wrapper (arbitrary, possibly
// non-unit direction). Used by the derivative assembly and gamma sampling.
std::vector<VectorXd> curve_coeffs(const Problem& problem, const Point& z, const VectorXd& u,
                                   int order);

// Argument of exp in the Newton step, as a tangent vector at z. Throws
// SingularDerivative.
Tangent newton_direction(const Problem& problem, const Point& z);

// Newton step length ||Df(z)^{-1} f(z)||_z; +inf at singular points.
double beta(const Problem& problem, const Point& z);

struct GammaOptions {
  int k_max = 12;
  int n_dirs = 64;
  std::uint64_t seed = 20260822;
  bool polish = true;  // gradient-ascent refinement of the best directions
};

struct GammaBracket {
  double lower = 0.0;
  double upper = 0.0;
  int k_hit = 0;             // order achieving the lower sup (0 when none)
  int truncation_order = 0;  // K_max used
  int directions_sampled = 0;
};

// Directional estimate of gamma. The lower end is the sampled sup of
// ||Df(z)^{-1} c_k(u)||^{1/(k-1)} over unit directions; the upper end
// multiplies it by the polarization bound. Infinite bracket at singular
// points.
GammaBracket gamma_estimate(const Problem& problem, const Point& z, const GammaOptions& opts = {});

// sup over 2 <= k <= k_max of (k^k/k!)^{1/(k-1)}, the symmetric multilinear
// polarization bound applied order by order.
double polarization_factor(int k_max);

// The sampling-and-polish driver behind gamma_estimate, shared with the
// complex pipeline so both run identical direction sets and refinement
// steps. solved_norms maps a unit direction in R^n to the vector of
// ||Df^{-1} c_k|| for k = 2..k_max (size k_max-1).
struct DirectionalModel {
  int n = 0;
  std::function<VectorXd(const VectorXd&)> solved_norms;
  std::optional<VectorXd> preferred_dir;  // e.g. the Newton direction
};

GammaBracket gamma_from_directional(const DirectionalModel& model, const GammaOptions& opts);

}  // namespace riemalpha
