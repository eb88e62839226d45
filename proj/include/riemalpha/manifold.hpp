#pragma once
#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "riemalpha/errors.hpp"

namespace riemalpha {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A complete, smooth Riemannian manifold given in ambient coordinates, with
// the handful of primitives intrinsic Newton needs: exponential map and its
// local inverse, geodesic distance, parallel transport along minimizing
// geodesics, injectivity radius and the geodesic-spreading constant, plus
// exact Taylor coefficients of geodesics and of transported-pullback vector
// fields (closed forms for every geometry here, so jet arithmetic upstream
// never differentiates numerically).
//
// All point/tangent arguments are raw ambient coordinate vectors assumed to
// satisfy the constraint already; project_point / project_tangent repair
// drift. Matrix manifolds store entries row-major.
class Manifold {
 public:
  virtual ~Manifold() = default;

  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }

  virtual VectorXd project_point(const VectorXd& x) const = 0;
  virtual VectorXd project_tangent(const VectorXd& z, const VectorXd& w) const = 0;

  // Riemannian metric at z; positive definite on the tangent space.
  virtual double inner(const VectorXd& z, const VectorXd& u, const VectorXd& v) const {
    (void)z;
    return u.dot(v);
  }
  double norm(const VectorXd& z, const VectorXd& u) const {
    const double q = inner(z, u, u);
    return q > 0.0 ? std::sqrt(q) : 0.0;
  }

  virtual VectorXd exp(const VectorXd& z, const VectorXd& u) const = 0;
  // Throws OutOfInjectivityBall when d(z, y) >= injectivity_radius(z).
  virtual VectorXd log(const VectorXd& z, const VectorXd& y) const = 0;
  virtual double distance(const VectorXd& x, const VectorXd& y) const = 0;
  // Parallel transport of v from T_z to T_y along the minimizing geodesic.
  virtual VectorXd transport(const VectorXd& z, const VectorXd& y, const VectorXd& v) const = 0;

  virtual double injectivity_radius(const VectorXd& z) const = 0;
  // nullopt means the constant is unbounded on the full injectivity ball
  // (hyperbolic case); use spreading_in_ball for a ball-restricted bound.
  virtual std::optional<double> spreading_constant(const VectorXd& z) const = 0;
  virtual double spreading_in_ball(const VectorXd& z, double rho) const {
    (void)rho;
    return spreading_constant(z).value();
  }

  // Taylor coefficients g_0..g_K of t -> exp_z(t u), ambient coordinates,
  // for an arbitrary (not necessarily unit) tangent u.
  virtual std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const = 0;

  // Given coefficients of t -> X(c(t)) along c(t) = exp_z(t u) (each a
  // tangent vector at c(t), ambient coordinates), returns coefficients of
  // the transported pullback t -> P^{-1}_{z,c(t)} X(c(t)), a curve in T_z.
  virtual std::vector<VectorXd> pullback_coeffs(const VectorXd& z, const VectorXd& u,
                                                const std::vector<VectorXd>& field_coeffs) const = 0;

  virtual VectorXd random_point(std::mt19937_64& rng) const = 0;
  virtual VectorXd random_tangent(const VectorXd& z, std::mt19937_64& rng) const;

  // Orthonormal tangent basis at z (dim() vectors, Gram = identity in the
  // metric at z). Deterministic: pivoted Gram-Schmidt over projected ambient
  // axes, with one re-orthogonalization pass.
  virtual std::vector<VectorXd> tangent_basis(const VectorXd& z) const;

 protected:
  Manifold(std::string id, int dim, int ambient_dim) : id_(std::move(id)), dim_(dim), ambient_dim_(ambient_dim) {}

 private:
  std::string id_;
  int dim_;
  int ambient_dim_;
};

// Parses ids of the form "euclidean:n", "sphere:n", "so:n", "o:n",
// "projective:n", "hyperbolic:n". Throws UnknownProblem on anything else.
std::shared_ptr<const Manifold> make_manifold(const std::string& id);

struct Point {
  std::shared_ptr<const Manifold> man;
  VectorXd x;
};

struct Tangent {
  Point base;
  VectorXd v;
};

Point make_point(std::shared_ptr<const Manifold> man, const VectorXd& coords);
Tangent make_tangent(const Point& base, const VectorXd& coords);

Point exp_map(const Point& z, const Tangent& u);
Tangent log_map(const Point& z, const Point& y);
double distance(const Point& x, const Point& y);
Tangent transport(const Tangent& v, const Point& y);
double injectivity_radius(const Point& z);
std::optional<double> spreading_constant(const Point& z);
Tangent tangent_projection(const Point& z, const VectorXd& ambient);
Point random_point(const std::shared_ptr<const Manifold>& man, std::mt19937_64& rng);
Tangent random_tangent(const Point& z, std::mt19937_64& rng);

}  // namespace riemalpha
