#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "riemalpha/calculus.hpp"
#include "riemalpha/problem.hpp"

namespace riemalpha {

// Rayleigh-style eigenvector field X(x) = Ax - <x,Ax>x on the unit sphere.
// Zeros are the unit eigenvectors (both signs), registered from a dense
// symmetric eigensolver. Throws NotSymmetric.
Problem eigen_field(const MatrixXd& a);

// Same field on real projective space (one zero per eigenline).
Problem eigen_field_projective(const MatrixXd& a);

// f_i(x) = x^T q[i] x + (b x)_i + c_i on euclidean:n. Carries a closed-form
// jet hook (the series truncates at order 2).
Problem quadratic_euclidean(const MatrixXd& b, const VectorXd& c, const std::vector<MatrixXd>& q);

Problem quad1d();  // x^2 - 1
Problem quad2d();  // (x1^2 - 1, x2^2 - 4)

// f(Q) = vee(skew(Q^T M)) on SO(3); zeros align Q with the polar factor of
// M. Throws SingularInput when M is singular.
Problem so3_alignment_map(const MatrixXd& m);

ComplexMapProblem complex_quad1d();  // z^2 - 1
// Dense 2-variable quadratic with seeded complex Gaussian coefficients.
ComplexMapProblem complex_quad2(std::uint64_t seed);

// Real problem on euclidean:2n with coordinates (Re z, Im z) and outputs
// (Re f, Im f). Jets run through complex jet arithmetic, so invariants match
// the complex pipeline to roundoff.
Problem realify(const ComplexMapProblem& p);

VectorXd realify_vector(const Eigen::VectorXcd& z);
Eigen::VectorXcd complexify_vector(const VectorXd& x);

// Direct complex pipeline (Euclidean C^n), for cross-checking realify.
Eigen::MatrixXcd complex_jacobian(const ComplexMapProblem& p, const Eigen::VectorXcd& z);
Eigen::VectorXcd complex_newton_direction(const ComplexMapProblem& p, const Eigen::VectorXcd& z);
Eigen::VectorXcd complex_newton_step(const ComplexMapProblem& p, const Eigen::VectorXcd& z);
double complex_beta(const ComplexMapProblem& p, const Eigen::VectorXcd& z);
GammaBracket complex_gamma_estimate(const ComplexMapProblem& p, const Eigen::VectorXcd& z,
                                    const GammaOptions& opts = {});

struct CatalogEntry {
  std::string id;
  std::string kind;      // "map" | "field"
  std::string manifold;  // manifold id
  std::string note;
};

// Constructible example ids; make_problem accepts these plus parameterized
// variants ("eigen:diag(...)", "eigen:random-spd:n:seed", "so3align:...",
// "realify:cquad2:seed"). Throws UnknownProblem.
std::vector<CatalogEntry> catalog_list();
Problem make_problem(const std::string& id);

}  // namespace riemalpha
