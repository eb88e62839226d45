#pragma once
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "riemalpha/jet.hpp"
#include "riemalpha/manifold.hpp"

namespace riemalpha {

enum class ProblemKind { Map, VectorField };

// Optional closed-form override for curve coefficients: (z, unit u, K) ->
// Taylor coefficients of t -> f(exp_z(tu)) in codomain coordinates, or of the
// transported pullback of X in ambient coordinates at z.
using JetHook =
    std::function<std::vector<VectorXd>(const VectorXd&, const VectorXd&, int)>;

// A square system on a manifold: either a mapping into R^m with m equal to
// the manifold dimension, or a vector field. evaluate_jets runs the same
// formula on truncated Taylor inputs (the ambient-coordinate extension), so
// composing it with geodesic jets yields exact curve coefficients.
struct Problem {
  std::string id;
  ProblemKind kind = ProblemKind::Map;
  std::shared_ptr<const Manifold> manifold;
  int codomain_dim = 0;  // equals manifold->dim()

  // Maps: z (ambient) -> value in R^m. Fields: z -> tangent vector at z,
  // ambient coordinates.
  std::function<VectorXd(const VectorXd&)> evaluate;
  std::function<std::vector<Jet>(const std::vector<Jet>&)> evaluate_jets;
  JetHook jet_hook;  // may be empty

  std::vector<Point> known_zeros;
};

// A holomorphic square system on C^n (Euclidean case), with enough structure
// to realify it and to run the complex pipeline directly.
struct ComplexMapProblem {
  std::string id;
  int dim = 0;
  std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> evaluate;
  std::function<std::vector<CJet>(const std::vector<CJet>&)> evaluate_jets;
  std::vector<Eigen::VectorXcd> known_zeros;
};

}  // namespace riemalpha
