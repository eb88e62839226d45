#pragma once
#include <optional>
#include <string>
#include <vector>

#include "riemalpha/calculus.hpp"

namespace riemalpha {

enum class Termination { Converged, MaxIter, SingularDerivative, LeftInjectivityBall };

std::string to_string(Termination t);

struct NewtonOptions {
  int max_iter = 64;
  double stop_tol = 1e-14;  // threshold on the step norm beta_k
};

struct NewtonTrace {
  std::vector<Point> points;       // z_0 .. z_N
  std::vector<double> step_norms;  // beta_k = d(z_{k+1}, z_k), one per step
  // Step k asked for exp of a vector at least as long as the injectivity
  // radius. The step is still taken; the flag preserves the diagnostic.
  std::vector<bool> ball_exits;
  std::optional<Point> root;
  std::vector<double> distances_to_root;  // one per point, when root is set
  Termination termination = Termination::MaxIter;
};

// exp_z of the Newton direction. Throws SingularDerivative.
Point newton_step(const Problem& problem, const Point& z);

// Iterates newton_step until beta_k < stop_tol, max_iter steps were taken,
// or the derivative degenerates. Failures are encoded in termination, never
// thrown. A run that ends unconverged after stepping past the injectivity
// radius reports LeftInjectivityBall.
NewtonTrace newton_sequence(const Problem& problem, const Point& z0,
                            const NewtonOptions& opts = {});

// Records the root and fills distances_to_root.
void attach_root(NewtonTrace& trace, const Point& root);

struct QuadraticBoundReport {
  double d0 = 0.0;     // d(z_0, root)
  double beta0 = 0.0;  // first step norm (0 for a one-point trace)
  std::vector<bool> distance_ok;       // d(z_k) <= (1/2)^{2^k-1} d0 + floor
  std::vector<bool> step_ok;           // beta_k <= (1/2)^{2^k-1} beta0 + floor
  std::optional<double> drift_bound;   // echo of the certificate bound
  bool drift_ok = true;                // d0 <= drift_bound + floor
  bool all_ok = true;
};

// Checks the doubly exponential distance and step bounds against a known
// root, with additive floor 1e-13 (1 + d0). The optional drift_bound is a
// certificate's sigma*beta value; when present the report also checks
// d0 <= drift_bound. Throws MissingRoot when no root is available.
QuadraticBoundReport verify_quadratic_bound(const NewtonTrace& trace,
                                            const std::optional<Point>& root = std::nullopt,
                                            const std::optional<double>& drift_bound = std::nullopt);

}  // namespace riemalpha
