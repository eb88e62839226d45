#include "riemalpha/newton.hpp"

#include <cmath>

#include "riemalpha/errors.hpp"

namespace riemalpha {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIter: return "MaxIter";
    case Termination::SingularDerivative: return "SingularDerivative";
    case Termination::LeftInjectivityBall: return "LeftInjectivityBall";
  }
  return "Unknown";
}

Point newton_step(const Problem& problem, const Point& z) {
  return exp_map(z, newton_direction(problem, z));
}

NewtonTrace newton_sequence(const Problem& problem, const Point& z0,
                            const NewtonOptions& opts) {
  NewtonTrace trace;
  trace.points.push_back(z0);
  Point z = z0;
  bool exited = false;
  for (int k = 0;; ++k) {
    const LocalSystem sys = local_system(problem, z);
    if (sys.singular) {
      trace.termination = Termination::SingularDerivative;
      break;
    }
    const Eigen::VectorXd w = sys.solve(sys.value);
    const double beta_k = w.norm();
    if (beta_k < opts.stop_tol) {
      trace.termination = Termination::Converged;
      break;
    }
    if (k >= opts.max_iter) {
      trace.termination = Termination::MaxIter;
      break;
    }
    const bool exit_k = !(beta_k < injectivity_radius(z));
    const Tangent step = make_tangent(z, sys.frame.to_ambient(-w));
    z = exp_map(z, step);
    trace.points.push_back(z);
    trace.step_norms.push_back(beta_k);
    trace.ball_exits.push_back(exit_k);
    exited = exited || exit_k;
  }
  if (trace.termination != Termination::Converged && exited)
    trace.termination = Termination::LeftInjectivityBall;
  return trace;
}

void attach_root(NewtonTrace& trace, const Point& root) {
  trace.root = root;
  trace.distances_to_root.clear();
  trace.distances_to_root.reserve(trace.points.size());
  for (const Point& z : trace.points)
    trace.distances_to_root.push_back(distance(z, root));
}

namespace {

// (1/2)^{2^k - 1}; underflows to 0 for k around 11, which is fine.
double contraction_factor(int k) {
  return std::pow(0.5, std::pow(2.0, k) - 1.0);
}

}  // namespace

QuadraticBoundReport verify_quadratic_bound(const NewtonTrace& trace,
                                            const std::optional<Point>& root,
                                            const std::optional<double>& drift_bound) {
  const std::optional<Point>& zero = root ? root : trace.root;
  if (!zero)
    throw MissingRoot("verify_quadratic_bound: no root attached and none supplied");

  QuadraticBoundReport report;
  report.d0 = distance(trace.points.front(), *zero);
  report.beta0 = trace.step_norms.empty() ? 0.0 : trace.step_norms.front();
  const double floor = 1e-13 * (1.0 + report.d0);

  report.distance_ok.reserve(trace.points.size());
  for (std::size_t k = 0; k < trace.points.size(); ++k) {
    const double dk = distance(trace.points[k], *zero);
    const bool ok = dk <= contraction_factor(static_cast<int>(k)) * report.d0 + floor;
    report.distance_ok.push_back(ok);
    report.all_ok = report.all_ok && ok;
  }
  report.step_ok.reserve(trace.step_norms.size());
  for (std::size_t k = 0; k < trace.step_norms.size(); ++k) {
    const bool ok =
        trace.step_norms[k] <= contraction_factor(static_cast<int>(k)) * report.beta0 + floor;
    report.step_ok.push_back(ok);
    report.all_ok = report.all_ok && ok;
  }
  if (drift_bound) {
    report.drift_bound = drift_bound;
    report.drift_ok = report.d0 <= *drift_bound + floor;
    report.all_ok = report.all_ok && report.drift_ok;
  }
  return report;
}

}  // namespace riemalpha
