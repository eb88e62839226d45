#include "riemalpha/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace riemalpha {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

int clamped_order(int k_max) { return std::max(2, k_max); }

// Maximize model.solved_norms(dir)(idx) over the unit sphere by projected
// gradient ascent with backtracking. Deterministic; refines the value the
// sampling stage found. Near a smooth maximum the value error is quadratic
// in the direction error, so modest gradient accuracy suffices.
void ascend_direction(const DirectionalModel& model, int idx, VectorXd& dir, double& val) {
  const double fd_step = 1e-6;
  const int n = model.n;
  double step = 0.25;
  for (int iter = 0; iter < 80; ++iter) {
    VectorXd grad(n);
    for (int j = 0; j < n; ++j) {
      VectorXd dp = dir, dm = dir;
      dp(j) += fd_step;
      dm(j) -= fd_step;
      grad(j) = (model.solved_norms(dp.normalized())(idx) -
                 model.solved_norms(dm.normalized())(idx)) /
                (2 * fd_step);
    }
    grad -= grad.dot(dir) * dir;
    if (grad.norm() <= 1e-9 * (1.0 + std::abs(val))) break;
    bool improved = false;
    double s = step;
    for (int bt = 0; bt < 25; ++bt) {
      const VectorXd cand = (dir + s * grad).normalized();
      const double cv = model.solved_norms(cand)(idx);
      if (cv > val) {
        dir = cand;
        val = cv;
        improved = true;
        step = std::min(0.5, 2 * s);
        break;
      }
      s *= 0.5;
    }
    if (!improved) break;
  }
}

}  // namespace

VectorXd TangentFrame::to_frame(const VectorXd& ambient) const {
  VectorXd c(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = base.man->inner(base.x, ambient, basis[i]);
  return c;
}

VectorXd TangentFrame::to_ambient(const VectorXd& coords) const {
  VectorXd v = VectorXd::Zero(base.man->ambient_dim());
  for (std::size_t i = 0; i < basis.size(); ++i) v += coords(static_cast<Eigen::Index>(i)) * basis[i];
  return v;
}

TangentFrame tangent_frame(const Point& z) { return {z, z.man->tangent_basis(z.x)}; }

VectorXd LocalSystem::solve(const VectorXd& rhs) const {
  if (singular) {
    throw SingularDerivative("derivative at " + frame.base.man->id() +
                             " point is numerically singular");
  }
  return jacobian.colPivHouseholderQr().solve(rhs);
}

std::vector<VectorXd> curve_coeffs(const Problem& problem, const Point& z, const VectorXd& u,
                                   int order) {
  if (problem.jet_hook) return problem.jet_hook(z.x, u, order);
  const auto geo = problem.manifold->geodesic_coeffs(z.x, u, order);
  auto coeffs = coeffs_from_jets(problem.evaluate_jets(jets_from_coeffs(geo)));
  if (problem.kind == ProblemKind::VectorField)
    coeffs = problem.manifold->pullback_coeffs(z.x, u, coeffs);
  return coeffs;
}

LocalSystem local_system(const Problem& problem, const Point& z) {
  LocalSystem ls{tangent_frame(z), VectorXd(), MatrixXd(), 0.0, false};
  const bool field = problem.kind == ProblemKind::VectorField;
  const VectorXd raw = problem.evaluate(z.x);
  ls.value = field ? ls.frame.to_frame(raw) : raw;

  const int n = problem.manifold->dim();
  ls.jacobian.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const auto coeffs = curve_coeffs(problem, z, ls.frame.basis[static_cast<std::size_t>(j)], 1);
    ls.jacobian.col(j) = field ? ls.frame.to_frame(coeffs[1]) : coeffs[1];
  }

  Eigen::JacobiSVD<MatrixXd> svd(ls.jacobian);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  ls.cond = smin > 0.0 ? smax / smin : kInf;
  ls.singular = !(ls.cond <= kSingularCond);
  return ls;
}

VectorXd GeodesicJet::eval(double t) const {
  if (!(std::abs(t) < convergence_radius))
    throw JetDivergence("evaluation at t = " + std::to_string(t) +
                        " leaves the convergence ball of radius " +
                        std::to_string(convergence_radius));
  VectorXd acc = VectorXd::Zero(coefficients.front().size());
  for (int k = order; k >= 0; --k) acc = t * acc + coefficients[static_cast<std::size_t>(k)];
  return acc;
}

GeodesicJet geodesic_jet(const Problem& problem, const Point& z, const Tangent& u, int order) {
  if (order < 1) throw Error("geodesic_jet needs order >= 1");
  const double len = z.man->norm(z.x, u.v);
  if (len <= 1e-14) throw Error("geodesic_jet needs a nonzero direction");

  GeodesicJet jet;
  jet.base = z;
  jet.direction = u.v / len;
  jet.order = order;
  jet.coefficients = curve_coeffs(problem, z, jet.direction, order);

  const LocalSystem ls = local_system(problem, z);
  double gamma_dir = 0.0;
  if (ls.singular) {
    gamma_dir = kInf;
  } else {
    const bool field = problem.kind == ProblemKind::VectorField;
    for (int k = 2; k <= order; ++k) {
      const VectorXd ck = field ? ls.frame.to_frame(jet.coefficients[static_cast<std::size_t>(k)])
                                : jet.coefficients[static_cast<std::size_t>(k)];
      const double nk = ls.solve(ck).norm();
      if (nk > 0.0) gamma_dir = std::max(gamma_dir, std::pow(nk, 1.0 / double(k - 1)));
    }
  }
  jet.convergence_radius =
      std::min(z.man->injectivity_radius(z.x), gamma_dir > 0.0 ? 1.0 / gamma_dir : kInf);
  return jet;
}

Tangent newton_direction(const Problem& problem, const Point& z) {
  const LocalSystem ls = local_system(problem, z);
  const VectorXd w = ls.solve(ls.value);
  return make_tangent(z, ls.frame.to_ambient(-w));
}

double beta(const Problem& problem, const Point& z) {
  const LocalSystem ls = local_system(problem, z);
  if (ls.singular) return kInf;
  return ls.solve(ls.value).norm();
}

double polarization_factor(int k_max) {
  double best = 1.0;
  double factorial = 1.0;
  for (int k = 2; k <= clamped_order(k_max); ++k) {
    factorial *= k;
    best = std::max(best, std::pow(std::pow(double(k), k) / factorial, 1.0 / double(k - 1)));
  }
  return best;
}

GammaBracket gamma_from_directional(const DirectionalModel& model, const GammaOptions& opts) {
  const int k_max = clamped_order(opts.k_max);
  const int nk = k_max - 1;

  GammaBracket out;
  out.truncation_order = k_max;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(opts.n_dirs) + 1);
  while (int(dirs.size()) < opts.n_dirs) {
    VectorXd d(model.n);
    for (int j = 0; j < model.n; ++j) d(j) = gauss(rng);
    const double dn = d.norm();
    if (dn > 1e-12) dirs.push_back(d / dn);
  }
  if (model.preferred_dir && model.preferred_dir->norm() > 1e-12)
    dirs.push_back(model.preferred_dir->normalized());
  out.directions_sampled = int(dirs.size());

  VectorXd best_val = VectorXd::Zero(nk);
  std::vector<VectorXd> best_dir(static_cast<std::size_t>(nk));
  for (const VectorXd& d : dirs) {
    const VectorXd norms = model.solved_norms(d);
    if (!norms.allFinite()) {
      out.lower = out.upper = kInf;
      return out;
    }
    for (int i = 0; i < nk; ++i) {
      if (norms(i) > best_val(i)) {
        best_val(i) = norms(i);
        best_dir[static_cast<std::size_t>(i)] = d;
      }
    }
  }

  const auto gamma_at = [](int i, double val) {
    return val > 0.0 ? std::pow(val, 1.0 / double(i + 1)) : 0.0;
  };

  if (opts.polish) {
    double gbest = 0.0;
    for (int i = 0; i < nk; ++i) gbest = std::max(gbest, gamma_at(i, best_val(i)));
    for (int i = 0; i < nk; ++i) {
      if (best_val(i) <= 0.0) continue;
      if (gamma_at(i, best_val(i)) < 0.8 * gbest) continue;
      VectorXd d = best_dir[static_cast<std::size_t>(i)];
      double val = best_val(i);
      ascend_direction(model, i, d, val);
      best_val(i) = val;
      best_dir[static_cast<std::size_t>(i)] = d;
      gbest = std::max(gbest, gamma_at(i, val));
    }
  }

  for (int i = 0; i < nk; ++i) {
    const double g = gamma_at(i, best_val(i));
    if (g > out.lower) {
      out.lower = g;
      out.k_hit = i + 2;
    }
  }
  out.upper = out.lower * polarization_factor(k_max);
  return out;
}

GammaBracket gamma_estimate(const Problem& problem, const Point& z, const GammaOptions& opts) {
  const int k_max = clamped_order(opts.k_max);
  const LocalSystem ls = local_system(problem, z);
  if (ls.singular) {
    GammaBracket out;
    out.lower = out.upper = kInf;
    out.truncation_order = k_max;
    return out;
  }

  const bool field = problem.kind == ProblemKind::VectorField;
  DirectionalModel model;
  model.n = problem.manifold->dim();
  model.solved_norms = [&problem, &z, &ls, field, k_max](const VectorXd& dir) -> VectorXd {
    const VectorXd u = ls.frame.to_ambient(dir);
    const auto coeffs = curve_coeffs(problem, z, u, k_max);
    VectorXd norms(k_max - 1);
    for (int k = 2; k <= k_max; ++k) {
      const VectorXd ck = field ? ls.frame.to_frame(coeffs[static_cast<std::size_t>(k)])
                                : coeffs[static_cast<std::size_t>(k)];
      norms(k - 2) = ls.solve(ck).norm();
    }
    return norms;
  };
  const VectorXd w = ls.solve(ls.value);
  if (w.norm() > 1e-12) model.preferred_dir = -w / w.norm();

  return gamma_from_directional(model, opts);
}

}  // namespace riemalpha
