#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riemalpha/calculus.hpp"
#include "riemalpha/problems.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace riemalpha;

namespace {

VectorXd vec1(double x) {
  VectorXd v(1);
  v << x;
  return v;
}

VectorXd unit(int n, int i) {
  VectorXd e = VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

// Reference coefficients of the transported pullback of a field on a unit
// sphere: evaluate along the great circle, transport back with the RK4
// oracle, and fit.
std::vector<VectorXd> sphere_pullback_fd(const VectorXd& z, const VectorXd& u,
                                         const std::function<VectorXd(const VectorXd&)>& field,
                                         int k_max) {
  const double s = u.norm();
  const VectorXd w = u / s;
  const auto c = [&](double t) -> VectorXd { return std::cos(s * t) * z + std::sin(s * t) * w; };
  const auto cdot = [&](double t) -> VectorXd {
    return s * (-std::sin(s * t) * z + std::cos(s * t) * w);
  };
  return oracles::fd_curve_coeffs(
      [&](double t) {
        return oracles::rk4_transport_along(c, cdot, -1.0, false, field(c(t)), t, 0.0, 800);
      },
      k_max);
}

}  // namespace

TEST_CASE("quadratic jet on the line has the textbook coefficients") {
  const Problem p = quad1d();
  const Point z = make_point(p.manifold, vec1(1.0));
  const Tangent u = make_tangent(z, vec1(1.0));
  const GeodesicJet jet = geodesic_jet(p, z, u, 3);
  REQUIRE(int(jet.coefficients.size()) == 4);
  CHECK(jet.coefficients[0](0) == 0.0);
  CHECK(jet.coefficients[1](0) == 2.0);
  CHECK(jet.coefficients[2](0) == 1.0);
  CHECK(jet.coefficients[3](0) == 0.0);

  // Jet-arithmetic path (hook disabled) agrees with the closed-form hook.
  Problem generic = p;
  generic.jet_hook = nullptr;
  const GeodesicJet jet2 = geodesic_jet(generic, z, u, 3);
  for (int k = 0; k <= 3; ++k)
    CHECK((jet2.coefficients[size_t(k)] - jet.coefficients[size_t(k)]).norm() <= 1e-15);
}

TEST_CASE("eigen-field jet at an eigenvector") {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  const Problem p = eigen_field(a);
  const Point z = make_point(p.manifold, unit(2, 1));
  const Tangent u = make_tangent(z, unit(2, 0));
  const GeodesicJet jet = geodesic_jet(p, z, u, 2);

  CHECK(jet.coefficients[0].norm() <= 1e-15);
  CHECK((jet.coefficients[1] - (-unit(2, 0))).norm() <= 1e-12);

  const auto fd = sphere_pullback_fd(z.x, u.v, p.evaluate, 2);
  CHECK((jet.coefficients[1] - fd[1]).norm() <= 1e-8);
  CHECK((jet.coefficients[2] - fd[2]).norm() <= 1e-8);
}

TEST_CASE("vector-field jet coefficients are tangent at the base") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  std::mt19937_64 rng(11);
  const Point z = random_point(p.manifold, rng);
  const Tangent u = random_tangent(z, rng);
  const GeodesicJet jet = geodesic_jet(p, z, u, 6);
  REQUIRE(int(jet.coefficients.size()) == 7);
  for (const VectorXd& ck : jet.coefficients)
    CHECK((p.manifold->project_tangent(z.x, ck) - ck).norm() <= 1e-12 * (1.0 + ck.norm()));
}

TEST_CASE("newton direction examples") {
  const Problem p = quad1d();
  const Point z2 = make_point(p.manifold, vec1(2.0));
  CHECK(newton_direction(p, z2).v(0) == doctest::Approx(-0.75).epsilon(1e-15));

  const Point root = make_point(p.manifold, vec1(1.0));
  CHECK(newton_direction(p, root).v.norm() == 0.0);

  const Problem field = make_problem("eigen:diag(1,2,3)");
  VectorXd x = unit(3, 2) + 0.1 * unit(3, 0);
  const Point z = make_point(field.manifold, x);
  const Tangent dir = newton_direction(field, z);
  const double b = beta(field, z);
  CHECK(field.manifold->norm(z.x, dir.v) == doctest::Approx(b).epsilon(1e-14));
  CHECK(b > 0.0);
}

TEST_CASE("newton direction on the eigen field matches a dense frame solve") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  const Point z = make_point(p.manifold, unit(3, 2) + 0.1 * unit(3, 0));

  // Oracle frame: Gram-Schmidt over projected axes.
  std::vector<VectorXd> frame;
  for (int i = 0; i < 3 && int(frame.size()) < 2; ++i) {
    VectorXd v = unit(3, i) - z.x.dot(unit(3, i)) * z.x;
    for (const VectorXd& bvec : frame) v -= bvec.dot(v) * bvec;
    if (v.norm() > 1e-8) frame.push_back(v.normalized());
  }
  REQUIRE(int(frame.size()) == 2);

  // Columns: centered differences of the transported field along geodesics.
  const double h = 1e-5;
  MatrixXd jac(2, 2);
  for (int j = 0; j < 2; ++j) {
    const auto curve_val = [&](double t) -> VectorXd {
      const VectorXd w = frame[size_t(j)];
      const auto c = [&](double tt) -> VectorXd {
        return std::cos(tt) * z.x + std::sin(tt) * w;
      };
      const auto cdot = [&](double tt) -> VectorXd {
        return -std::sin(tt) * z.x + std::cos(tt) * w;
      };
      return oracles::rk4_transport_along(c, cdot, -1.0, false, p.evaluate(c(t)), t, 0.0, 400);
    };
    const VectorXd diff = (curve_val(h) - curve_val(-h)) / (2.0 * h);
    for (int i = 0; i < 2; ++i) jac(i, j) = diff.dot(frame[size_t(i)]);
  }
  VectorXd value(2);
  const VectorXd xval = p.evaluate(z.x);
  for (int i = 0; i < 2; ++i) value(i) = xval.dot(frame[size_t(i)]);
  const VectorXd w = jac.colPivHouseholderQr().solve(value);

  CHECK(beta(p, z) == doctest::Approx(w.norm()).epsilon(1e-7));
  // Reassemble the ambient direction from the oracle solve and compare.
  const VectorXd dir_oracle = -(w(0) * frame[0] + w(1) * frame[1]);
  CHECK((newton_direction(p, z).v - dir_oracle).norm() <= 1e-7);
}

TEST_CASE("newton direction satisfies the residual identity") {
  std::mt19937_64 rng(12);
  for (const char* id : {"quad2d", "eigen:diag(1,2,3)", "so3align:diag(2,1,1)", "realify:quad1d"}) {
    const Problem p = make_problem(id);
    const Point z = random_point(p.manifold, rng);
    const LocalSystem ls = local_system(p, z);
    if (ls.singular) continue;
    const Tangent dir = newton_direction(p, z);
    const VectorXd w = ls.frame.to_frame(dir.v);
    CHECK((ls.jacobian * w + ls.value).norm() <= 1e-10 * (1.0 + ls.value.norm()));
  }
}

TEST_CASE("beta examples") {
  const Problem p = quad1d();
  CHECK(beta(p, make_point(p.manifold, vec1(1.1))) ==
        doctest::Approx(0.21 / 2.2).epsilon(1e-12));
  CHECK(beta(p, make_point(p.manifold, vec1(1.1))) == doctest::Approx(0.0954545).epsilon(1e-5));
  CHECK(beta(p, make_point(p.manifold, vec1(1.0))) == 0.0);
  CHECK(std::isinf(beta(p, make_point(p.manifold, vec1(0.0)))));
  CHECK_THROWS_AS((void)newton_direction(p, make_point(p.manifold, vec1(0.0))),
                  SingularDerivative);
}

TEST_CASE("gamma bracket on quadratic problems") {
  const Problem p1 = quad1d();
  const GammaBracket g1 = gamma_estimate(p1, make_point(p1.manifold, vec1(1.0)));
  CHECK(g1.lower == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(g1.k_hit == 2);
  CHECK(g1.upper == doctest::Approx(g1.lower * polarization_factor(g1.truncation_order)).epsilon(1e-15));
  CHECK(g1.lower <= 0.5 + 1e-12);
  CHECK(g1.upper >= 0.5 - 1e-12);

  const Problem p2 = quad2d();
  VectorXd z(2);
  z << 1.0, 2.0;
  const GammaBracket g2 = gamma_estimate(p2, make_point(p2.manifold, z));
  CHECK(std::abs(g2.lower - 0.5) <= 1e-8);
  CHECK(g2.lower <= 0.5 + 1e-12);
  CHECK(g2.upper >= 0.5);

  // Linear problem: gamma is exactly zero.
  const Problem lin =
      quadratic_euclidean(MatrixXd::Identity(2, 2), VectorXd::Zero(2),
                          {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)});
  const GammaBracket gl = gamma_estimate(lin, make_point(lin.manifold, z));
  CHECK(gl.lower == 0.0);
  CHECK(gl.upper == 0.0);
  CHECK(gl.k_hit == 0);

  // Singular derivative: infinite bracket.
  const GammaBracket gs = gamma_estimate(p1, make_point(p1.manifold, vec1(0.0)));
  CHECK(std::isinf(gs.lower));
  CHECK(std::isinf(gs.upper));
}

TEST_CASE("gamma estimate is deterministic and counts directions") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  std::mt19937_64 rng(13);
  const Point z = random_point(p.manifold, rng);
  GammaOptions opts;
  const GammaBracket a = gamma_estimate(p, z, opts);
  const GammaBracket b = gamma_estimate(p, z, opts);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.k_hit == b.k_hit);
  CHECK(a.truncation_order == 12);
  CHECK(a.directions_sampled >= opts.n_dirs);
  CHECK(0.0 <= a.lower);
  CHECK(a.lower <= a.upper);

  // Different seed moves the samples but not the polished answer much.
  GammaOptions other = opts;
  other.seed += 1;
  const GammaBracket c = gamma_estimate(p, z, other);
  CHECK(c.lower == doctest::Approx(a.lower).epsilon(1e-6));

  // At an exact zero of quad1d the Newton direction degenerates and only the
  // random directions are sampled.
  const Problem q = quad1d();
  const GammaBracket at_root = gamma_estimate(q, make_point(q.manifold, vec1(1.0)));
  CHECK(at_root.directions_sampled == GammaOptions().n_dirs);
}

TEST_CASE("taylor remainder decays at the guaranteed rate") {
  std::mt19937_64 rng(14);
  const int order = 8;
  for (const char* id : {"quad2d", "eigen:diag(1,2,3)", "so3align:diag(2,1,1)", "realify:quad1d"}) {
    const Problem p = make_problem(id);
    for (int trial = 0; trial < 5; ++trial) {
      const Point z = random_point(p.manifold, rng);
      const LocalSystem ls = local_system(p, z);
      if (ls.singular) continue;
      const GammaBracket g = gamma_estimate(p, z);
      const double r = p.manifold->injectivity_radius(z.x);
      const double cap = std::min(std::isfinite(r) ? r : 10.0,
                                  g.upper > 0.0 ? 1.0 / g.upper : 10.0);
      const double t = 0.49 * cap;
      Tangent u = random_tangent(z, rng);
      u.v /= p.manifold->norm(z.x, u.v);
      const GeodesicJet jet = geodesic_jet(p, z, u, order);

      const VectorXd truth = [&]() -> VectorXd {
        const VectorXd y = p.manifold->exp(z.x, t * u.v);
        if (p.kind == ProblemKind::Map) return p.evaluate(y);
        return p.manifold->transport(y, z.x, p.evaluate(y));
      }();
      VectorXd sum = VectorXd::Zero(truth.size());
      double tk = 1.0;
      for (int k = 0; k <= order; ++k) {
        sum += tk * jet.coefficients[size_t(k)];
        tk *= t;
      }
      const double jac_norm = ls.jacobian.jacobiSvd().singularValues()(0);
      const double gu = g.upper;
      const double bound = 2.0 * std::pow(gu, order) * std::pow(t, order + 1) * jac_norm /
                           (1.0 - gu * t);
      if (gu > 0.0) {
        CHECK((truth - sum).norm() <= bound + 1e-15);
      } else {
        CHECK((truth - sum).norm() <= 1e-12);
      }
    }
  }
}

TEST_CASE("jet coefficients agree with finite differences") {
  std::mt19937_64 rng(15);
  const int k_check = 6;
  for (const char* id : {"quad2d", "so3align:diag(2,1,1)", "realify:cquad2:7", "eigen:diag(1,2,3)"}) {
    const Problem p = make_problem(id);
    const Point z = random_point(p.manifold, rng);
    Tangent u = random_tangent(z, rng);
    u.v /= p.manifold->norm(z.x, u.v);
    const GeodesicJet jet = geodesic_jet(p, z, u, k_check);

    std::vector<VectorXd> fd;
    if (p.kind == ProblemKind::Map) {
      fd = oracles::fd_curve_coeffs(
          [&](double t) { return p.evaluate(p.manifold->exp(z.x, t * u.v)); }, k_check);
    } else {
      fd = sphere_pullback_fd(z.x, u.v, p.evaluate, k_check);
    }
    for (int k = 0; k <= k_check; ++k) {
      CHECK((jet.coefficients[size_t(k)] - fd[size_t(k)]).norm() <=
            1e-6 * (1.0 + fd[size_t(k)].norm()));
    }
  }
}

TEST_CASE("binomial tail series sums to the closed form") {
  for (const double r : {0.1, 0.5, 0.9}) {
    for (int k = 0; k <= 6; ++k) {
      double term = 1.0;  // C(k+0,0) r^0
      double sum = term;
      for (int l = 0; l < 20000 && term > 1e-18; ++l) {
        term *= r * double(k + l + 1) / double(l + 1);
        sum += term;
      }
      CHECK(sum == doctest::Approx(std::pow(1.0 - r, -(k + 1))).epsilon(1e-10));
    }
  }
}

TEST_CASE("newton direction is invariant under output scaling") {
  std::mt19937_64 rng(16);
  for (const char* id : {"quad2d", "eigen:diag(1,2,3)"}) {
    const Problem p = make_problem(id);
    Problem doubled = p;
    const auto eval = p.evaluate;
    doubled.evaluate = [eval](const VectorXd& x) { return VectorXd(2.0 * eval(x)); };
    const auto jets = p.evaluate_jets;
    doubled.evaluate_jets = [jets](const std::vector<Jet>& x) {
      auto out = jets(x);
      for (Jet& j : out) j *= 2.0;
      return out;
    };
    doubled.jet_hook = nullptr;

    const Point z = random_point(p.manifold, rng);
    const Tangent d1 = newton_direction(p, z);
    const Tangent d2 = newton_direction(doubled, z);
    CHECK((d1.v - d2.v).norm() <= 1e-12 * (1.0 + d1.v.norm()));
  }
}

TEST_CASE("jet evaluation outside the convergence ball throws") {
  const Problem p = quad1d();
  const Point z = make_point(p.manifold, vec1(1.0));
  const Tangent u = make_tangent(z, vec1(1.0));
  const GeodesicJet jet = geodesic_jet(p, z, u, 8);
  CHECK(jet.convergence_radius == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(jet.eval(1.9)(0) == doctest::Approx((1.0 + 1.9) * (1.0 + 1.9) - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)jet.eval(2.1), JetDivergence);

  const Problem field = make_problem("eigen:diag(1,2,3)");
  std::mt19937_64 rng(17);
  const Point zf = random_point(field.manifold, rng);
  const GeodesicJet jf = geodesic_jet(field, zf, random_tangent(zf, rng), 8);
  CHECK(jf.convergence_radius <= 3.14159265358979323846 + 1e-12);
  CHECK_THROWS_AS((void)jf.eval(1.01 * jf.convergence_radius), JetDivergence);
  CHECK(jf.eval(0.3 * jf.convergence_radius).allFinite());
}

TEST_CASE("tangent frame transforms invert each other") {
  std::mt19937_64 rng(18);
  for (const char* id : {"sphere:3", "so:3", "hyperbolic:2"}) {
    auto man = make_manifold(id);
    const Point z = random_point(man, rng);
    const TangentFrame frame = tangent_frame(z);
    const VectorXd coords = oracles::gaussian_vector(man->dim(), rng);
    CHECK((frame.to_frame(frame.to_ambient(coords)) - coords).norm() <= 1e-12);
    const VectorXd amb = man->random_tangent(z.x, rng);
    CHECK((frame.to_ambient(frame.to_frame(amb)) - amb).norm() <= 1e-11 * (1.0 + amb.norm()));
  }
}
