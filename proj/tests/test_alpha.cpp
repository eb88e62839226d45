#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riemalpha/alpha.hpp"
#include "riemalpha/errors.hpp"
#include "riemalpha/newton.hpp"
#include "riemalpha/problems.hpp"

using namespace riemalpha;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Test-local root finders, independent of the library's bisection.
double newton_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                   double x0) {
  double x = x0;
  for (int i = 0; i < 60; ++i) x -= f(x) / df(x);
  return x;
}

double alpha0_oracle() {
  // 2u - psi(u)^2 = 0
  const auto f = [](double u) { return 2.0 * u - psi(u) * psi(u); };
  const auto df = [](double u) { return 2.0 - 2.0 * psi(u) * (-4.0 + 4.0 * u); };
  return newton_root(f, df, 0.1);
}

double sigma_oracle() {
  double sum = 0.0;
  for (int k = 0; k < 12; ++k) sum += std::pow(0.5, std::pow(2.0, k) - 1.0);
  return sum;
}

Point euclid_point(std::initializer_list<double> xs) {
  VectorXd x(static_cast<int>(xs.size()));
  int i = 0;
  for (double v : xs) x(i++) = v;
  return make_point(make_manifold("euclidean:" + std::to_string(x.size())), x);
}

// c * f with jets scaled the same way; invariants must not notice.
Problem scale_problem(const Problem& p, double c) {
  Problem out = p;
  out.id = p.id + ":scaled";
  const auto inner_eval = p.evaluate;
  out.evaluate = [inner_eval, c](const VectorXd& x) -> VectorXd { return c * inner_eval(x); };
  const auto inner_jets = p.evaluate_jets;
  out.evaluate_jets = [inner_jets, c](const std::vector<Jet>& x) -> std::vector<Jet> {
    std::vector<Jet> v = inner_jets(x);
    for (Jet& j : v) j *= c;
    return v;
  };
  if (p.jet_hook) {
    const auto inner_hook = p.jet_hook;
    out.jet_hook = [inner_hook, c](const VectorXd& z, const VectorXd& u,
                                   int order) -> std::vector<VectorXd> {
      std::vector<VectorXd> v = inner_hook(z, u, order);
      for (VectorXd& coeff : v) coeff *= c;
      return v;
    };
  }
  return out;
}

// f(x) = (x_1, x_2) on the hyperboloid sheet, zero at (1, 0, 0). The
// manifold declares no spreading bound, so separation must take the alt
// radius route.
Problem hyperbolic_projection() {
  Problem p;
  p.kind = ProblemKind::Map;
  p.manifold = make_manifold("hyperbolic:2");
  p.codomain_dim = 2;
  p.id = "hypproj";
  p.evaluate = [](const VectorXd& x) -> VectorXd { return x.tail(2); };
  p.evaluate_jets = [](const std::vector<Jet>& x) -> std::vector<Jet> { return {x[1], x[2]}; };
  VectorXd apex(3);
  apex << 1.0, 0.0, 0.0;
  p.known_zeros.push_back(make_point(p.manifold, apex));
  return p;
}

// Bx - c on euclidean:2; the series truncates at order 1, so gamma is zero.
Problem linear_map() {
  Problem p;
  p.kind = ProblemKind::Map;
  p.manifold = make_manifold("euclidean:2");
  p.codomain_dim = 2;
  p.id = "linmap";
  p.evaluate = [](const VectorXd& x) -> VectorXd {
    VectorXd v(2);
    v << 2.0 * x(0) + x(1) - 1.0, x(1) - 1.0;
    return v;
  };
  p.evaluate_jets = [](const std::vector<Jet>& x) -> std::vector<Jet> {
    return {2.0 * x[0] + x[1] - 1.0, x[1] - 1.0};
  };
  VectorXd zero(2);
  zero << 0.0, 1.0;
  p.known_zeros.push_back(make_point(p.manifold, zero));
  return p;
}

Point sphere_axis(int axis) {
  VectorXd x = VectorXd::Zero(3);
  x(axis) = 1.0;
  return make_point(make_manifold("sphere:2"), x);
}

}  // namespace

TEST_CASE("psi evaluates the quadratic") {
  CHECK(psi(0.0) == 1.0);
  CHECK(std::abs(psi(1.0 - std::sqrt(0.5))) <= 1e-15);
  CHECK(psi(0.1) == doctest::Approx(0.62).epsilon(1e-14));
  double prev = psi(0.0);
  for (double u = 0.02; u <= 0.29; u += 0.02) {
    CHECK(psi(u) < prev);
    prev = psi(u);
  }
}

TEST_CASE("constants satisfy their defining identities") {
  const TheoryConstants& c = theory_constants();
  CHECK(std::abs(2.0 * c.alpha0 - psi(c.alpha0) * psi(c.alpha0)) <= 1e-12);
  CHECK(std::abs(c.sigma - sigma_oracle()) <= 1e-12);
  CHECK(std::abs(c.nu0 / (psi(c.nu0) * psi(c.nu0)) - c.alpha0) <= 1e-12);
  const double sa = c.sigma * c.alpha0;
  const double s0_ref =
      1.0 / (c.sigma + ((1.0 - sa) * (1.0 - sa) / psi(sa)) * (1.0 + c.sigma / (1.0 - sa)));
  CHECK(std::abs(c.s0 - s0_ref) <= 1e-12);
  CHECK(std::abs(c.t0 - c.s0 / (c.s0 + (1.0 - c.nu0) / psi(c.nu0))) <= 1e-12);

  CHECK(std::abs(c.alpha0 - alpha0_oracle()) <= 1e-12);
  const double a0 = c.alpha0;
  const double nu0_ref = newton_root(
      [a0](double v) { return v - a0 * psi(v) * psi(v); },
      [a0](double v) { return 1.0 - a0 * 2.0 * psi(v) * (-4.0 + 4.0 * v); }, 0.05);
  CHECK(std::abs(c.nu0 - nu0_ref) <= 1e-12);
}

TEST_CASE("constants match the printed references") {
  const TheoryConstants& c = theory_constants();
  CHECK(std::abs(c.alpha0 - 0.130716944) <= 1e-8);
  CHECK(std::abs(c.sigma - 1.632843018) <= 1e-8);
  CHECK(std::abs(c.s0 - 0.103621842) <= 1e-8);
  CHECK(std::abs(c.nu0 - 0.069778332) <= 1e-8);
  CHECK(std::abs(c.t0 - 0.075262346) <= 1e-8);
}

TEST_CASE("constant computation is reproducible and memoized") {
  const TheoryConstants a = compute_constants();
  const TheoryConstants b = compute_constants();
  CHECK(a.alpha0 == b.alpha0);
  CHECK(a.sigma == b.sigma);
  CHECK(a.s0 == b.s0);
  CHECK(a.nu0 == b.nu0);
  CHECK(a.t0 == b.t0);
  CHECK(&theory_constants() == &theory_constants());
}

TEST_CASE("classic basin radius") {
  const BasinRadius flat = gamma_radius(1.0, 1.0, kInf);
  CHECK(flat.value == doctest::Approx((3.0 - std::sqrt(7.0)) / 2.0).epsilon(1e-12));
  CHECK(std::abs(flat.value - 0.1771243) <= 1e-7);
  CHECK(flat.binding_term == RadiusTerm::CurvatureGammaTerm);
  REQUIRE(flat.k_used.has_value());
  CHECK(*flat.k_used == 1.0);

  const BasinRadius clipped = gamma_radius(1.0, 2.0, 0.05);
  CHECK(clipped.value == 0.05);
  CHECK(clipped.binding_term == RadiusTerm::InjectivityRadius);

  const BasinRadius k2 = gamma_radius(2.0, 1.0, kInf);
  CHECK(k2.value == doctest::Approx((4.0 - std::sqrt(14.0)) / 2.0).epsilon(1e-12));
  CHECK(std::abs(k2.value - 0.1291713) <= 1e-7);

  for (double gamma : {1e-6, 0.037, 1.0, 42.0, 1e8})
    CHECK(std::abs(gamma_radius(1.0, gamma, kInf).value * 2.0 * gamma - (3.0 - std::sqrt(7.0))) <=
          1e-14);

  const BasinRadius degenerate = gamma_radius(1.0, 0.0, 1.5);
  CHECK(degenerate.value == 1.5);
  CHECK(degenerate.binding_term == RadiusTerm::InjectivityRadius);

  CHECK_THROWS_AS(gamma_radius(std::nullopt, 1.0, 1.0), DegenerateRadius);
  CHECK_THROWS_AS(gamma_radius(1.0, kInf, 1.0), DegenerateRadius);
  CHECK_THROWS_AS(gamma_radius(0.5, 1.0, 1.0), Error);
  CHECK_THROWS_AS(gamma_radius(1.0, 1.0, 0.0), Error);
}

TEST_CASE("alt basin radius") {
  const TheoryConstants& c = theory_constants();
  const BasinRadius flat = gamma_radius_alt(1.0, kInf);
  CHECK(flat.value == doctest::Approx(c.nu0).epsilon(1e-14));
  CHECK(std::abs(flat.value - 0.069778332) <= 1e-8);
  CHECK(flat.binding_term == RadiusTerm::AltGammaTerm);
  CHECK(!flat.k_used.has_value());

  const BasinRadius steep = gamma_radius_alt(1e9, 1.0);
  CHECK(std::abs(steep.value - 0.069778332e-9) <= 1e-17);
  CHECK(steep.binding_term == RadiusTerm::AltGammaTerm);

  const BasinRadius shallow = gamma_radius_alt(0.001, 1.0);
  CHECK(std::abs(shallow.value - 0.075262346) <= 1e-8);
  CHECK(shallow.value == doctest::Approx(c.t0).epsilon(1e-14));
  CHECK(shallow.binding_term == RadiusTerm::AltInjectivityTerm);

  CHECK_THROWS_AS(gamma_radius_alt(kInf, 1.0), DegenerateRadius);
}

TEST_CASE("radius monotonicity") {
  const std::vector<double> ks = {1.0, 1.3, 2.0, 3.7, 5.0, 10.0, 100.0, 1e4, 1e6};
  for (std::size_t i = 1; i < ks.size(); ++i)
    CHECK(gamma_radius(ks[i], 1.0, kInf).value < gamma_radius(ks[i - 1], 1.0, kInf).value);

  const std::vector<double> gammas = {0.05, 0.1, 1.0, 10.0, 1e3};
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    CHECK(gamma_radius(2.0, gammas[i], kInf).value < gamma_radius(2.0, gammas[i - 1], kInf).value);
    CHECK(gamma_radius_alt(gammas[i], kInf).value < gamma_radius_alt(gammas[i - 1], kInf).value);
  }

  const std::vector<double> rs = {0.01, 0.05, 0.2, 1.0, 10.0};
  for (std::size_t i = 1; i < rs.size(); ++i) {
    CHECK(gamma_radius(1.0, 1.0, rs[i]).value >= gamma_radius(1.0, 1.0, rs[i - 1]).value);
    CHECK(gamma_radius_alt(1.0, rs[i]).value >= gamma_radius_alt(1.0, rs[i - 1]).value);
  }
}

TEST_CASE("spread scalars over the whole K range") {
  const double right = 1.0 - std::sqrt(0.5);
  CHECK(std::abs(nu_spread(1.0) - 0.1771243) <= 1e-7);
  CHECK(std::abs(right - 0.2928932) <= 1e-7);
  for (int i = 0; i <= 120; ++i) {
    const double k = std::pow(10.0, i / 20.0);
    const double nu = nu_spread(k);
    CHECK(nu < right);
    CHECK(k * nu / psi(nu) <= 0.5 + 1e-9);
  }
}

TEST_CASE("radius comparator and the crossover spreading constant") {
  CHECK(radius_comparator(1.0, 1.0, kInf) == RadiusComparison::ClassicSharper);
  CHECK(radius_comparator(10.0, 1.0, kInf) == RadiusComparison::AltSharper);
  CHECK(radius_comparator(5.235326440, 1.0, kInf) == RadiusComparison::Equal);
  CHECK(radius_comparator(5.235326440, 0.3, kInf, 1e-7) == RadiusComparison::Equal);

  const double k_star = radius_crossover_k();
  CHECK(std::abs(k_star - 5.235326440) <= 1e-6);
  const double nu0 = theory_constants().nu0;
  CHECK(std::abs(k_star - (1.0 / (2.0 * nu0) + nu0 - 2.0)) <= 1e-9);
  CHECK(std::abs(gamma_radius(k_star, 1.0, kInf).value - gamma_radius_alt(1.0, kInf).value) <=
        1e-10);
  CHECK(to_string(RadiusComparison::Equal) == "Equal");
}

TEST_CASE("certificate for x^2 - 1 near its zero") {
  const Problem p = quad1d();
  const AlphaCertificate cert = alpha_certify(p, euclid_point({1.1}));

  const double beta_ref = 0.21 / 2.2;  // f/f' at 1.1
  const double gamma_ref = 1.0 / 2.2;  // |f''/(2 f')|
  CHECK(std::abs(cert.beta - beta_ref) <= 1e-12);
  CHECK(std::abs(cert.beta - 0.0954545) <= 1e-6);
  CHECK(cert.gamma_bracket.lower == doctest::Approx(gamma_ref).epsilon(1e-8));
  CHECK(cert.gamma_bracket.lower <= gamma_ref * (1.0 + 1e-9));
  CHECK(cert.gamma_bracket.upper >= gamma_ref * (1.0 - 1e-9));
  CHECK(std::abs(cert.alpha_lower - 0.0433884) <= 1e-6);
  CHECK(cert.alpha_lower == cert.beta * cert.gamma_bracket.lower);
  CHECK(cert.alpha_upper == cert.beta * cert.gamma_bracket.upper);
  CHECK(cert.alpha_upper < theory_constants().alpha0);
  CHECK(std::isinf(cert.r_z));
  CHECK(cert.verdict == Verdict::Certified);
  REQUIRE(cert.root_distance_bound.has_value());
  CHECK(std::abs(*cert.root_distance_bound - theory_constants().sigma * beta_ref) <= 1e-12);
  CHECK(std::abs(*cert.root_distance_bound - 0.1558625) <= 1e-6);
  CHECK(*cert.root_distance_bound >= 0.1);  // covers the true distance to 1
  CHECK(to_string(cert.verdict) == "Certified");
}

TEST_CASE("certificate at an exact zero and at a singular point") {
  const Problem p = quad1d();
  const AlphaCertificate at_zero = alpha_certify(p, p.known_zeros.front());
  CHECK(at_zero.beta <= 1e-15);
  CHECK(at_zero.alpha_upper <= 1e-14);
  CHECK(at_zero.verdict == Verdict::Certified);
  REQUIRE(at_zero.root_distance_bound.has_value());
  CHECK(*at_zero.root_distance_bound <= 1e-14);

  const AlphaCertificate singular = alpha_certify(p, euclid_point({0.0}));
  CHECK(singular.verdict == Verdict::SingularDerivative);
  CHECK(std::isinf(singular.beta));
  CHECK(!singular.root_distance_bound.has_value());
}

TEST_CASE("certified starts converge within the promised ball") {
  GammaOptions opts;
  opts.k_max = 8;
  opts.n_dirs = 24;
  opts.polish = false;

  std::mt19937_64 rng(77);
  int certified = 0;
  for (const CatalogEntry& entry : catalog_list()) {
    const Problem p = make_problem(entry.id);
    int used = 0;
    for (const Point& zero : p.known_zeros) {
      if (++used > 3) break;
      for (int trial = 0; trial < 2; ++trial) {
        const Tangent u = random_tangent(zero, rng);
        const double un = zero.man->norm(zero.x, u.v);
        if (un < 1e-12) continue;
        const Point z0 = exp_map(zero, make_tangent(zero, (0.02 / un) * u.v));
        const AlphaCertificate cert = alpha_certify(p, z0, opts);
        if (cert.verdict != Verdict::Certified) continue;
        ++certified;

        const NewtonTrace trace = newton_sequence(p, z0);
        INFO(entry.id);
        REQUIRE(trace.termination == Termination::Converged);
        CHECK(distance(z0, trace.points.back()) <= *cert.root_distance_bound + 1e-12);
        const double beta0 = trace.step_norms.front();
        for (std::size_t k = 0; k < trace.step_norms.size(); ++k)
          CHECK(trace.step_norms[k] <=
                std::pow(0.5, std::pow(2.0, double(k)) - 1.0) * beta0 + 1e-13);
      }
    }
  }
  CHECK(certified >= 10);
}

TEST_CASE("scaling the system leaves every invariant in place") {
  GammaOptions opts;
  opts.k_max = 8;
  opts.n_dirs = 24;
  opts.polish = false;

  const Problem quad = quad2d();
  const Point z = euclid_point({1.1, 2.1});
  const Problem eig = make_problem("eigen:diag(1,2,3)");
  std::mt19937_64 rng(5);
  const Point ze = [&] {
    const Point e2 = sphere_axis(1);
    const Tangent u = random_tangent(e2, rng);
    return exp_map(e2, make_tangent(e2, 0.03 * u.v / e2.man->norm(e2.x, u.v)));
  }();

  const std::vector<std::pair<const Problem*, const Point*>> cases = {{&quad, &z}, {&eig, &ze}};
  for (const auto& [prob, at] : cases) {
    const AlphaCertificate base = alpha_certify(*prob, *at, opts);
    for (double c : {3.7, -0.02}) {
      const AlphaCertificate scaled = alpha_certify(scale_problem(*prob, c), *at, opts);
      INFO(prob->id, " c=", c);
      CHECK(std::abs(scaled.beta - base.beta) <= 1e-12 * (1.0 + base.beta));
      CHECK(std::abs(scaled.gamma_bracket.lower - base.gamma_bracket.lower) <=
            1e-12 * (1.0 + base.gamma_bracket.lower));
      CHECK(std::abs(scaled.gamma_bracket.upper - base.gamma_bracket.upper) <=
            1e-12 * (1.0 + base.gamma_bracket.upper));
      CHECK(std::abs(scaled.alpha_upper - base.alpha_upper) <= 1e-12 * (1.0 + base.alpha_upper));
      CHECK(scaled.verdict == base.verdict);
    }
  }

  const Point e3 = sphere_axis(2);
  const double sep = separation_bound(eig, e3, opts);
  const double sep_scaled = separation_bound(scale_problem(eig, -4.0), e3, opts);
  CHECK(std::abs(sep - sep_scaled) <= 1e-12 * (1.0 + sep));
}

TEST_CASE("separation radius around an eigenvector") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  const Point e3 = sphere_axis(2);
  const double r = separation_bound(p, e3);
  CHECK(r > 0.0);
  CHECK(r < M_PI / 2.0);
  CHECK(distance(e3, sphere_axis(0)) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
  CHECK(distance(e3, sphere_axis(1)) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
  for (const Point& zero : p.known_zeros) {
    const double d = distance(e3, zero);
    if (d > 1e-12) CHECK(d > r);
  }
  // same inputs, assembled by hand through the classic radius
  const GammaBracket gb = gamma_estimate(p, e3);
  const double by_hand = gamma_radius(spreading_constant(e3), gb.upper, injectivity_radius(e3)).value;
  CHECK(r == by_hand);
}

TEST_CASE("separation radius of a linear system is infinite") {
  const Problem p = linear_map();
  const double r = separation_bound(p, p.known_zeros.front());
  CHECK(std::isinf(r));
}

TEST_CASE("separation falls back to the alt radius without a spreading bound") {
  const Problem p = hyperbolic_projection();
  const Point apex = p.known_zeros.front();
  CHECK(!spreading_constant(apex).has_value());
  const double r = separation_bound(p, apex);
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));
  const GammaBracket gb = gamma_estimate(p, apex);
  CHECK(r == gamma_radius_alt(gb.upper, injectivity_radius(apex)).value);
  CHECK(r == doctest::Approx(theory_constants().nu0 / gb.upper).epsilon(1e-14));
}

TEST_CASE("separation refuses a point that is not a zero") {
  CHECK_THROWS_AS(separation_bound(quad1d(), euclid_point({1.1})), NotAZero);
}

TEST_CASE("lemma suite on the eigenvector field at a zero") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  const LemmaReport rep = lemma_suite(p, sphere_axis(2), 200);
  REQUIRE(rep.all_hold);
  for (const char* name : {"derivative_ratio", "linearized_residual", "step_displacement",
                           "invariant_drift", "newton_contraction", "radius_slip"}) {
    const LemmaRow* row = rep.find(name);
    REQUIRE(row != nullptr);
    INFO(name);
    CHECK(row->samples == 200);
    CHECK(row->passes == 200);
    CHECK(row->worst_margin >= 0.0);
    CHECK(row->holds());
  }
  const LemmaRow* series = rep.find("binomial_series");
  REQUIRE(series != nullptr);
  CHECK(series->samples == 21);
  CHECK(series->holds());
  const LemmaRow* spread = rep.find("spread_scalars");
  REQUIRE(spread != nullptr);
  CHECK(spread->samples == 601);
  CHECK(spread->holds());
  CHECK(rep.find("no_such_row") == nullptr);
}

TEST_CASE("zero-anchored rows are skipped away from a zero") {
  const LemmaReport rep = lemma_suite(quad1d(), euclid_point({1.4}), 120);
  CHECK(rep.all_hold);
  const LemmaRow* residual = rep.find("linearized_residual");
  REQUIRE(residual != nullptr);
  CHECK(residual->samples == 0);
  CHECK(residual->holds());
  CHECK(rep.find("step_displacement")->samples == 0);
  CHECK(rep.find("derivative_ratio")->samples == 120);
  CHECK(rep.find("invariant_drift")->passes == 120);
  // one-step rows keep their own hypothesis; whatever qualifies must pass
  const LemmaRow* contraction = rep.find("newton_contraction");
  CHECK(contraction->samples <= 120);
  CHECK(contraction->holds());
}

TEST_CASE("lemma suite is deterministic under its seed") {
  const Problem p = make_problem("eigen:diag(1,2,3)");
  const LemmaReport a = lemma_suite(p, sphere_axis(2), 60, 99);
  const LemmaReport b = lemma_suite(p, sphere_axis(2), 60, 99);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].name == b.rows[i].name);
    CHECK(a.rows[i].samples == b.rows[i].samples);
    CHECK(a.rows[i].passes == b.rows[i].passes);
    CHECK(a.rows[i].worst_margin == b.rows[i].worst_margin);
  }
}

TEST_CASE("derivative ratio collapses to one at coincident points") {
  // nu -> 0 end of the derivative bound: the comparison operator at y = x is
  // the identity, and the bound itself is psi(0) = 1.
  CHECK(psi(0.0) == 1.0);
  for (const char* id : {"quad2d", "eigen:diag(1,2,3)"}) {
    const Problem p = make_problem(id);
    const Point z = p.known_zeros.front();
    const LocalSystem sys = local_system(p, z);
    const MatrixXd m = sys.jacobian.colPivHouseholderQr().solve(sys.jacobian);
    Eigen::JacobiSVD<MatrixXd> svd(m);
    CHECK(svd.singularValues()(0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("a singular base degrades to scalar rows only") {
  const LemmaReport rep = lemma_suite(quad1d(), euclid_point({0.0}), 50);
  CHECK(rep.all_hold);
  CHECK(rep.find("derivative_ratio")->samples == 0);
  CHECK(rep.find("newton_contraction")->samples == 0);
  CHECK(rep.find("binomial_series")->holds());
  CHECK(rep.find("spread_scalars")->holds());
}
