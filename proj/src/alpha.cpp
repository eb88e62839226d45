#include "riemalpha/alpha.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "riemalpha/errors.hpp"
#include "riemalpha/parallel.hpp"

namespace riemalpha {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double bisect_root(const std::function<double(double)>& fn, double lo, double hi) {
  // fn(lo) < 0 < fn(hi); 200 halvings pin the root to the last bit.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double slack(double rhs) { return 1e-9 * (1.0 + std::abs(rhs)); }

}  // namespace

double psi(double u) { return 1.0 - 4.0 * u + 2.0 * u * u; }

TheoryConstants compute_constants() {
  TheoryConstants c;
  const double right = 1.0 - std::sqrt(0.5);
  c.alpha0 = bisect_root([](double u) { return 2.0 * u - psi(u) * psi(u); }, 0.0, right);
  double sum = 0.0;
  for (int k = 0;; ++k) {
    const double term = std::pow(0.5, std::pow(2.0, k) - 1.0);
    if (term < 1e-18) break;
    sum += term;
  }
  c.sigma = sum;
  const double a0 = c.alpha0;
  c.nu0 = bisect_root([a0](double nu) { return nu - a0 * psi(nu) * psi(nu); }, 0.0, right);
  const double sa = c.sigma * c.alpha0;
  c.s0 = 1.0 / (c.sigma + ((1.0 - sa) * (1.0 - sa) / psi(sa)) * (1.0 + c.sigma / (1.0 - sa)));
  c.t0 = c.s0 / (c.s0 + (1.0 - c.nu0) / psi(c.nu0));
  return c;
}

const TheoryConstants& theory_constants() {
  static const TheoryConstants c = compute_constants();
  return c;
}

double nu_spread(double k) {
  // rationalized (K + 2 - sqrt(K^2 + 4K + 2)) / 2; the direct form cancels
  // catastrophically for large K
  return 1.0 / (k + 2.0 + std::sqrt(k * k + 4.0 * k + 2.0));
}

std::string to_string(RadiusTerm t) {
  switch (t) {
    case RadiusTerm::InjectivityRadius: return "InjectivityRadius";
    case RadiusTerm::CurvatureGammaTerm: return "CurvatureGammaTerm";
    case RadiusTerm::AltInjectivityTerm: return "AltInjectivityTerm";
    case RadiusTerm::AltGammaTerm: return "AltGammaTerm";
  }
  return "Unknown";
}

BasinRadius gamma_radius(std::optional<double> k, double gamma, double r) {
  if (!k)
    throw DegenerateRadius("spreading constant is unbounded here; the alt radius is the applicable claim");
  if (!(*k >= 1.0)) throw Error("gamma_radius needs K >= 1");
  if (std::isinf(gamma)) throw DegenerateRadius("gamma is infinite; the point has no basin");
  if (!(gamma >= 0.0) || !(r > 0.0)) throw Error("gamma_radius needs gamma >= 0 and r > 0");
  BasinRadius out;
  out.k_used = *k;
  const double curve = gamma > 0.0 ? nu_spread(*k) / gamma : kInf;
  if (curve < r) {
    out.value = curve;
    out.binding_term = RadiusTerm::CurvatureGammaTerm;
  } else {
    out.value = r;
    out.binding_term = RadiusTerm::InjectivityRadius;
  }
  return out;
}

BasinRadius gamma_radius_alt(double gamma, double r) {
  if (std::isinf(gamma)) throw DegenerateRadius("gamma is infinite; the point has no basin");
  if (!(gamma >= 0.0) || !(r > 0.0)) throw Error("gamma_radius_alt needs gamma >= 0 and r > 0");
  const TheoryConstants& c = theory_constants();
  BasinRadius out;
  const double inj = c.t0 * r;
  const double curve = gamma > 0.0 ? c.nu0 / gamma : kInf;
  if (curve < inj) {
    out.value = curve;
    out.binding_term = RadiusTerm::AltGammaTerm;
  } else {
    out.value = inj;
    out.binding_term = RadiusTerm::AltInjectivityTerm;
  }
  return out;
}

std::string to_string(RadiusComparison c) {
  switch (c) {
    case RadiusComparison::ClassicSharper: return "ClassicSharper";
    case RadiusComparison::AltSharper: return "AltSharper";
    case RadiusComparison::Equal: return "Equal";
  }
  return "Unknown";
}

RadiusComparison radius_comparator(double k, double gamma, double r, double tol) {
  const double classic = gamma_radius(k, gamma, r).value;
  const double alt = gamma_radius_alt(gamma, r).value;
  if (std::isinf(classic) && std::isinf(alt)) return RadiusComparison::Equal;
  if (std::abs(classic - alt) <= tol * (1.0 + std::min(classic, alt)))
    return RadiusComparison::Equal;
  return classic > alt ? RadiusComparison::ClassicSharper : RadiusComparison::AltSharper;
}

double radius_crossover_k() {
  const double alt = gamma_radius_alt(1.0, kInf).value;
  return bisect_root([alt](double k) { return alt - gamma_radius(k, 1.0, kInf).value; }, 1.0,
                     100.0);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "Certified";
    case Verdict::NotCertified: return "NotCertified";
    case Verdict::SingularDerivative: return "SingularDerivative";
  }
  return "Unknown";
}

AlphaCertificate alpha_certify(const Problem& problem, const Point& z, const GammaOptions& opts) {
  AlphaCertificate cert;
  cert.r_z = injectivity_radius(z);
  const LocalSystem sys = local_system(problem, z);
  if (sys.singular) {
    cert.beta = kInf;
    cert.gamma_bracket.lower = cert.gamma_bracket.upper = kInf;
    cert.gamma_bracket.truncation_order = std::max(2, opts.k_max);
    cert.alpha_lower = cert.alpha_upper = kInf;
    cert.verdict = Verdict::SingularDerivative;
    return cert;
  }
  cert.beta = sys.solve(sys.value).norm();
  cert.gamma_bracket = gamma_estimate(problem, z, opts);
  cert.alpha_lower = cert.beta * cert.gamma_bracket.lower;
  cert.alpha_upper = cert.beta * cert.gamma_bracket.upper;
  const TheoryConstants& tc = theory_constants();
  if (cert.beta <= tc.s0 * cert.r_z && cert.alpha_upper < tc.alpha0) {
    cert.verdict = Verdict::Certified;
    cert.root_distance_bound = tc.sigma * cert.beta;
  } else {
    cert.verdict = Verdict::NotCertified;
  }
  return cert;
}

double separation_bound(const Problem& problem, const Point& zero, const GammaOptions& opts) {
  const double b = beta(problem, zero);
  if (!(b <= 1e-10)) throw NotAZero("separation_bound needs a zero with invertible derivative");
  const GammaBracket gb = gamma_estimate(problem, zero, opts);
  if (std::isinf(gb.upper)) throw DegenerateRadius("gamma is infinite at the zero");
  const double r = injectivity_radius(zero);
  const std::optional<double> k = spreading_constant(zero);
  const BasinRadius radius = k ? gamma_radius(k, gb.upper, r) : gamma_radius_alt(gb.upper, r);
  return radius.value;
}

const LemmaRow* LemmaReport::find(const std::string& name) const {
  for (const LemmaRow& row : rows)
    if (row.name == name) return &row;
  return nullptr;
}

namespace {

// Frame-to-frame coordinates of parallel transport between two points.
MatrixXd transport_coords(const TangentFrame& from, const TangentFrame& to) {
  const int n = static_cast<int>(from.basis.size());
  MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    const Tangent moved = transport(make_tangent(from.base, from.basis[static_cast<std::size_t>(j)]), to.base);
    m.col(j) = to.to_frame(moved.v);
  }
  return m;
}

double spectral_norm(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

struct SampleOutcome {
  bool ok = false;                // base-anchored rows delivered
  bool zero_rows = false;         // residual and displacement rows delivered
  bool contraction_rows = false;  // one-step rows delivered
  double ratio = 0.0;
  double residual = 0.0;
  double displacement = 0.0;
  double drift = 0.0;
  double contraction = 0.0;
  double slip = 0.0;
};

struct RowAccumulator {
  LemmaRow row;
  explicit RowAccumulator(std::string name) {
    row.name = std::move(name);
    row.worst_margin = kInf;
  }
  void add(double margin) {
    row.samples += 1;
    if (margin >= 0.0) row.passes += 1;
    row.worst_margin = std::min(row.worst_margin, margin);
  }
};

LemmaRow binomial_series_row() {
  RowAccumulator acc("binomial_series");
  for (const double r : {0.1, 0.5, 0.9}) {
    for (int k = 0; k <= 6; ++k) {
      double sum = 0.0;
      double term = 1.0;
      for (int l = 0; l < 20000; ++l) {
        sum += term;
        if (term < 1e-18 * sum) break;
        term *= r * double(k + l + 1) / double(l + 1);
      }
      const double closed = std::pow(1.0 - r, -double(k + 1));
      acc.add(1e-10 * closed - std::abs(sum - closed));
    }
  }
  return acc.row;
}

LemmaRow spread_scalars_row() {
  RowAccumulator acc("spread_scalars");
  const double right = 1.0 - std::sqrt(0.5);
  for (int i = 0; i <= 600; ++i) {
    const double k = std::pow(10.0, double(i) / 100.0);
    const double nu = nu_spread(k);
    const double m1 = right - nu;  // strict bound, no slack needed
    const double half = 0.5;
    const double m2 = half + slack(half) - k * nu / psi(nu);
    acc.add(std::min(m1, m2));
  }
  return acc.row;
}

}  // namespace

LemmaReport lemma_suite(const Problem& problem, const Point& base, int n_samples,
                        std::uint64_t seed) {
  LemmaReport report;
  const auto& man = base.man;
  const bool is_field = problem.kind == ProblemKind::VectorField;
  const double c_adm = 0.98 * (1.0 - std::sqrt(0.5));

  GammaOptions go;
  go.polish = false;
  go.n_dirs = 48;
  go.k_max = 10;
  go.seed = seed;

  const LocalSystem sys_p = local_system(problem, base);
  const double r_p = injectivity_radius(base);
  GammaBracket gb_p;
  double beta_p = kInf;
  bool base_ok = !sys_p.singular;
  if (base_ok) {
    beta_p = sys_p.solve(sys_p.value).norm();
    gb_p = gamma_estimate(problem, base, go);
    base_ok = std::isfinite(gb_p.upper) && gb_p.upper >= 0.0;
  }
  const bool is_zero = base_ok && beta_p <= 1e-10;
  // With the base inside the one-step hypothesis, shrinking a draw always
  // restores it (beta and gamma are continuous in d), so those retries are
  // worth taking. A base outside it can't be rescued that way; its draws
  // feed whatever rows they qualify for.
  const bool base_one_step = base_ok && beta_p * gb_p.upper < c_adm;

  std::vector<SampleOutcome> outcomes;
  if (base_ok && n_samples > 0) {
    double span = c_adm / gb_p.upper;
    if (!std::isfinite(span)) span = 1.0;
    double t_max = 0.95 * std::min(r_p, span);
    if (!std::isfinite(t_max)) t_max = 0.95 * span;

    outcomes.resize(static_cast<std::size_t>(n_samples));
    parallel_for(n_samples, [&](int i) {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t(i) + 1));
      std::uniform_real_distribution<double> uni(0.05, 1.0);
      SampleOutcome out;
      SampleOutcome fallback;
      double shrink = 1.0;
      for (int attempt = 0; attempt < 60 && !out.ok; ++attempt) {
        const Tangent u = random_tangent(base, rng);
        const double un = man->norm(base.x, u.v);
        if (un < 1e-12) continue;
        const double d = t_max * uni(rng) * shrink;
        const Point y = exp_map(base, make_tangent(base, (d / un) * u.v));
        const double r_y = injectivity_radius(y);

        const LocalSystem sys_y = local_system(problem, y);
        if (sys_y.singular || !(d < 0.999 * r_y)) {
          shrink *= 0.6;
          continue;
        }
        const VectorXd wy = sys_y.solve(sys_y.value);
        const double beta_y = wy.norm();
        const GammaBracket gb_y = gamma_estimate(problem, y, go);
        if (!std::isfinite(gb_y.upper)) {
          shrink *= 0.6;
          continue;
        }

        // nu = d gamma(base) < 1 - sqrt(2)/2 holds by construction of t_max,
        // which is all the base-anchored rows assume.
        const double nu = d * gb_p.upper;
        Eigen::ColPivHouseholderQR<MatrixXd> qr_y(sys_y.jacobian);
        const VectorXd dir_amb = sys_y.frame.to_ambient(-wy);

        // derivative ratio, T_base -> T_y operator in frame coordinates
        MatrixXd composed = sys_p.jacobian;
        if (is_field) composed = transport_coords(sys_p.frame, sys_y.frame) * composed;
        {
          const double rhs = (1.0 - nu) * (1.0 - nu) / psi(nu);
          out.ratio = rhs + slack(rhs) - spectral_norm(qr_y.solve(composed));
        }

        if (is_zero) {
          const VectorXd logv = log_map(y, base).v;
          VectorXd lin = sys_y.jacobian * sys_y.frame.to_frame(logv) + sys_y.value;
          if (is_field) {
            const VectorXd amb = sys_y.frame.to_ambient(lin);
            lin = sys_p.frame.to_frame(transport(make_tangent(y, amb), base).v);
          }
          const double rhs_res = nu * d / ((1.0 - nu) * (1.0 - nu));
          out.residual = rhs_res + slack(rhs_res) - sys_p.solve(lin).norm();

          const double rhs_disp = nu * d / psi(nu);
          out.displacement = rhs_disp + slack(rhs_disp) - man->norm(y.x, dir_amb - logv);
          out.zero_rows = true;
        }

        {
          const double rhs1 = ((1.0 - nu) * (1.0 - nu) / psi(nu)) * (beta_p + d / (1.0 - nu));
          const double rhs2 = gb_p.upper / ((1.0 - nu) * psi(nu));
          out.drift = std::min(rhs1 + slack(rhs1) - beta_y, rhs2 + slack(rhs2) - gb_y.lower);
        }
        out.slip = std::isinf(r_y) ? kInf : r_y + slack(r_y) - (r_p - d);
        out.ok = true;

        // The one-step row carries its own hypothesis, nu = beta gamma at y
        // small enough. A draw outside it is redrawn closer in when the base
        // qualifies; otherwise it still counts for the rows above.
        const auto step_retry = [&] {
          if (!base_one_step) return;
          fallback = out;
          out = SampleOutcome{};
          shrink *= 0.6;
        };
        const double nu_step = beta_y * gb_y.upper;
        if (!(beta_y < 0.9 * r_y) || !(nu_step < c_adm)) {
          step_retry();
          continue;
        }
        const Point z1 = exp_map(y, make_tangent(y, dir_amb));
        const LocalSystem sys_1 = local_system(problem, z1);
        if (sys_1.singular) {
          step_retry();
          continue;
        }
        const GammaBracket gb_1 = gamma_estimate(problem, z1, go);
        if (!std::isfinite(gb_1.lower)) {
          step_retry();
          continue;
        }
        const double beta_1 = sys_1.solve(sys_1.value).norm();
        const double rhs1 = ((1.0 - nu_step) / psi(nu_step)) * beta_y * beta_y * gb_y.upper;
        const double rhs2 = nu_step * nu_step / (psi(nu_step) * psi(nu_step));
        out.contraction =
            std::min(rhs1 + slack(rhs1) - beta_1, rhs2 + slack(rhs2) - beta_1 * gb_1.lower);
        out.contraction_rows = true;
      }
      if (!out.ok && fallback.ok) out = fallback;
      outcomes[static_cast<std::size_t>(i)] = out;
    });
  }

  RowAccumulator ratio("derivative_ratio");
  RowAccumulator residual("linearized_residual");
  RowAccumulator displacement("step_displacement");
  RowAccumulator drift("invariant_drift");
  RowAccumulator contraction("newton_contraction");
  RowAccumulator slip("radius_slip");
  for (const SampleOutcome& out : outcomes) {
    if (!out.ok) continue;
    ratio.add(out.ratio);
    drift.add(out.drift);
    slip.add(out.slip);
    if (out.zero_rows) {
      residual.add(out.residual);
      displacement.add(out.displacement);
    }
    if (out.contraction_rows) contraction.add(out.contraction);
  }

  report.rows = {ratio.row,       residual.row, displacement.row,     drift.row,
                 contraction.row, slip.row,     binomial_series_row(), spread_scalars_row()};
  for (const LemmaRow& row : report.rows)
    if (row.samples > 0 && !row.holds()) report.all_hold = false;
  return report;
}

}  // namespace riemalpha
