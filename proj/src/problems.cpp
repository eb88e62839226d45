#include "riemalpha/problems.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <random>

namespace riemalpha {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXd unflatten(const VectorXd& v, int n) {
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v(i * n + j);
  return m;
}

VectorXd flatten(const MatrixXd& m) {
  const int n = int(m.rows());
  VectorXd v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i * n + j) = m(i, j);
  return v;
}

std::vector<double> parse_number_list(const std::string& body, const std::string& id) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t next = body.find(',', pos);
    if (next == std::string::npos) next = body.size();
    try {
      out.push_back(std::stod(body.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw UnknownProblem("bad number in problem id: " + id);
    }
    pos = next + 1;
  }
  if (out.empty()) throw UnknownProblem("empty parameter list in problem id: " + id);
  return out;
}

MatrixXd parse_matrix_spec(const std::string& spec, const std::string& id) {
  if (spec.rfind("diag(", 0) == 0 && spec.back() == ')') {
    const auto vals = parse_number_list(spec.substr(5, spec.size() - 6), id);
    MatrixXd a = MatrixXd::Zero(int(vals.size()), int(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) a(int(i), int(i)) = vals[i];
    return a;
  }
  if (spec.rfind("random-spd:", 0) == 0) {
    const std::string rest = spec.substr(11);
    const std::size_t colon = rest.find(':');
    if (colon == std::string::npos) throw UnknownProblem("expected random-spd:n:seed in " + id);
    int n = 0;
    std::uint64_t seed = 0;
    try {
      n = std::stoi(rest.substr(0, colon));
      seed = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw UnknownProblem("bad random-spd parameters in " + id);
    }
    if (n < 2) throw UnknownProblem("random-spd needs n >= 2 in " + id);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    return MatrixXd(g.transpose() * g / double(n));
  }
  throw UnknownProblem("unrecognized matrix spec in problem id: " + id);
}

MatrixXd haar_rotation(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

Problem eigen_field_impl(const MatrixXd& a, bool projective) {
  const int n = int(a.rows());
  if (a.cols() != n || n < 2) throw NotSymmetric("eigen_field needs a square matrix, n >= 2");
  if ((a - a.transpose()).norm() > 1e-12 * (1.0 + a.norm()))
    throw NotSymmetric("eigen_field needs a symmetric matrix");

  Problem p;
  p.kind = ProblemKind::VectorField;
  p.manifold = make_manifold((projective ? "projective:" : "sphere:") + std::to_string(n - 1));
  p.codomain_dim = p.manifold->dim();
  p.evaluate = [a](const VectorXd& x) -> VectorXd {
    const VectorXd ax = a * x;
    return ax - x.dot(ax) * x;
  };
  p.evaluate_jets = [a, n](const std::vector<Jet>& x) -> std::vector<Jet> {
    const int order = x.front().order();
    std::vector<Jet> ax(static_cast<std::size_t>(n), Jet(order));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ax[i] += a(i, j) * x[j];
    Jet s(order);
    for (int i = 0; i < n; ++i) s += x[i] * ax[i];
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(ax[i] - s * x[i]);
    return out;
  };

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
  for (int i = 0; i < n; ++i) {
    const VectorXd v = eig.eigenvectors().col(i);
    p.known_zeros.push_back(make_point(p.manifold, v));
    if (!projective) p.known_zeros.push_back(make_point(p.manifold, -v));
  }
  return p;
}

}  // namespace

Problem eigen_field(const MatrixXd& a) {
  Problem p = eigen_field_impl(a, false);
  p.id = "eigen:n" + std::to_string(a.rows());
  return p;
}

Problem eigen_field_projective(const MatrixXd& a) {
  Problem p = eigen_field_impl(a, true);
  p.id = "eigen-projective:n" + std::to_string(a.rows());
  return p;
}

Problem quadratic_euclidean(const MatrixXd& b, const VectorXd& c, const std::vector<MatrixXd>& q) {
  const int n = int(c.size());
  if (b.rows() != n || b.cols() != n || int(q.size()) != n)
    throw Error("quadratic_euclidean needs consistent dimensions");
  std::vector<MatrixXd> qs;
  qs.reserve(q.size());
  for (const MatrixXd& qi : q) {
    if (qi.rows() != n || qi.cols() != n)
      throw Error("quadratic_euclidean needs consistent dimensions");
    qs.push_back(0.5 * (qi + qi.transpose()));
  }

  Problem p;
  p.kind = ProblemKind::Map;
  p.manifold = make_manifold("euclidean:" + std::to_string(n));
  p.codomain_dim = n;
  p.evaluate = [b, c, qs, n](const VectorXd& x) -> VectorXd {
    VectorXd f = b * x + c;
    for (int i = 0; i < n; ++i) f(i) += x.dot(qs[static_cast<std::size_t>(i)] * x);
    return f;
  };
  p.evaluate_jets = [b, c, qs, n](const std::vector<Jet>& x) -> std::vector<Jet> {
    const int order = x.front().order();
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Jet f = Jet::constant(order, c(i));
      for (int j = 0; j < n; ++j) {
        f += b(i, j) * x[j];
        Jet row(order);
        for (int k = 0; k < n; ++k) row += qs[static_cast<std::size_t>(i)](j, k) * x[k];
        f += x[j] * row;
      }
      out.push_back(f);
    }
    return out;
  };
  // The series truncates at order 2, so the jets have a closed form.
  p.jet_hook = [b, c, qs, n](const VectorXd& z, const VectorXd& u, int order) {
    std::vector<VectorXd> coeffs(static_cast<std::size_t>(order) + 1, VectorXd::Zero(n));
    coeffs[0] = b * z + c;
    for (int i = 0; i < n; ++i) coeffs[0](i) += z.dot(qs[static_cast<std::size_t>(i)] * z);
    if (order >= 1) {
      coeffs[1] = b * u;
      for (int i = 0; i < n; ++i) coeffs[1](i) += 2.0 * z.dot(qs[static_cast<std::size_t>(i)] * u);
    }
    if (order >= 2) {
      for (int i = 0; i < n; ++i) coeffs[2](i) = u.dot(qs[static_cast<std::size_t>(i)] * u);
    }
    return coeffs;
  };
  return p;
}

Problem quad1d() {
  MatrixXd b = MatrixXd::Zero(1, 1);
  VectorXd c(1);
  c << -1.0;
  std::vector<MatrixXd> q{MatrixXd::Identity(1, 1)};
  Problem p = quadratic_euclidean(b, c, q);
  p.id = "quad1d";
  VectorXd root(1);
  root << 1.0;
  p.known_zeros.push_back(make_point(p.manifold, root));
  root << -1.0;
  p.known_zeros.push_back(make_point(p.manifold, root));
  return p;
}

Problem quad2d() {
  MatrixXd b = MatrixXd::Zero(2, 2);
  VectorXd c(2);
  c << -1.0, -4.0;
  std::vector<MatrixXd> q{MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)};
  q[0](0, 0) = 1.0;
  q[1](1, 1) = 1.0;
  Problem p = quadratic_euclidean(b, c, q);
  p.id = "quad2d";
  for (const double x1 : {1.0, -1.0}) {
    for (const double x2 : {2.0, -2.0}) {
      VectorXd root(2);
      root << x1, x2;
      p.known_zeros.push_back(make_point(p.manifold, root));
    }
  }
  return p;
}

Problem so3_alignment_map(const MatrixXd& m) {
  if (m.rows() != 3 || m.cols() != 3) throw SingularInput("so3_alignment_map needs a 3x3 matrix");
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-12 * svd.singularValues()(0))
    throw SingularInput("so3_alignment_map needs a nonsingular matrix");

  Problem p;
  p.kind = ProblemKind::Map;
  p.manifold = make_manifold("so:3");
  p.codomain_dim = 3;
  p.evaluate = [m](const VectorXd& qv) -> VectorXd {
    const MatrixXd b = unflatten(qv, 3).transpose() * m;
    VectorXd f(3);
    f << 0.5 * (b(2, 1) - b(1, 2)), 0.5 * (b(0, 2) - b(2, 0)), 0.5 * (b(1, 0) - b(0, 1));
    return f;
  };
  p.evaluate_jets = [m](const std::vector<Jet>& qv) -> std::vector<Jet> {
    const int order = qv.front().order();
    // b(i,j) = sum_k q(k,i) m(k,j), entries of Q^T M on jets.
    const auto b = [&](int i, int j) {
      Jet acc(order);
      for (int k = 0; k < 3; ++k) acc += m(k, j) * qv[static_cast<std::size_t>(3 * k + i)];
      return acc;
    };
    std::vector<Jet> out;
    out.push_back(0.5 * (b(2, 1) - b(1, 2)));
    out.push_back(0.5 * (b(0, 2) - b(2, 0)));
    out.push_back(0.5 * (b(1, 0) - b(0, 1)));
    return out;
  };

  const MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
  if (polar.determinant() > 0.0) p.known_zeros.push_back(make_point(p.manifold, flatten(polar)));
  return p;
}

ComplexMapProblem complex_quad1d() {
  ComplexMapProblem p;
  p.id = "cquad1d";
  p.dim = 1;
  p.evaluate = [](const VectorXcd& z) -> VectorXcd {
    VectorXcd f(1);
    f(0) = z(0) * z(0) - 1.0;
    return f;
  };
  p.evaluate_jets = [](const std::vector<CJet>& z) -> std::vector<CJet> {
    return {z[0] * z[0] - std::complex<double>(1.0, 0.0)};
  };
  VectorXcd root(1);
  root(0) = 1.0;
  p.known_zeros.push_back(root);
  root(0) = -1.0;
  p.known_zeros.push_back(root);
  return p;
}

ComplexMapProblem complex_quad2(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto draw = [&]() { return std::complex<double>(gauss(rng), gauss(rng)); };

  // f_i = c_i + sum_j b_ij z_j + sum_{j<=k} a_ijk z_j z_k
  std::vector<std::complex<double>> c(2), b(4), a(6);
  for (auto& v : c) v = 0.3 * draw();
  for (auto& v : b) v = draw();
  for (auto& v : a) v = 0.3 * draw();

  ComplexMapProblem p;
  p.id = "cquad2:" + std::to_string(seed);
  p.dim = 2;
  const auto quad_index = [](int i, int j, int k) { return 3 * i + j + k; };  // (j,k) in {00,01,11}
  p.evaluate = [c, b, a, quad_index](const VectorXcd& z) -> VectorXcd {
    VectorXcd f(2);
    for (int i = 0; i < 2; ++i) {
      f(i) = c[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(2 * i)] * z(0) +
             b[static_cast<std::size_t>(2 * i + 1)] * z(1) +
             a[static_cast<std::size_t>(quad_index(i, 0, 0))] * z(0) * z(0) +
             a[static_cast<std::size_t>(quad_index(i, 0, 1))] * z(0) * z(1) +
             a[static_cast<std::size_t>(quad_index(i, 1, 1))] * z(1) * z(1);
    }
    return f;
  };
  p.evaluate_jets = [c, b, a, quad_index](const std::vector<CJet>& z) -> std::vector<CJet> {
    std::vector<CJet> out;
    for (int i = 0; i < 2; ++i) {
      CJet f = z[0] * b[static_cast<std::size_t>(2 * i)] + z[1] * b[static_cast<std::size_t>(2 * i + 1)] +
               (z[0] * z[0]) * a[static_cast<std::size_t>(quad_index(i, 0, 0))] +
               (z[0] * z[1]) * a[static_cast<std::size_t>(quad_index(i, 0, 1))] +
               (z[1] * z[1]) * a[static_cast<std::size_t>(quad_index(i, 1, 1))] +
               c[static_cast<std::size_t>(i)];
      out.push_back(f);
    }
    return out;
  };
  return p;
}

VectorXd realify_vector(const VectorXcd& z) {
  const int n = int(z.size());
  VectorXd x(2 * n);
  for (int i = 0; i < n; ++i) {
    x(i) = z(i).real();
    x(n + i) = z(i).imag();
  }
  return x;
}

VectorXcd complexify_vector(const VectorXd& x) {
  const int n = int(x.size()) / 2;
  VectorXcd z(n);
  for (int i = 0; i < n; ++i) z(i) = {x(i), x(n + i)};
  return z;
}

Problem realify(const ComplexMapProblem& cp) {
  const int n = cp.dim;
  Problem p;
  p.id = "realify:" + cp.id;
  p.kind = ProblemKind::Map;
  p.manifold = make_manifold("euclidean:" + std::to_string(2 * n));
  p.codomain_dim = 2 * n;
  p.evaluate = [cp](const VectorXd& x) -> VectorXd {
    return realify_vector(cp.evaluate(complexify_vector(x)));
  };
  p.evaluate_jets = [cp, n](const std::vector<Jet>& x) -> std::vector<Jet> {
    std::vector<CJet> z;
    z.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z.emplace_back(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(n + i)]);
    const auto f = cp.evaluate_jets(z);
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) out.push_back(f[static_cast<std::size_t>(i)].re);
    for (int i = 0; i < n; ++i) out.push_back(f[static_cast<std::size_t>(i)].im);
    return out;
  };
  for (const VectorXcd& zero : cp.known_zeros)
    p.known_zeros.push_back(make_point(p.manifold, realify_vector(zero)));
  return p;
}

MatrixXcd complex_jacobian(const ComplexMapProblem& p, const VectorXcd& z) {
  MatrixXcd jac(p.dim, p.dim);
  for (int j = 0; j < p.dim; ++j) {
    std::vector<CJet> coords;
    for (int i = 0; i < p.dim; ++i)
      coords.push_back(CJet::linear(1, z(i), i == j ? 1.0 : 0.0));
    const auto f = p.evaluate_jets(coords);
    for (int i = 0; i < p.dim; ++i) jac(i, j) = f[static_cast<std::size_t>(i)].coeff(1);
  }
  return jac;
}

namespace {

bool complex_singular(const MatrixXcd& jac) {
  Eigen::JacobiSVD<MatrixXcd> svd(jac);
  const double smin = svd.singularValues()(jac.rows() - 1);
  const double smax = svd.singularValues()(0);
  return !(smin > 0.0 && smax / smin <= kSingularCond);
}

}  // namespace

VectorXcd complex_newton_direction(const ComplexMapProblem& p, const VectorXcd& z) {
  const MatrixXcd jac = complex_jacobian(p, z);
  if (complex_singular(jac)) throw SingularDerivative("complex derivative is numerically singular");
  return -jac.colPivHouseholderQr().solve(p.evaluate(z));
}

VectorXcd complex_newton_step(const ComplexMapProblem& p, const VectorXcd& z) {
  return z + complex_newton_direction(p, z);
}

double complex_beta(const ComplexMapProblem& p, const VectorXcd& z) {
  const MatrixXcd jac = complex_jacobian(p, z);
  if (complex_singular(jac)) return kInf;
  return jac.colPivHouseholderQr().solve(p.evaluate(z)).norm();
}

GammaBracket complex_gamma_estimate(const ComplexMapProblem& p, const VectorXcd& z,
                                    const GammaOptions& opts) {
  const int k_max = std::max(2, opts.k_max);
  const MatrixXcd jac = complex_jacobian(p, z);
  if (complex_singular(jac)) {
    GammaBracket out;
    out.lower = out.upper = kInf;
    out.truncation_order = k_max;
    return out;
  }
  const auto qr = jac.colPivHouseholderQr();

  DirectionalModel model;
  model.n = 2 * p.dim;
  const VectorXcd z0 = z;
  model.solved_norms = [&p, &qr, z0, k_max](const VectorXd& dir) -> VectorXd {
    const VectorXcd w = complexify_vector(dir);
    std::vector<CJet> coords;
    for (int i = 0; i < int(z0.size()); ++i) coords.push_back(CJet::linear(k_max, z0(i), w(i)));
    const auto f = p.evaluate_jets(coords);
    VectorXd norms(k_max - 1);
    for (int k = 2; k <= k_max; ++k) {
      VectorXcd ck(z0.size());
      for (int i = 0; i < int(z0.size()); ++i) ck(i) = f[static_cast<std::size_t>(i)].coeff(k);
      norms(k - 2) = qr.solve(ck).norm();
    }
    return norms;
  };
  const VectorXcd nd = -qr.solve(p.evaluate(z));
  if (nd.norm() > 1e-12) model.preferred_dir = realify_vector(nd / nd.norm());

  return gamma_from_directional(model, opts);
}

std::vector<CatalogEntry> catalog_list() {
  return {
      {"quad1d", "map", "euclidean:1", "x^2 - 1"},
      {"quad2d", "map", "euclidean:2", "(x1^2 - 1, x2^2 - 4)"},
      {"eigen:diag(1,2,3)", "field", "sphere:2", "Rayleigh eigenvector field"},
      {"eigen:diag(1,2,3,4,5)", "field", "sphere:4", "Rayleigh eigenvector field"},
      {"eigen-projective:diag(1,2,3,4)", "field", "projective:3", "eigenline field"},
      {"so3align:diag(2,1,1)", "map", "so:3", "rotation alignment with the polar factor"},
      {"realify:quad1d", "map", "euclidean:2", "realified z^2 - 1"},
      {"realify:cquad2:1", "map", "euclidean:4", "realified seeded 2-variable quadratic"},
  };
}

Problem make_problem(const std::string& id) {
  if (id == "quad1d") return quad1d();
  if (id == "quad2d") return quad2d();
  if (id.rfind("eigen:", 0) == 0) {
    Problem p = eigen_field(parse_matrix_spec(id.substr(6), id));
    p.id = id;
    return p;
  }
  if (id.rfind("eigen-projective:", 0) == 0) {
    Problem p = eigen_field_projective(parse_matrix_spec(id.substr(17), id));
    p.id = id;
    return p;
  }
  if (id.rfind("so3align:", 0) == 0) {
    const std::string spec = id.substr(9);
    MatrixXd m;
    if (spec == "identity") {
      m = MatrixXd::Identity(3, 3);
    } else if (spec.rfind("random:", 0) == 0) {
      std::uint64_t seed = 0;
      try {
        seed = std::stoull(spec.substr(7));
      } catch (const std::exception&) {
        throw UnknownProblem("bad seed in problem id: " + id);
      }
      VectorXd d(3);
      d << 2.0, 1.0, 1.0;
      m = d.asDiagonal() * haar_rotation(3, seed);
    } else {
      m = parse_matrix_spec(spec, id);
      if (m.rows() != 3) throw UnknownProblem("so3align needs a 3x3 matrix: " + id);
    }
    Problem p = so3_alignment_map(m);
    p.id = id;
    return p;
  }
  if (id == "realify:quad1d") {
    Problem p = realify(complex_quad1d());
    p.id = id;
    return p;
  }
  if (id.rfind("realify:cquad2:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(id.substr(15));
    } catch (const std::exception&) {
      throw UnknownProblem("bad seed in problem id: " + id);
    }
    return realify(complex_quad2(seed));
  }
  throw UnknownProblem("no such problem: " + id);
}

}  // namespace riemalpha
