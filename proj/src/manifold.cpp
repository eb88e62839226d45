#include "riemalpha/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>

#include "riemalpha/jet.hpp"

namespace riemalpha {
namespace {

constexpr double kDriftTol = 1e-12;
constexpr double kTiny = 1e-14;
const double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

VectorXd gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

// Chord-based great-circle angle; no cancellation near 0 or pi.
double sphere_angle(const VectorXd& x, const VectorXd& y) {
  if (x.dot(y) >= 0.0) return 2.0 * std::asin(std::min(1.0, 0.5 * (x - y).norm()));
  return kPi - 2.0 * std::asin(std::min(1.0, 0.5 * (x + y).norm()));
}

std::vector<VectorXd> sphere_geo_coeffs(const VectorXd& z, const VectorXd& u, int order) {
  std::vector<VectorXd> g(static_cast<std::size_t>(order) + 1, VectorXd::Zero(z.size()));
  g[0] = z;
  const double s = u.norm();
  if (s < kTiny) return g;
  const VectorXd w = u / s;
  double pk = 1.0;  // s^k / k!
  for (int k = 1; k <= order; ++k) {
    pk *= s / k;
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    g[static_cast<std::size_t>(k)] = (pk * sign) * ((k % 2 == 0) ? z : w);
  }
  return g;
}

// Transported pullback along a great circle: the component of X along the
// geodesic velocity rides back to w, the part normal to the {z, w} plane is
// already parallel.
std::vector<VectorXd> sphere_pullback(const VectorXd& z, const VectorXd& u,
                                      const std::vector<VectorXd>& xc) {
  const double s = u.norm();
  if (s < kTiny) return xc;
  const int order = static_cast<int>(xc.size()) - 1;
  const VectorXd w = u / s;

  std::vector<double> cosj(xc.size(), 0.0), sinj(xc.size(), 0.0);
  double pk = 1.0;
  for (int k = 0; k <= order; ++k) {
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    (k % 2 == 0 ? cosj : sinj)[static_cast<std::size_t>(k)] = sign * pk;
    pk *= s / (k + 1);
  }

  std::vector<double> zdx(xc.size()), wdx(xc.size());
  for (std::size_t j = 0; j < xc.size(); ++j) {
    zdx[j] = z.dot(xc[j]);
    wdx[j] = w.dot(xc[j]);
  }

  std::vector<VectorXd> y(xc.size());
  std::vector<double> a(xc.size(), 0.0);
  for (int k = 0; k <= order; ++k) {
    double ak = 0.0;
    for (int j = 0; j <= k; ++j)
      ak += -sinj[static_cast<std::size_t>(k - j)] * zdx[static_cast<std::size_t>(j)] +
            cosj[static_cast<std::size_t>(k - j)] * wdx[static_cast<std::size_t>(j)];
    a[static_cast<std::size_t>(k)] = ak;
  }
  for (int k = 0; k <= order; ++k) {
    VectorXd yk = xc[static_cast<std::size_t>(k)] + a[static_cast<std::size_t>(k)] * w;
    for (int j = 0; j <= k; ++j) {
      const double aj = a[static_cast<std::size_t>(j)];
      const double cm = cosj[static_cast<std::size_t>(k - j)];
      const double sm = sinj[static_cast<std::size_t>(k - j)];
      yk -= aj * (cm * w - sm * z);
    }
    y[static_cast<std::size_t>(k)] = yk;
  }
  return y;
}

class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int n) : Manifold("euclidean:" + std::to_string(n), n, n) {}

  VectorXd project_point(const VectorXd& x) const override { return x; }
  VectorXd project_tangent(const VectorXd&, const VectorXd& w) const override { return w; }
  VectorXd exp(const VectorXd& z, const VectorXd& u) const override { return z + u; }
  VectorXd log(const VectorXd& z, const VectorXd& y) const override { return y - z; }
  double distance(const VectorXd& x, const VectorXd& y) const override { return (x - y).norm(); }
  VectorXd transport(const VectorXd&, const VectorXd&, const VectorXd& v) const override { return v; }
  double injectivity_radius(const VectorXd&) const override { return kInf; }
  std::optional<double> spreading_constant(const VectorXd&) const override { return 1.0; }

  std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const override {
    std::vector<VectorXd> g(static_cast<std::size_t>(order) + 1, VectorXd::Zero(z.size()));
    g[0] = z;
    if (order >= 1) g[1] = u;
    return g;
  }
  std::vector<VectorXd> pullback_coeffs(const VectorXd&, const VectorXd&,
                                        const std::vector<VectorXd>& xc) const override {
    return xc;
  }

  VectorXd random_point(std::mt19937_64& rng) const override { return gaussian(dim(), rng); }
  std::vector<VectorXd> tangent_basis(const VectorXd&) const override {
    std::vector<VectorXd> b;
    b.reserve(static_cast<std::size_t>(dim()));
    for (int i = 0; i < dim(); ++i) b.push_back(VectorXd::Unit(dim(), i));
    return b;
  }
};

class Sphere final : public Manifold {
 public:
  explicit Sphere(int n) : Manifold("sphere:" + std::to_string(n), n, n + 1) {}

  VectorXd project_point(const VectorXd& x) const override {
    const double nx = x.norm();
    if (nx < kTiny) throw SingularInput("sphere: cannot project the origin");
    return x / nx;
  }
  VectorXd project_tangent(const VectorXd& z, const VectorXd& w) const override {
    return w - z.dot(w) * z;
  }
  VectorXd exp(const VectorXd& z, const VectorXd& u) const override {
    const double s = u.norm();
    VectorXd x = (s < 1e-12) ? VectorXd(z + u) : VectorXd(std::cos(s) * z + (std::sin(s) / s) * u);
    if (std::abs(x.squaredNorm() - 1.0) > kDriftTol) x.normalize();
    return x;
  }
  VectorXd log(const VectorXd& z, const VectorXd& y) const override {
    const double th = sphere_angle(z, y);
    if (th >= kPi * (1.0 - 1e-12))
      throw OutOfInjectivityBall("sphere: log at an antipodal point");
    VectorXd w = y - z.dot(y) * z;
    const double nw = w.norm();
    if (nw < kTiny) return VectorXd::Zero(z.size());
    return (th / nw) * w;
  }
  double distance(const VectorXd& x, const VectorXd& y) const override { return sphere_angle(x, y); }
  VectorXd transport(const VectorXd& z, const VectorXd& y, const VectorXd& v) const override {
    const VectorXd u = log(z, y);
    const double th = u.norm();
    if (th < kTiny) return v;
    const VectorXd w = u / th;
    const VectorXd d1 = -std::sin(th) * z + std::cos(th) * w;
    return project_tangent(y, v + v.dot(w) * (d1 - w));
  }
  double injectivity_radius(const VectorXd&) const override { return kPi; }
  std::optional<double> spreading_constant(const VectorXd&) const override { return 1.0; }

  std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const override {
    return sphere_geo_coeffs(z, u, order);
  }
  std::vector<VectorXd> pullback_coeffs(const VectorXd& z, const VectorXd& u,
                                        const std::vector<VectorXd>& xc) const override {
    return sphere_pullback(z, u, xc);
  }

  VectorXd random_point(std::mt19937_64& rng) const override {
    return gaussian(ambient_dim(), rng).normalized();
  }
};

// P^n(R) as antipodal classes of unit vectors; the stored representative has
// its first coordinate of magnitude > 1e-9 positive.
class Projective final : public Manifold {
 public:
  explicit Projective(int n) : Manifold("projective:" + std::to_string(n), n, n + 1) {}

  static VectorXd canonicalize(VectorXd x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::abs(x(i)) > 1e-9) {
        if (x(i) < 0.0) x = -x;
        break;
      }
    }
    return x;
  }
  VectorXd representative_near(const VectorXd& z, const VectorXd& y) const {
    return (z.dot(y) >= 0.0) ? y : VectorXd(-y);
  }

  VectorXd project_point(const VectorXd& x) const override {
    const double nx = x.norm();
    if (nx < kTiny) throw SingularInput("projective: cannot project the origin");
    return canonicalize(x / nx);
  }
  VectorXd project_tangent(const VectorXd& z, const VectorXd& w) const override {
    return w - z.dot(w) * z;
  }
  VectorXd exp(const VectorXd& z, const VectorXd& u) const override {
    const double s = u.norm();
    VectorXd x = (s < 1e-12) ? VectorXd(z + u) : VectorXd(std::cos(s) * z + (std::sin(s) / s) * u);
    if (std::abs(x.squaredNorm() - 1.0) > kDriftTol) x.normalize();
    return canonicalize(x);
  }
  VectorXd log(const VectorXd& z, const VectorXd& y) const override {
    const VectorXd yr = representative_near(z, y);
    const double th = sphere_angle(z, yr);
    if (th >= 0.5 * kPi * (1.0 - 1e-12))
      throw OutOfInjectivityBall("projective: log at the cut locus");
    VectorXd w = yr - z.dot(yr) * z;
    const double nw = w.norm();
    if (nw < kTiny) return VectorXd::Zero(z.size());
    return (th / nw) * w;
  }
  double distance(const VectorXd& x, const VectorXd& y) const override {
    return sphere_angle(x, representative_near(x, y));
  }
  VectorXd transport(const VectorXd& z, const VectorXd& y, const VectorXd& v) const override {
    const VectorXd yr = representative_near(z, y);
    const VectorXd u = log(z, y);
    const double th = u.norm();
    VectorXd out;
    if (th < kTiny) {
      out = v;
    } else {
      const VectorXd w = u / th;
      const VectorXd d1 = -std::sin(th) * z + std::cos(th) * w;
      out = v + v.dot(w) * (d1 - w);
    }
    // Tangents at the class of y are carried by its canonical representative;
    // crossing to the -y sheet flips the lift.
    if ((yr - y).norm() > 1.0) out = -out;
    return project_tangent(y, out);
  }
  double injectivity_radius(const VectorXd&) const override { return 0.5 * kPi; }
  std::optional<double> spreading_constant(const VectorXd&) const override { return 1.0; }

  std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const override {
    return sphere_geo_coeffs(z, u, order);
  }
  std::vector<VectorXd> pullback_coeffs(const VectorXd& z, const VectorXd& u,
                                        const std::vector<VectorXd>& xc) const override {
    return sphere_pullback(z, u, xc);
  }

  VectorXd random_point(std::mt19937_64& rng) const override {
    return canonicalize(gaussian(ambient_dim(), rng).normalized());
  }
};

// O(n) / SO(n) with the Frobenius (bi-invariant) metric; points are row-major
// n x n matrices, tangents at u are u * A with A antisymmetric. Generators and
// orthogonal arguments are normal matrices, so exp and the principal log go
// through a spectral decomposition.
class Orthogonal final : public Manifold {
 public:
  Orthogonal(int n, bool special)
      : Manifold((special ? std::string("so:") : std::string("o:")) + std::to_string(n), n * (n - 1) / 2, n * n),
        n_(n),
        special_(special) {}

  MatrixXd mat(const VectorXd& x) const {
    return Eigen::Map<const RowMat>(x.data(), n_, n_);
  }
  VectorXd vec(const MatrixXd& m) const {
    RowMat rm = m;
    return Eigen::Map<const VectorXd>(rm.data(), n_ * n_);
  }
  static MatrixXd skew_part(const MatrixXd& m) { return 0.5 * (m - m.transpose()); }

  static MatrixXd expm_antisym(const MatrixXd& a) {
    Eigen::EigenSolver<MatrixXd> es(a);
    const Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::VectorXcd ex(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) ex(i) = std::exp(std::complex<double>(0.0, ev(i).imag()));
    const Eigen::MatrixXcd v = es.eigenvectors();
    return (v * ex.asDiagonal() * v.inverse()).real();
  }
  static MatrixXd logm_orth(const MatrixXd& q) {
    Eigen::EigenSolver<MatrixXd> es(q);
    const Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::VectorXcd lg(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      lg(i) = std::complex<double>(0.0, std::atan2(ev(i).imag(), ev(i).real()));
    const Eigen::MatrixXcd v = es.eigenvectors();
    const MatrixXd a = (v * lg.asDiagonal() * v.inverse()).real();
    return skew_part(a);
  }

  VectorXd project_point(const VectorXd& x) const override {
    Eigen::JacobiSVD<MatrixXd> svd(mat(x), Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixXd u = svd.matrixU();
    const MatrixXd v = svd.matrixV();
    if (special_ && (u * v.transpose()).determinant() < 0.0) u.col(n_ - 1) *= -1.0;
    return vec(u * v.transpose());
  }
  VectorXd project_tangent(const VectorXd& z, const VectorXd& w) const override {
    const MatrixXd zm = mat(z);
    return vec(zm * skew_part(zm.transpose() * mat(w)));
  }
  VectorXd exp(const VectorXd& z, const VectorXd& u) const override {
    const MatrixXd zm = mat(z);
    const MatrixXd a = skew_part(zm.transpose() * mat(u));
    MatrixXd x = zm * expm_antisym(a);
    if ((x.transpose() * x - MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff() > kDriftTol)
      return project_point(vec(x));
    return vec(x);
  }
  VectorXd log(const VectorXd& z, const VectorXd& y) const override {
    check_log_domain(z, y);
    const MatrixXd zm = mat(z);
    return vec(zm * logm_orth(zm.transpose() * mat(y)));
  }
  double distance(const VectorXd& x, const VectorXd& y) const override {
    const MatrixXd q = mat(x).transpose() * mat(y);
    if (q.determinant() < 0.0) return kInf;  // opposite O(n) components
    Eigen::EigenSolver<MatrixXd> es(q);
    const Eigen::VectorXcd ev = es.eigenvalues();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double th = std::atan2(ev(i).imag(), ev(i).real());
      acc += th * th;
    }
    return std::sqrt(acc);
  }
  VectorXd transport(const VectorXd& z, const VectorXd& y, const VectorXd& v) const override {
    check_log_domain(z, y);
    const MatrixXd zm = mat(z);
    const MatrixXd a = logm_orth(zm.transpose() * mat(y));
    const MatrixXd e2 = expm_antisym(0.5 * a);
    const MatrixXd b = skew_part(zm.transpose() * mat(v));
    return project_tangent(y, vec(zm * (e2 * b * e2)));
  }
  double injectivity_radius(const VectorXd&) const override { return 1.0; }
  std::optional<double> spreading_constant(const VectorXd&) const override { return 1.0; }

  std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const override {
    const MatrixXd zm = mat(z);
    const MatrixXd a = skew_part(zm.transpose() * mat(u));
    std::vector<VectorXd> g(static_cast<std::size_t>(order) + 1);
    MatrixXd term = zm;  // z * a^k / k!
    g[0] = vec(term);
    for (int k = 1; k <= order; ++k) {
      term = term * a / static_cast<double>(k);
      g[static_cast<std::size_t>(k)] = vec(term);
    }
    return g;
  }
  std::vector<VectorXd> pullback_coeffs(const VectorXd& z, const VectorXd& u,
                                        const std::vector<VectorXd>& xc) const override {
    const MatrixXd zm = mat(z);
    const MatrixXd a = skew_part(zm.transpose() * mat(u));
    const int order = static_cast<int>(xc.size()) - 1;
    const std::size_t len = xc.size();

    // jets of exp(t a/2), exp(-t a/2) and c(t)^T = exp(-t a) z^T
    std::vector<MatrixXd> eh(len), en(len), ct(len);
    MatrixXd ph = MatrixXd::Identity(n_, n_), pn = ph, pc = zm.transpose();
    for (int k = 0; k <= order; ++k) {
      eh[static_cast<std::size_t>(k)] = ph;
      en[static_cast<std::size_t>(k)] = pn;
      ct[static_cast<std::size_t>(k)] = pc;
      ph = ph * (0.5 * a) / (k + 1);
      pn = pn * (-0.5 * a) / (k + 1);
      pc = (-a) * pc / (k + 1);
    }

    std::vector<MatrixXd> w(len, MatrixXd::Zero(n_, n_));
    for (int k = 0; k <= order; ++k)
      for (int j = 0; j <= k; ++j)
        w[static_cast<std::size_t>(k)] += ct[static_cast<std::size_t>(j)] * mat(xc[static_cast<std::size_t>(k - j)]);

    // y(t) = z * exp(t a/2) w(t) exp(-t a/2)
    std::vector<VectorXd> out(len);
    for (int k = 0; k <= order; ++k) {
      MatrixXd acc = MatrixXd::Zero(n_, n_);
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j + i <= k; ++j)
          acc += eh[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] *
                 en[static_cast<std::size_t>(k - i - j)];
      out[static_cast<std::size_t>(k)] = vec(zm * acc);
    }
    return out;
  }

  VectorXd random_point(std::mt19937_64& rng) const override {
    std::normal_distribution<double> dist;
    MatrixXd g(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g(i, j) = dist(rng);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n_; ++i)
      if (r(i, i) < 0.0) q.col(i) *= -1.0;
    if (special_ && q.determinant() < 0.0) q.col(n_ - 1) *= -1.0;
    return vec(q);
  }

 private:
  void check_log_domain(const VectorXd& z, const VectorXd& y) const {
    // Log chart is valid only while spectral ||z - y|| < 1 (principal branch).
    Eigen::JacobiSVD<MatrixXd> svd(mat(z) - mat(y));
    if (svd.singularValues()(0) >= 1.0)
      throw OutOfInjectivityBall("orthogonal group: ||z - y|| >= 1, log chart invalid");
  }

  int n_;
  bool special_;
};

// Hyperboloid sheet B(x,x) = -1, x0 > 0 in Minkowski space; the induced
// metric is positive definite on tangent spaces.
class Hyperbolic final : public Manifold {
 public:
  explicit Hyperbolic(int n) : Manifold("hyperbolic:" + std::to_string(n), n, n + 1) {}

  static double mink(const VectorXd& u, const VectorXd& v) {
    return -u(0) * v(0) + u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
  }

  VectorXd project_point(const VectorXd& x) const override {
    const double q = -mink(x, x);
    if (q <= 0.0) throw SingularInput("hyperbolic: point is not timelike");
    VectorXd p = x / std::sqrt(q);
    if (p(0) < 0.0) p = -p;
    return p;
  }
  VectorXd project_tangent(const VectorXd& z, const VectorXd& w) const override {
    return w + mink(z, w) * z;
  }
  double inner(const VectorXd&, const VectorXd& u, const VectorXd& v) const override {
    return mink(u, v);
  }
  VectorXd exp(const VectorXd& z, const VectorXd& u) const override {
    const double q = std::max(0.0, mink(u, u));
    const double s = std::sqrt(q);
    VectorXd x = (s < 1e-12) ? VectorXd(z + u) : VectorXd(std::cosh(s) * z + (std::sinh(s) / s) * u);
    if (std::abs(mink(x, x) + 1.0) > kDriftTol) x = project_point(x);
    return x;
  }
  VectorXd log(const VectorXd& z, const VectorXd& y) const override {
    const double th = distance(z, y);
    if (th < kTiny) return VectorXd::Zero(z.size());
    const double c = -mink(z, y);
    VectorXd w = y - c * z;
    const double nw = std::sqrt(std::max(0.0, mink(w, w)));
    if (nw < kTiny) return VectorXd::Zero(z.size());
    return (th / nw) * w;
  }
  double distance(const VectorXd& x, const VectorXd& y) const override {
    const VectorXd d = x - y;
    return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, mink(d, d))));
  }
  VectorXd transport(const VectorXd& z, const VectorXd& y, const VectorXd& v) const override {
    const VectorXd u = log(z, y);
    const double s = std::sqrt(std::max(0.0, mink(u, u)));
    if (s < kTiny) return project_tangent(y, v);
    const VectorXd w = u / s;
    const VectorXd d1 = std::sinh(s) * z + std::cosh(s) * w;
    return project_tangent(y, v + mink(v, w) * (d1 - w));
  }
  double injectivity_radius(const VectorXd&) const override { return kInf; }
  std::optional<double> spreading_constant(const VectorXd&) const override { return std::nullopt; }
  double spreading_in_ball(const VectorXd&, double rho) const override {
    return rho <= 0.0 ? 1.0 : std::sinh(rho) / rho;
  }

  std::vector<VectorXd> geodesic_coeffs(const VectorXd& z, const VectorXd& u, int order) const override {
    std::vector<VectorXd> g(static_cast<std::size_t>(order) + 1, VectorXd::Zero(z.size()));
    g[0] = z;
    const double s = std::sqrt(std::max(0.0, mink(u, u)));
    if (s < kTiny) return g;
    const VectorXd w = u / s;
    double pk = 1.0;
    for (int k = 1; k <= order; ++k) {
      pk *= s / k;
      g[static_cast<std::size_t>(k)] = pk * ((k % 2 == 0) ? z : w);
    }
    return g;
  }
  std::vector<VectorXd> pullback_coeffs(const VectorXd& z, const VectorXd& u,
                                        const std::vector<VectorXd>& xc) const override {
    const double s = std::sqrt(std::max(0.0, mink(u, u)));
    if (s < kTiny) return xc;
    const int order = static_cast<int>(xc.size()) - 1;
    const VectorXd w = u / s;

    std::vector<double> coshj(xc.size(), 0.0), sinhj(xc.size(), 0.0);
    double pk = 1.0;
    for (int k = 0; k <= order; ++k) {
      (k % 2 == 0 ? coshj : sinhj)[static_cast<std::size_t>(k)] = pk;
      pk *= s / (k + 1);
    }

    std::vector<double> zdx(xc.size()), wdx(xc.size());
    for (std::size_t j = 0; j < xc.size(); ++j) {
      zdx[j] = mink(z, xc[j]);
      wdx[j] = mink(w, xc[j]);
    }

    std::vector<VectorXd> y(xc.size());
    std::vector<double> a(xc.size(), 0.0);
    for (int k = 0; k <= order; ++k) {
      double ak = 0.0;
      for (int j = 0; j <= k; ++j)
        ak += sinhj[static_cast<std::size_t>(k - j)] * zdx[static_cast<std::size_t>(j)] +
              coshj[static_cast<std::size_t>(k - j)] * wdx[static_cast<std::size_t>(j)];
      a[static_cast<std::size_t>(k)] = ak;
    }
    for (int k = 0; k <= order; ++k) {
      VectorXd yk = xc[static_cast<std::size_t>(k)] + a[static_cast<std::size_t>(k)] * w;
      for (int j = 0; j <= k; ++j) {
        const double aj = a[static_cast<std::size_t>(j)];
        yk -= aj * (sinhj[static_cast<std::size_t>(k - j)] * z +
                    coshj[static_cast<std::size_t>(k - j)] * w);
      }
      y[static_cast<std::size_t>(k)] = yk;
    }
    return y;
  }

  VectorXd random_point(std::mt19937_64& rng) const override {
    const VectorXd v = 0.7 * gaussian(dim(), rng);
    VectorXd x(ambient_dim());
    x(0) = std::sqrt(1.0 + v.squaredNorm());
    x.tail(dim()) = v;
    return x;
  }
};

}  // namespace

VectorXd Manifold::random_tangent(const VectorXd& z, std::mt19937_64& rng) const {
  return project_tangent(z, gaussian(ambient_dim_, rng));
}

std::vector<VectorXd> Manifold::tangent_basis(const VectorXd& z) const {
  std::vector<VectorXd> cand(static_cast<std::size_t>(ambient_dim_));
  for (int a = 0; a < ambient_dim_; ++a)
    cand[static_cast<std::size_t>(a)] = project_tangent(z, VectorXd::Unit(ambient_dim_, a));

  std::vector<VectorXd> basis;
  std::vector<bool> used(static_cast<std::size_t>(ambient_dim_), false);
  basis.reserve(static_cast<std::size_t>(dim_));
  while (static_cast<int>(basis.size()) < dim_) {
    int best = -1;
    double best_norm = 0.0;
    VectorXd best_w;
    for (int a = 0; a < ambient_dim_; ++a) {
      if (used[static_cast<std::size_t>(a)]) continue;
      VectorXd w = cand[static_cast<std::size_t>(a)];
      for (const VectorXd& b : basis) w -= inner(z, w, b) * b;
      const double nw = norm(z, w);
      if (nw > best_norm) {
        best_norm = nw;
        best = a;
        best_w = w;
      }
    }
    if (best < 0 || best_norm < 1e-10)
      throw Error("tangent_basis: projected ambient axes do not span the tangent space");
    used[static_cast<std::size_t>(best)] = true;
    for (const VectorXd& b : basis) best_w -= inner(z, best_w, b) * b;  // re-orthogonalize
    basis.push_back(best_w / norm(z, best_w));
  }
  return basis;
}

std::shared_ptr<const Manifold> make_manifold(const std::string& id) {
  const auto colon = id.find(':');
  if (colon != std::string::npos) {
    const std::string name = id.substr(0, colon);
    int n = -1;
    try {
      std::size_t pos = 0;
      n = std::stoi(id.substr(colon + 1), &pos);
      if (pos != id.size() - colon - 1) n = -1;
    } catch (const std::exception&) {
      n = -1;
    }
    if (n >= 1) {
      if (name == "euclidean") return std::make_shared<Euclidean>(n);
      if (name == "sphere") return std::make_shared<Sphere>(n);
      if (name == "projective") return std::make_shared<Projective>(n);
      if (name == "hyperbolic") return std::make_shared<Hyperbolic>(n);
      if ((name == "so" || name == "o") && n >= 2)
        return std::make_shared<Orthogonal>(n, name == "so");
    }
  }
  throw UnknownProblem("unknown manifold id: " + id);
}

Point make_point(std::shared_ptr<const Manifold> man, const VectorXd& coords) {
  VectorXd x = man->project_point(coords);
  return Point{std::move(man), std::move(x)};
}

Tangent make_tangent(const Point& base, const VectorXd& coords) {
  return Tangent{base, base.man->project_tangent(base.x, coords)};
}

Point exp_map(const Point& z, const Tangent& u) {
  return Point{z.man, z.man->exp(z.x, u.v)};
}

Tangent log_map(const Point& z, const Point& y) {
  return Tangent{z, z.man->log(z.x, y.x)};
}

double distance(const Point& x, const Point& y) { return x.man->distance(x.x, y.x); }

Tangent transport(const Tangent& v, const Point& y) {
  return Tangent{y, v.base.man->transport(v.base.x, y.x, v.v)};
}

double injectivity_radius(const Point& z) { return z.man->injectivity_radius(z.x); }

std::optional<double> spreading_constant(const Point& z) { return z.man->spreading_constant(z.x); }

Tangent tangent_projection(const Point& z, const VectorXd& ambient) {
  return Tangent{z, z.man->project_tangent(z.x, ambient)};
}

Point random_point(const std::shared_ptr<const Manifold>& man, std::mt19937_64& rng) {
  return Point{man, man->random_point(rng)};
}

Tangent random_tangent(const Point& z, std::mt19937_64& rng) {
  return Tangent{z, z.man->random_tangent(z.x, rng)};
}

}  // namespace riemalpha
