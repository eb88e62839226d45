#pragma once
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "riemalpha/errors.hpp"

namespace riemalpha {

// Truncated univariate Taylor series sum_k c[k] t^k with a fixed order.
// Ring operations only: that is all the catalog's evaluators need, and the
// geometry-specific series (trig, hyperbolic, matrix exponential) are built
// coefficient-wise at their point of use.
class Jet {
 public:
  explicit Jet(int order) : c_(static_cast<std::size_t>(order) + 1, 0.0) {}

  static Jet constant(int order, double v) {
    Jet j(order);
    j.c_[0] = v;
    return j;
  }
  // v + t, the evaluation variable itself
  static Jet variable(int order, double v) {
    Jet j(order);
    j.c_[0] = v;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& c : c_) c *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r(a.order());
    for (int k = 0; k <= a.order(); ++k) r[k] = -a[k];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int k = 0; k <= r.order(); ++k) {
      double acc = 0.0;
      for (int j = 0; j <= k; ++j) acc += a[j] * b[k - j];
      r[k] = acc;
    }
    return r;
  }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a[0] += s;
    return a;
  }
  friend Jet operator+(double s, Jet a) {
    a[0] += s;
    return a;
  }
  friend Jet operator-(Jet a, double s) {
    a[0] -= s;
    return a;
  }
  friend Jet operator-(double s, const Jet& a) {
    Jet r = -a;
    r[0] += s;
    return r;
  }

  bool finite() const {
    for (double c : c_) {
      if (!std::isfinite(c)) return false;
    }
    return true;
  }

  // Horner evaluation of the partial sum at t.
  double eval(double t) const {
    double acc = 0.0;
    for (int k = order(); k >= 0; --k) acc = acc * t + c_[static_cast<std::size_t>(k)];
    return acc;
  }

 private:
  std::vector<double> c_;
};

// Complex jet as a pair of real jets. The real and imaginary parts run the
// same floating-point operations a realified evaluator performs, so complex
// and realified pipelines agree to roundoff, not merely to truncation error.
struct CJet {
  Jet re, im;

  explicit CJet(int order) : re(order), im(order) {}
  CJet(Jet r, Jet i) : re(std::move(r)), im(std::move(i)) {}

  static CJet constant(int order, std::complex<double> v) {
    CJet j(order);
    j.re[0] = v.real();
    j.im[0] = v.imag();
    return j;
  }
  // c0 + c1 t
  static CJet linear(int order, std::complex<double> c0, std::complex<double> c1) {
    CJet j = constant(order, c0);
    if (order >= 1) {
      j.re[1] = c1.real();
      j.im[1] = c1.imag();
    }
    return j;
  }

  int order() const { return re.order(); }
  std::complex<double> coeff(int k) const { return {re[k], im[k]}; }

  friend CJet operator+(const CJet& a, const CJet& b) { return {a.re + b.re, a.im + b.im}; }
  friend CJet operator-(const CJet& a, const CJet& b) { return {a.re - b.re, a.im - b.im}; }
  friend CJet operator-(const CJet& a) { return {-a.re, -a.im}; }
  friend CJet operator*(const CJet& a, const CJet& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend CJet operator*(const CJet& a, std::complex<double> s) {
    return a * constant(a.order(), s);
  }
  friend CJet operator*(std::complex<double> s, const CJet& a) { return a * s; }
  friend CJet operator+(CJet a, std::complex<double> s) {
    a.re[0] += s.real();
    a.im[0] += s.imag();
    return a;
  }
  friend CJet operator-(CJet a, std::complex<double> s) { return a + (-s); }
  friend CJet operator-(std::complex<double> s, const CJet& a) { return (-a) + s; }
};

// Coefficient-list view of a vector-valued jet: coeffs[k] is the t^k
// coefficient vector. Both representations appear in the geometry kernel.
inline std::vector<Jet> jets_from_coeffs(const std::vector<Eigen::VectorXd>& coeffs) {
  const int order = static_cast<int>(coeffs.size()) - 1;
  const Eigen::Index n = coeffs.front().size();
  std::vector<Jet> jets(static_cast<std::size_t>(n), Jet(order));
  for (int k = 0; k <= order; ++k)
    for (Eigen::Index i = 0; i < n; ++i) jets[static_cast<std::size_t>(i)][k] = coeffs[static_cast<std::size_t>(k)](i);
  return jets;
}

inline std::vector<Eigen::VectorXd> coeffs_from_jets(const std::vector<Jet>& jets) {
  const int order = jets.front().order();
  const Eigen::Index n = static_cast<Eigen::Index>(jets.size());
  std::vector<Eigen::VectorXd> coeffs(static_cast<std::size_t>(order) + 1, Eigen::VectorXd::Zero(n));
  for (int k = 0; k <= order; ++k)
    for (Eigen::Index i = 0; i < n; ++i) coeffs[static_cast<std::size_t>(k)](i) = jets[static_cast<std::size_t>(i)][k];
  return coeffs;
}

}  // namespace riemalpha
