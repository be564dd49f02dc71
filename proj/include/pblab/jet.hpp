#pragma once

// Truncated bivariate Taylor arithmetic.
//
// A Jet<NX, NT> holds the coefficients c(a, b) of
//   f(x0 + ex, t0 + et) = sum_{a<=NX, b<=NT} c(a, b) ex^a et^b
// with ex^(NX+1) = et^(NT+1) = 0.  Arithmetic on jets propagates exact
// partial derivatives through rational and elementary expressions, which
// is how every identity check in this library obtains its x- and
// t-derivatives without finite differences.

#include <array>
#include <cmath>

#include "pblab/common.hpp"

namespace pblab {

template <int NX, int NT>
class Jet {
  static_assert(NX >= 0 && NT >= 0);

 public:
  static constexpr int kOrderX = NX;
  static constexpr int kOrderT = NT;
  static constexpr int kSize = (NX + 1) * (NT + 1);

  Jet() { c_.fill(cplx{}); }
  Jet(cplx value) : Jet() { c_[0] = value; }  // NOLINT: implicit lift
  Jet(double value) : Jet(cplx{value}) {}     // NOLINT: implicit lift

  /// The independent variable x at x0.
  static Jet x_variable(cplx x0) {
    Jet j(x0);
    if constexpr (NX >= 1) j(1, 0) = 1.0;
    return j;
  }
  /// The independent variable t at t0.
  static Jet t_variable(cplx t0) {
    Jet j(t0);
    if constexpr (NT >= 1) j(0, 1) = 1.0;
    return j;
  }

  cplx& operator()(int a, int b) { return c_[a * (NT + 1) + b]; }
  const cplx& operator()(int a, int b) const { return c_[a * (NT + 1) + b]; }

  cplx value() const { return c_[0]; }

  /// d^a/dx^a d^b/dt^b at the expansion point.
  cplx derivative(int a, int b) const {
    return (*this)(a, b) * factorial(a) * factorial(b);
  }

  /// Partial derivative in x.  The top x-order of the result is lost.
  Jet dx() const {
    Jet r;
    for (int a = 0; a < NX; ++a)
      for (int b = 0; b <= NT; ++b) r(a, b) = (*this)(a + 1, b) * double(a + 1);
    return r;
  }
  /// Partial derivative in t.  The top t-order of the result is lost.
  Jet dt() const {
    Jet r;
    for (int a = 0; a <= NX; ++a)
      for (int b = 0; b < NT; ++b) r(a, b) = (*this)(a, b + 1) * double(b + 1);
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  Jet operator-() const {
    Jet r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& f, const Jet& g) {
    Jet r;
    for (int a1 = 0; a1 <= NX; ++a1)
      for (int b1 = 0; b1 <= NT; ++b1) {
        const cplx fv = f(a1, b1);
        if (fv == cplx{}) continue;
        for (int a2 = 0; a1 + a2 <= NX; ++a2)
          for (int b2 = 0; b1 + b2 <= NT; ++b2) r(a1 + a2, b1 + b2) += fv * g(a2, b2);
      }
    return r;
  }

  friend Jet reciprocal(const Jet& f) {
    Jet g;
    const cplx inv0 = 1.0 / f(0, 0);
    for (int a = 0; a <= NX; ++a)
      for (int b = 0; b <= NT; ++b) {
        cplx acc = (a == 0 && b == 0) ? cplx{1.0} : cplx{};
        for (int i = 0; i <= a; ++i)
          for (int j = 0; j <= b; ++j) {
            if (i == 0 && j == 0) continue;
            acc -= f(i, j) * g(a - i, b - j);
          }
        g(a, b) = acc * inv0;
      }
    return g;
  }

  friend Jet operator/(const Jet& f, const Jet& g) { return f * reciprocal(g); }

  friend Jet operator+(Jet a, cplx s) { a.c_[0] += s; return a; }
  friend Jet operator+(cplx s, Jet a) { a.c_[0] += s; return a; }
  friend Jet operator-(Jet a, cplx s) { a.c_[0] -= s; return a; }
  friend Jet operator-(cplx s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }
  friend Jet operator/(cplx s, const Jet& a) { return reciprocal(a) * s; }

  friend Jet operator+(Jet a, double s) { return a + cplx{s}; }
  friend Jet operator+(double s, Jet a) { return a + cplx{s}; }
  friend Jet operator-(Jet a, double s) { return a - cplx{s}; }
  friend Jet operator-(double s, const Jet& a) { return cplx{s} - a; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
  friend Jet operator/(double s, const Jet& a) { return cplx{s} / a; }

  /// Nilpotent part (all coefficients except the constant term).
  Jet nilpotent() const {
    Jet r = *this;
    r.c_[0] = 0.0;
    return r;
  }

  /// Lift into a jet with at least as many orders in each variable.
  template <int MX, int MT>
  Jet<MX, MT> lift() const {
    Jet<MX, MT> r;
    for (int a = 0; a <= NX && a <= MX; ++a)
      for (int b = 0; b <= NT && b <= MT; ++b) r(a, b) = (*this)(a, b);
    return r;
  }

 private:
  static double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  }

  std::array<cplx, kSize> c_;
};

template <int NX, int NT>
Jet<NX, NT> exp(const Jet<NX, NT>& f) {
  const Jet<NX, NT> r = f.nilpotent();
  Jet<NX, NT> sum(1.0), term(1.0);
  for (int n = 1; n <= NX + NT; ++n) {
    term = term * r * (1.0 / n);
    sum += term;
  }
  return sum * std::exp(f.value());
}

template <int NX, int NT>
Jet<NX, NT> log(const Jet<NX, NT>& f) {
  const Jet<NX, NT> r = f.nilpotent() * (1.0 / f.value());
  Jet<NX, NT> sum(std::log(f.value())), power(1.0);
  for (int n = 1; n <= NX + NT; ++n) {
    power = power * r;
    sum += power * ((n % 2 == 1 ? 1.0 : -1.0) / n);
  }
  return sum;
}

/// Principal-branch power.
template <int NX, int NT>
Jet<NX, NT> pow(const Jet<NX, NT>& f, cplx p) {
  const Jet<NX, NT> r = f.nilpotent() * (1.0 / f.value());
  // (1 + r)^p by the binomial series, which terminates on nilpotent r.
  Jet<NX, NT> sum(1.0), term(1.0);
  cplx coeff = 1.0;
  for (int n = 1; n <= NX + NT; ++n) {
    coeff *= (p - double(n - 1)) / double(n);
    term = term * r;
    sum += term * coeff;
  }
  return sum * std::pow(f.value(), p);
}

template <int NX, int NT>
Jet<NX, NT> sqrt(const Jet<NX, NT>& f) {
  return pow(f, cplx{0.5});
}

/// Integer power by repeated multiplication.
template <int NX, int NT>
Jet<NX, NT> ipow(const Jet<NX, NT>& f, int n) {
  Jet<NX, NT> r(1.0);
  for (int i = 0; i < n; ++i) r = r * f;
  return r;
}

inline cplx ipow(cplx z, int n) {
  cplx r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

}  // namespace pblab
