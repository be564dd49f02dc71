#include <doctest.h>

#include <cmath>

#include "pblab/dop853.hpp"
#include "pblab/jet.hpp"
#include "pblab/quadrature.hpp"

using namespace pblab;

TEST_CASE("jet derivatives of a rational-exponential expression") {
  using J = Jet<4, 3>;
  const cplx x0{0.7, 0.2}, t0{-0.3, 0.1};
  const J x = J::x_variable(x0), t = J::t_variable(t0);
  const J f = exp(x * t) / (x - 2.0);
  // d/dx and d/dt by hand
  const cplx e = std::exp(x0 * t0), d = x0 - 2.0;
  CHECK(std::abs(f.derivative(0, 0) - e / d) < 1e-14);
  CHECK(std::abs(f.derivative(1, 0) - (t0 * e / d - e / (d * d))) < 1e-13);
  CHECK(std::abs(f.derivative(0, 1) - x0 * e / d) < 1e-13);
  // mixed second derivative: d/dt [t e/d - e/d^2] = e/d + x t e/d - x e/d^2
  const cplx fxt = e / d + x0 * t0 * e / d - x0 * e / (d * d);
  CHECK(std::abs(f.derivative(1, 1) - fxt) < 1e-13);
}

TEST_CASE("jet log, pow and dx agree with direct formulas") {
  using J = Jet<5, 0>;
  const cplx x0{1.3, -0.4};
  const J x = J::x_variable(x0);
  const J g = log(x * x + 1.0);
  CHECK(std::abs(g.derivative(1, 0) - 2.0 * x0 / (x0 * x0 + 1.0)) < 1e-13);
  const J p = pow(x, cplx{2.5});
  CHECK(std::abs(p.derivative(3, 0) - 2.5 * 1.5 * 0.5 * std::pow(x0, -0.5)) < 1e-12);
  const J q = ipow(x, 4);
  CHECK(std::abs(q.dx().dx().value() - 12.0 * x0 * x0) < 1e-12);
  CHECK(std::abs(sqrt(x * x).value() - x0) < 1e-14);
}

TEST_CASE("dop853 integrates a complex linear system to tolerance") {
  const cplx lambda{-0.3, 2.0};
  auto rhs = [&](double, const CVec& y, CVec& dy) {
    dy.resize(y.size());
    dy[0] = lambda * y[0];
  };
  double errs[2];
  int i = 0;
  for (double tol : {1e-8, 1e-11}) {
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    Dop853 solver(rhs, opt);
    double t = 0;
    CVec y{cplx{1.0, 0.5}};
    solver.integrate(t, y, 5.0);
    errs[i++] = std::abs(y[0] - cplx{1.0, 0.5} * std::exp(lambda * 5.0));
    CHECK(t == 5.0);
  }
  CHECK(errs[0] < 1e-6);
  CHECK(errs[1] < errs[0]);
  CHECK(errs[1] < 1e-9);
}

TEST_CASE("dop853 integrates backwards and along complex segments") {
  auto rhs = [](double, const CVec& y, CVec& dy) {
    dy = {y[1], -y[0]};
  };
  Dop853 solver(rhs);
  double t = 2.0;
  CVec y{std::sin(2.0), std::cos(2.0)};
  solver.integrate(t, y, -1.0);
  CHECK(std::abs(y[0] - std::sin(-1.0)) < 1e-9);

  // dy/dz = y along a complex segment gives exp(z1 - z0)
  auto f = [](cplx, const CVec& u, CVec& du) { du = u; };
  const CVec out = integrate_segment(f, {0, 0}, {1.0, 2.0}, {1.0}, OdeOptions{});
  CHECK(std::abs(out[0] - std::exp(cplx{1.0, 2.0})) < 1e-9);
}

TEST_CASE("gauss-kronrod is exact on polynomials and adaptive on kinks") {
  auto poly = [](double x) { return cplx{std::pow(x, 20) - 3 * x * x}; };
  const QuadResult r = integrate_gk(poly, -1, 1);
  CHECK(std::abs(r.value - (2.0 / 21 - 2.0)) < 1e-14);

  auto gauss = [](double x) { return cplx{std::exp(-x * x / 2)}; };
  CHECK(std::abs(integrate_gk(gauss, -12, 12).value - std::sqrt(2 * kPi)) < 1e-12);

  auto kink = [](double x) { return cplx{std::pow(std::abs(x - 0.3), 1.7)}; };
  const double exact = (std::pow(1.3, 2.7) + std::pow(0.7, 2.7)) / 2.7;
  CHECK(std::abs(integrate_gk(kink, -1, 1, {}, {0.3}).value - exact) < 1e-11);

  auto endpoint = [](double x) { return cplx{std::sqrt(x)}; };
  CHECK(std::abs(integrate_gk(endpoint, 0, 1).value - 2.0 / 3) < 1e-10);
}

TEST_CASE("integrate_or_throw carries the best estimate") {
  auto bad = [](double x) { return cplx{1.0 / std::sqrt(std::abs(x))}; };
  QuadOptions opt;
  opt.max_intervals = 10;
  opt.abs_tol = 1e-14;
  try {
    integrate_or_throw(bad, -1, 1, opt);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(std::abs(e.best_estimate()) > 1.0);
    CHECK(e.error_estimate() > 0);
  }
}
