#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "pblab/dop853.hpp"
#include "pblab/odeim.hpp"
#include "oracles/sinc_spectrum.hpp"

using namespace pblab;
using oracle::sinc_eigenvalues;

namespace {

const SpectralProblem kP{2.0, 0.3};

/// Closed forms at E = 0 with nu = (2l+1)/(2+2a), z = x^{1+a}/(1+a):
///   psi = sqrt(2 pi/(1+a)) sqrt(x) I_nu(z),  chi = sqrt(2x/(pi(1+a))) K_nu(z).
double bessel_psi(double a, double l, double x) {
  const double nu = (2 * l + 1) / (2 + 2 * a), z = std::pow(x, 1 + a) / (1 + a);
  // I_{-v} = I_v + (2/pi) sin(v pi) K_v
  const double i = nu >= 0 ? std::cyl_bessel_i(nu, z)
                           : std::cyl_bessel_i(-nu, z) + 2 / kPi * std::sin(-nu * kPi) * std::cyl_bessel_k(-nu, z);
  return std::sqrt(2 * kPi / (1 + a)) * std::sqrt(x) * i;
}
double bessel_chi(double a, double l, double x) {
  const double nu = (2 * l + 1) / (2 + 2 * a);
  return std::sqrt(2 * x / (kPi * (1 + a))) * std::cyl_bessel_k(nu, std::pow(x, 1 + a) / (1 + a));
}

std::vector<cplx> sample_E() {
  return {{0.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}, {-1.0, 0.5}, {3.0, -2.0},
          {0.5, 4.0}, {-4.0, -1.0}, {6.0, 0.0}, {-2.0, 3.0}, {8.0, -6.0}};
}

/// Monodromy of -Psi'' + (V - E) Psi = 0 around x0 on a circle.
Eigen::Matrix2cd monodromy(const BetheRoots& r, cplx E, cplx x0, double radius) {
  Eigen::Matrix2cd M;
  for (int col = 0; col < 2; ++col) {
    auto rhs = [&](double th, const CVec& v, CVec& dv) {
      const cplx x = x0 + std::polar(radius, th);
      const cplx dx = cplx{0, 1} * std::polar(radius, th);
      dv = {v[1] * dx, (excited_potential(r, x) - E) * v[0] * dx};
    };
    OdeOptions o;
    o.rtol = o.atol = 1e-12;
    Dop853 solver(rhs, o);
    double th = 0;
    CVec v{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0};
    solver.integrate(th, v, 2 * kPi);
    M(0, col) = v[0];
    M(1, col) = v[1];
  }
  return M;
}

}  // namespace

TEST_CASE("problem parameters") {
  CHECK(kP.kappa() == doctest::Approx(1.0 / 3));
  CHECK(std::abs(kP.q() - std::exp(cplx{0, kPi / 3})) < 1e-15);
  const SpectralProblem third{2.0, 0.0};
  CHECK(third.rho() == doctest::Approx(std::pow(6.0, 4.0 / 3) * std::pow(std::tgamma(2.0 / 3), 2)).epsilon(1e-14));
  const SpectralProblem twice = kP.reflected().reflected();
  CHECK(twice.l == doctest::Approx(kP.l).epsilon(1e-15));
  CHECK_THROWS_AS(SpectralProblem({1.0, 0.3}).validate(), ParameterError);
  CHECK_THROWS_AS(SpectralProblem({2.0, -2.5}).validate(), ParameterError);
  CHECK_THROWS_AS(SpectralProblem({2.0, 2.5}).validate(), ParameterError);
}

TEST_CASE("regular solution") {
  SUBCASE("E = 0 closed form") {
    for (double x : {0.5, 1.0, 1.7}) {
      ShootOptions o;
      o.x_match = x;
      const WaveValue w = shoot_psi(kP, 0.0, o);
      CHECK(std::abs(w.psi - bessel_psi(2, 0.3, x)) < 1e-11 * bessel_psi(2, 0.3, x));
      const WaveValue m = shoot_psi(kP.reflected(), 0.0, o);
      CHECK(std::abs(m.psi - bessel_psi(2, -1.3, x)) < 1e-10 * std::abs(bessel_psi(2, -1.3, x)));
    }
  }
  SUBCASE("small-x behaviour") {
    const cplx E{2.0, 1.0};
    ShootOptions o;
    o.x_start = 1e-4;
    o.x_match = 1e-2;
    const WaveValue w = shoot_psi(kP, E, o);
    const double x = o.x_match;
    const cplx ratio = w.psi / (psi_normalization(kP) * std::pow(x, kP.l + 1));
    const cplx c1 = -E / (2 * (2 * kP.l + 3));
    CHECK(std::abs(ratio - (1.0 + c1 * x * x)) < 1e-8);
  }
  SUBCASE("stable under halving x_start") {
    ShootOptions a, b;
    a.x_start = 1e-2;
    b.x_start = 5e-3;
    const WaveValue wa = shoot_psi(kP, 0.0, a), wb = shoot_psi(kP, 0.0, b);
    CHECK(std::abs(wa.psi - wb.psi) < 1e-11 * std::abs(wa.psi));
  }
}

TEST_CASE("decaying solution") {
  SUBCASE("E = 0 closed form") {
    for (double x : {0.5, 1.0, 2.0}) {
      ShootOptions o;
      o.x_match = x;
      CHECK(std::abs(shoot_chi(kP, 0.0, o).psi - bessel_chi(2, 0.3, x)) < 1e-10 * bessel_chi(2, 0.3, x));
    }
  }
  SUBCASE("x_far independence") {
    for (cplx E : {cplx{1.0, 0.0}, cplx{5.0, -3.0}, cplx{40.0, 0.0}}) {
      ShootOptions a, b;
      a.x_far = default_x_far(kP, E);
      b.x_far = 2 * a.x_far;
      const WaveValue wa = shoot_chi(kP, E, a), wb = shoot_chi(kP, E, b);
      CHECK(std::abs(wa.psi - wb.psi) < 1e-9 * std::abs(wa.psi));
    }
  }
  SUBCASE("x_far below the asymptotic regime") {
    ShootOptions o;
    o.x_far = 1.1;
    CHECK_THROWS_AS(shoot_chi(kP, 30.0, o), NumericalError);
  }
}

TEST_CASE("wronskians") {
  const double s = kP.l + 0.5;
  const cplx q = kP.q();
  const cplx target = cplx{0, 2} * (std::pow(q, s) - std::pow(q, -s));
  for (cplx E : sample_E()) {
    CAPTURE(E);
    std::vector<cplx> w_psi, w_chi;
    for (double x : {0.6, 1.0, 1.5}) {
      ShootOptions o;
      o.x_match = x;
      w_psi.push_back(wronskian(shoot_psi(kP, E, o), shoot_psi(kP.reflected(), E, o)));
      w_chi.push_back(wronskian(shoot_chi(kP, E, o), shoot_chi_minus(kP, E, o)));
    }
    for (cplx w : w_psi) CHECK(std::abs(w - target) < 1e-8);
    for (cplx w : w_chi) CHECK(std::abs(w - 2.0) < 1e-8);
  }
}

TEST_CASE("spectral determinant") {
  SUBCASE("normalization at E = 0") {
    CHECK(std::abs(spectral_D(kP, 0.0) - 1.0) < 1e-9);
    CHECK(std::abs(spectral_D(kP, 0.0) * spectral_D(kP.reflected(), 0.0) - 1.0) < 1e-6);
  }
  SUBCASE("independent of x_match") {
    for (cplx E : {cplx{1.0, 0.0}, cplx{2.0, 1.0}, cplx{-3.0, 2.0}}) {
      ShootOptions lo, mid, hi;
      lo.x_match = 0.8;
      hi.x_match = 1.2;
      const cplx d = spectral_D(kP, E, mid);
      CHECK(std::abs(spectral_D(kP, E, lo) - d) < 1e-8 * (1 + std::abs(d)));
      CHECK(std::abs(spectral_D(kP, E, hi) - d) < 1e-8 * (1 + std::abs(d)));
    }
  }
  SUBCASE("decomposition") {
    const Decomposition d = decompose_psi(kP, 1.0);
    CHECK(std::abs(d.D - spectral_D(kP, 1.0)) < 1e-8);
  }
}

TEST_CASE("eigenvalues") {
  const Spectrum sp = eigenvalues(kP, 10);
  REQUIRE(sp.values.size() == 10);
  CHECK(sp.complete);
  CHECK(sp.node_count == 10);
  const auto oracle = sinc_eigenvalues(2, 0.3, 10);
  for (int n = 0; n < 10; ++n) {
    CAPTURE(n);
    CHECK(std::abs(sp.values[n] - oracle[n]) < 1e-5);
    if (n > 0) CHECK(sp.values[n] > sp.values[n - 1]);
    const double E = sp.values[n], dE = 1e-6 * E;
    CHECK((spectral_D(kP, E - dE).real() > 0) != (spectral_D(kP, E + dE).real() > 0));
  }

  SUBCASE("second problem") {
    const SpectralProblem p{3.0, 0.1};
    const Spectrum s3 = eigenvalues(p, 10);
    const auto o3 = sinc_eigenvalues(3, 0.1, 10);
    for (int n = 0; n < 10; ++n) CHECK(std::abs(s3.values[n] - o3[n]) < 1e-5);
  }
}

TEST_CASE("product formula") {
  const double a = kP.alpha;
  const Spectrum sp = eigenvalues(kP, 40);
  REQUIRE(sp.values.size() == 40);
  // E_n^{(1+a)/(2a)} is asymptotically linear in n; the tail beyond n = 40
  // uses that fit.
  const double g = (1 + a) / (2 * a);
  const double y39 = std::pow(sp.values[38], g), y40 = std::pow(sp.values[39], g);
  const double slope = y40 - y39, offset = y40 - 40 * slope;
  auto tail_log = [&](double E) {
    double s = 0;
    for (long n = 41; n <= 2'000'000; ++n) s += std::log1p(-E / std::pow(slope * n + offset, 1 / g));
    const double N = 2'000'000.5;
    s -= E * std::pow(slope, -1 / g) * std::pow(N, 1 - 1 / g) / (1 / g - 1);
    return s;
  };
  const double D0 = spectral_D(kP, 0.0).real();
  for (double frac : {-0.5, 0.25, 0.5}) {
    const double E = frac * sp.values[0];
    double log_prod = 0;
    for (double En : sp.values) log_prod += std::log1p(-E / En);
    const double with_tail = std::exp(log_prod + tail_log(E));
    const double d = spectral_D(kP, E).real() / D0;
    CAPTURE(E);
    CHECK(std::abs(with_tail - d) < 1e-3);
  }
}

TEST_CASE("quantum wronskian") {
  for (const SpectralProblem& p : {kP, SpectralProblem{3.0, 0.1}})
    for (cplx E : sample_E()) {
      CAPTURE(E);
      CHECK(std::abs(quantum_wronskian_residual(p, E)) <= 1e-6);
    }
  SUBCASE("E = 0 is the product identity") {
    const double s = kP.l + 0.5;
    const cplx q = kP.q();
    const cplx expected = (std::pow(q, s) - std::pow(q, -s)) *
                          (spectral_D(kP, 0.0) * spectral_D(kP.reflected(), 0.0) - 1.0);
    CHECK(std::abs(quantum_wronskian_residual(kP, 0.0) - expected) < 1e-12);
  }
  SUBCASE("reflection flips the sign") {
    for (cplx E : {cplx{1.0, 0.0}, cplx{2.0, 1.0}}) {
      const cplx r = quantum_wronskian_residual(kP, E), m = quantum_wronskian_residual(kP.reflected(), E);
      CHECK(std::abs(r + m) < 1e-12);
    }
  }
}

TEST_CASE("discrete symmetries") {
  for (cplx E : {cplx{1.0, 0.0}, cplx{2.0, 1.0}, cplx{-3.0, 2.0}}) {
    const SymmetryReport r = symmetry_checks(kP, E);
    CHECK(r.c_relation <= 1e-6);
    CHECK(r.psi_minus_expansion <= 1e-6);
    CHECK(r.d_consistency <= 1e-8);
    CHECK(r.wronskian_pin <= 1e-8);
    CHECK(r.chi_wronskian <= 1e-8);
    CHECK(std::isfinite(std::abs(r.u)));
  }
}

TEST_CASE("BLZ map") {
  const double kappa = 1.0 / 3, p = 0.2;
  const SpectralProblem sp{2.0, 2 * p / kappa - 0.5};
  CHECK(std::abs(blz_A(kappa, 0.0, p) - spectral_D(sp, 0.0)) < 1e-14);
  const cplx lam{0.4, 0.3};
  CHECK(std::abs(blz_A(kappa, lam, p) - blz_A(kappa, -lam, p)) < 1e-12);
  CHECK(std::abs(blz_A(kappa, lam, p) - spectral_D(sp, sp.rho() * lam * lam)) < 1e-14);
  CHECK_THROWS_AS(blz_A(0.5, lam, p), ParameterError);
  CHECK_THROWS_AS(blz_A(0.7, lam, p), ParameterError);
}

TEST_CASE("Bethe equations") {
  const double a = 2.0, l = 0.3;
  const double closed = ((2 * l + 1) * (2 * l + 1) - 4 * a * a) / (4 * a);
  for (cplx init : {cplx{5.0, 1.0}, cplx{-10.0, 0.0}, cplx{0.0, 0.3}, cplx{-1.0, -7.0}}) {
    const BetheRoots r = bethe_solve(a, l, {init});
    CHECK(std::abs(r.z[0] - closed) < 1e-10);
    CHECK(r.residual <= 1e-10);
  }
  const BetheRoots r2 = bethe_solve(a, l, {{1.0, 1.0}, {-3.0, 0.5}});
  REQUIRE(r2.z.size() == 2);
  CHECK(r2.residual <= 1e-10);
  CHECK(std::abs(r2.z[0] - r2.z[1]) > 1.0);
  CHECK(r2.z[0].real() < r2.z[1].real());
  const BetheRoots swapped = bethe_solve(a, l, {{-3.0, 0.5}, {1.0, 1.0}});
  for (int k = 0; k < 2; ++k) CHECK(std::abs(swapped.z[k] - r2.z[k]) < 1e-10);
  CHECK_THROWS_AS(bethe_solve(a, l, {{1.0, 0.0}, {1.0, 0.0}}), ParameterError);
}

TEST_CASE("excited-state potential") {
  const double a = 2.0, l = 0.3;
  SUBCASE("no roots gives the ground state") {
    const BetheRoots none{a, l, {}, 0.0};
    for (double x : {0.3, 1.0, 2.2}) CHECK(excited_potential(none, x) == std::pow(x, 2 * a) + l * (l + 1) / (x * x));
  }
  const BetheRoots r1 = bethe_solve(a, l, {{1.0, 0.0}});
  const BetheRoots r2 = bethe_solve(a, l, {{1.0, 1.0}, {-3.0, 0.5}});
  SUBCASE("change of variables") {
    std::vector<cplx> grid;
    for (int i = 0; i < 50; ++i) grid.emplace_back(0.1 + 0.1 * i, 0.0);
    CHECK(change_of_variables_residual(r1, 1.7, grid) <= 1e-8);
    CHECK(change_of_variables_residual(r1, 1.7, grid, ZCoefficient::AsPrinted) > 1e-2);
    std::vector<cplx> shifted;
    for (const cplx& z : grid) shifted.push_back(z + cplx{0, 0.3});
    CHECK(change_of_variables_residual(r2, cplx{1.7, 0.4}, shifted) <= 1e-8);
  }
  SUBCASE("double pole coefficient") {
    const double k = 1 / (1 + a);
    for (const cplx& zk : r2.z) {
      // Laurent coefficient of (z - zk)^{-2} of the substituted potential at
      // E = 0 (the E term has a branch cut on the negative axis)
      cplx c{};
      const int m = 256;
      const double rad = 0.05 * std::abs(zk);
      for (int j = 0; j < m; ++j) {
        const cplx e = std::polar(1.0, 2 * kPi * (j + 0.5) / m);
        const cplx z = zk + rad * e;
        const cplx x = std::pow(z, k / 2), xp = k / 2 * std::pow(z, k / 2 - 1);
        const cplx w = xp * xp * excited_potential(r2, x) + std::pow(k / 2 - 1, 2) / (4.0 * z * z) +
                       (k / 2 - 1) / (2.0 * z * z);
        c += w * std::pow(rad * e, 2);
      }
      c /= double(m);
      CHECK(std::abs(c - 2.0) < 1e-9);
    }
  }
  SUBCASE("Bethe roots give apparent singularities") {
    const cplx E{1.3, 0.2};
    for (const cplx& zk : r2.z) {
      const cplx xk = std::pow(zk, 1 / (2 * a + 2));
      const Eigen::Matrix2cd M = monodromy(r2, E, xk, 0.05 * std::abs(xk));
      CHECK((M - Eigen::Matrix2cd::Identity()).norm() < 1e-8);
    }
    BetheRoots off = r2;
    off.z[0] += 0.05;
    const cplx xk = std::pow(off.z[0], 1 / (2 * a + 2));
    const Eigen::Matrix2cd M = monodromy(off, E, xk, 0.05 * std::abs(xk));
    CHECK((M - Eigen::Matrix2cd::Identity()).norm() > 1e-3);
  }
  SUBCASE("singular locus") {
    const double x1 = std::pow(r2.z[1].real(), 1 / (2 * a + 2));
    CHECK_THROWS_AS(excited_potential(r2, x1), ConditioningError);
  }
}

TEST_CASE("csv output") {
  std::ostringstream a, b;
  write_spectrum_csv(a, {1.5, 2.5});
  CHECK(a.str().rfind("n,E\n1,", 0) == 0);
  write_determinant_csv(b, {cplx{1, 2}}, {cplx{3, 4}});
  CHECK(b.str().rfind("re_E,im_E,re_D,im_D\n", 0) == 0);
}
