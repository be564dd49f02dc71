#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pblab/qpii.hpp"

using namespace pblab;

namespace {

const Field2D& kappa_one() {
  static const Field2D f = [] {
    Grid2D g;
    g.t_min = -8;
    g.n_t = 640;
    g.n_x = 640;
    return solve_qpii(1.0, g);
  }();
  return f;
}

std::vector<double> t_points() {
  std::vector<double> t;
  for (double v = -5; v <= 2.0001; v += 0.25) t.push_back(v);
  return t;
}

}  // namespace

TEST_CASE("grid validation") {
  Grid2D g;
  g.n_x = 4;
  CHECK_THROWS_AS(g.validate(), ParameterError);
  g = Grid2D{};
  g.t_min = 9;
  CHECK_THROWS_AS(solve_qpii(1.0, g), ParameterError);
  CHECK_THROWS_AS(solve_qpii(-1.0, Grid2D{}), ParameterError);
  g = Grid2D{};
  g.x_max = 2;  // parabola x^2 = t_max not covered
  CHECK_THROWS_AS(solve_qpii(1.0, g), ParameterError);
}

// F is monotone in t only away from the terminal layer
TEST_CASE("maximum principle and monotonicity") {
  for (double kappa : {0.5, 1.0, 2.0}) {
    Grid2D g;
    g.n_t = 200;
    g.n_x = 300;
    const Field2D f = solve_qpii(kappa, g);
    double lo = 1, hi = 0, dec_x = 0, dec_t = 0;
    for (int i = 0; i < g.n_t; ++i)
      for (int j = 0; j < g.n_x; ++j) {
        lo = std::min(lo, f.at(i, j));
        hi = std::max(hi, f.at(i, j));
        if (j > 0) dec_x = std::max(dec_x, f.at(i, j - 1) - f.at(i, j));
        if (i > 0 && g.t(i) <= g.t_max - 4) dec_t = std::max(dec_t, f.at(i - 1, j) - f.at(i, j));
      }
    CHECK(lo >= -1e-12);
    CHECK(hi <= 1 + 1e-12);
    CHECK(dec_x <= 1e-12);
    CHECK(dec_t <= 1e-12);
  }
}

TEST_CASE("residual of exact and non-solutions") {
  Grid2D g;
  g.n_t = 20;
  g.n_x = 30;
  Field2D one{g, std::vector<double>(std::size_t(g.n_t) * g.n_x, 1.0), 1.0};
  CHECK(qpii_residual(one) == 0.0);
  Field2D lin = one;
  double expected = 0;
  for (int i = 0; i < g.n_t; ++i)
    for (int j = 0; j < g.n_x; ++j) {
      lin.at(i, j) = g.x(j);
      if (i > 0 && j > 0 && i + 1 < g.n_t && j + 1 < g.n_x)
        expected = std::max(expected, std::abs(g.t(i) - g.x(j) * g.x(j)));
    }
  CHECK(qpii_residual(lin) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("solver residual decreases under refinement") {
  double prev = 1e300;
  for (int n : {600, 1200}) {
    Grid2D g;
    g.t_min = -6;
    g.n_t = n;
    g.n_x = n;
    SolveOptions o;
    o.max_substep = 0.5 * g.dt();
    const double r = qpii_residual(solve_qpii(1.0, g, {}, o), 4.0);
    MESSAGE("n=", n, " residual(t<=4)=", r, " C=r/(dt+dx^2)=", r / (g.dt() + g.dx() * g.dx()));
    CHECK(r < prev / 1.6);
    prev = r;
  }
}

TEST_CASE("Tracy-Widom table boundary behaviour") {
  const TWTable tw = extract_tw(kappa_one());
  CHECK(tw.interpolate(-7.5) < 1e-6);
  CHECK(tw.interpolate(4.0) > 1 - 1e-4);
  for (std::size_t i = 1; i < tw.cdf_values.size(); ++i) CHECK(tw.cdf_values[i] >= tw.cdf_values[i - 1] - 1e-12);
  // tabulated TW2 quantiles (Tracy-Widom 1994)
  CHECK(std::abs(tw.interpolate(-3.0) - 0.080361) < 2e-3);
  CHECK(std::abs(tw.interpolate(-2.0) - 0.413224) < 2e-3);
  CHECK(std::abs(tw.interpolate(-1.0) - 0.807225) < 2e-3);
  // the uncorrected edge value is biased by the transport shift
  const TWTable direct = extract_tw(kappa_one(), 1e-3, TWReadout::Direct);
  CHECK(std::abs(direct.interpolate(-2.0) - 0.413224) > 0.02);
  std::ostringstream csv;
  write_tw_csv(tw, csv);
  CHECK(csv.str().rfind("t,F_beta,stderr\n", 0) == 0);
}

TEST_CASE("characteristic time matches the kappa/x asymptotics") {
  for (double x : {8.0, 16.0, 32.0}) {
    const double dt = characteristic_time(-2.0, x, 1.5) + 2.0;
    CHECK(std::abs(dt - 1.5 / x) < 5.0 / (x * x * x));
  }
}

TEST_CASE("terminal condition insensitivity") {
  Grid2D a;
  a.t_min = -6;
  a.n_t = 561;
  a.n_x = 640;
  Grid2D b = a;
  b.t_max = a.t_max + 2;
  b.n_t = 641;
  const TWTable ta = extract_tw(solve_qpii(1.0, a));
  const TWTable tb = extract_tw(solve_qpii(1.0, b));
  double d = 0;
  for (double t = -6; t <= a.t_max - 4; t += 0.1) d = std::max(d, std::abs(ta.interpolate(t) - tb.interpolate(t)));
  CHECK(d < 1e-3);
  TerminalSpec steep;
  steep.steepness = 6;
  const TWTable tc = extract_tw(solve_qpii(1.0, a, steep));
  d = 0;
  for (double t = -6; t <= a.t_max - 4; t += 0.1) d = std::max(d, std::abs(ta.interpolate(t) - tc.interpolate(t)));
  CHECK(d < 1e-3);
}

TEST_CASE("empirical soft-edge CDF") {
  const auto t = t_points();
  const TWTable e1 = empirical_soft_edge_cdf(2.0, 200, 4000, 3, t);
  const TWTable e2 = empirical_soft_edge_cdf(2.0, 200, 4000, 3, t);
  CHECK(e1.cdf_values == e2.cdf_values);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(e1.cdf_values[i] >= e1.cdf_values[i - 1]);
  // stderr shrinks like n^{-1/2}
  const TWTable e4 = empirical_soft_edge_cdf(2.0, 200, 16000, 4, t);
  const std::size_t mid = 12;
  CHECK(e4.stderr_values[mid] / e1.stderr_values[mid] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("PDE and empirical routes agree for beta in {1, 2, 4}") {
  const auto t = t_points();
  struct Case {
    double beta;
    int N;
    long samples;
  };
  for (const Case c : {Case{2.0, 400, 20000}, Case{4.0, 400, 20000}, Case{1.0, 1600, 20000}}) {
    Grid2D g;
    g.t_min = -8;
    g.n_t = 640;
    g.n_x = 640;
    const TWTable pde = extract_tw(solve_qpii(c.beta / 2, g));
    const TWTable emp = empirical_soft_edge_cdf(c.beta, c.N, c.samples, 17, t);
    double max_se = 0;
    for (double s : emp.stderr_values) max_se = std::max(max_se, s);
    const double d = sup_distance(pde, emp, -5, 2);
    MESSAGE("beta=", c.beta, " N=", c.N, " sup distance=", d);
    CHECK(d <= std::max(c.beta == 4.0 ? 0.03 : 0.02, 3 * max_se));
  }
}
