#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "oracles/gaussian_moments.hpp"
#include "pblab/ensemble.hpp"

using namespace pblab;

namespace {

EnsembleSpec gaussian(int m, double beta, double a = 1.0) {
  return EnsembleSpec(m, beta, PotentialSpec::gaussian(a));
}

cplx power_sum_obs(std::span<const double> x, int m) {
  double s = 0;
  for (double v : x) s += std::pow(v, m);
  return s;
}

MCStat mc_power_sum(const SampleBatch& b, int m) {
  std::vector<cplx> v;
  for (const auto& c : b.configs) v.push_back(power_sum_obs(c, m));
  return plain_mean(v);
}

}  // namespace

TEST_CASE("spec invariants") {
  const EnsembleSpec s = gaussian(3, 3.0);
  CHECK(s.kappa() == 1.5);
  CHECK(std::abs(gaussian(2, 2.0).central_charge() - 1.0) < 1e-15);
  CHECK_THROWS_AS(gaussian(0, 2.0), ParameterError);
  CHECK_THROWS_AS(gaussian(2, 0.0), ParameterError);
  CHECK_THROWS_AS(gaussian(2, -1.0), ParameterError);
  CHECK_THROWS_AS(PotentialSpec::multi_penner({1, 1}, {0.5, 0.5}, -1), ParameterError);
  const auto t = PotentialSpec::gaussian(2.0).effective_couplings();
  CHECK(t[2] == doctest::Approx(-1.0 / 8));
}

TEST_CASE("sampler is deterministic and independent of the thread count") {
  const EnsembleSpec s = gaussian(8, 3.7);
  const SampleBatch a = sample_gbeta(s, 1000, 42);
  const SampleBatch b = sample_gbeta(s, 1000, 42);
  CHECK(a.configs == b.configs);
  setenv("PBLAB_THREADS", "1", 1);
  const SampleBatch c = sample_gbeta(s, 1000, 42);
  setenv("PBLAB_THREADS", "3", 1);
  const SampleBatch d = sample_gbeta(s, 1000, 42);
  unsetenv("PBLAB_THREADS");
  CHECK(a.configs == c.configs);
  CHECK(a.configs == d.configs);
  CHECK(sample_gbeta(s, 1000, 43).configs != a.configs);
  for (const auto& cfg : a.configs) CHECK(cfg.size() == 8u);
  CHECK(a.log_weights == std::vector<double>(1000, 0.0));
  std::ostringstream csv;
  write_batch_csv(sample_gbeta(gaussian(2, 2.0), 2, 1), csv);
  CHECK(csv.str().rfind("x1,x2,log_weight\n", 0) == 0);
}

TEST_CASE("sampler second moments match closed forms") {
  const SampleBatch one = sample_gbeta(gaussian(1, 2.0), 100000, 1);
  const MCStat m1 = mc_power_sum(one, 2);
  CHECK(std::abs(m1.mean.real() - 1.0) <= 4 * m1.stderr());

  const SampleBatch two = sample_gbeta(gaussian(2, 2.0), 100000, 2);
  const MCStat m2 = mc_power_sum(two, 2);
  CHECK(oracle::two_body_power_sum(2, 2, 1.0) == doctest::Approx(4.0));
  CHECK(std::abs(m2.mean.real() - 4.0) <= 4 * m2.stderr());

  // beta = 4 and a non-unit scale against the binomial oracle
  const SampleBatch four = sample_gbeta(gaussian(2, 4.0, 0.7), 100000, 3);
  for (int m : {2, 4}) {
    const MCStat s = mc_power_sum(four, m);
    CHECK(std::abs(s.mean.real() - oracle::two_body_power_sum(m, 4, 0.7)) <= 4 * s.stderr());
  }
}

TEST_CASE("quadrature integral basics") {
  const EnsembleSpec s1 = gaussian(1, 2.0);
  auto one = [](std::span<const double>) { return cplx{1.0}; };
  CHECK(std::abs(quadrature_integral(s1, one).value - std::sqrt(2 * kPi)) < 1e-10);
  auto x = [](std::span<const double> v) { return cplx{v[0]}; };
  CHECK(std::abs(quadrature_integral(s1, x).value) < 1e-12);

  const EnsembleSpec s2 = gaussian(2, 2.0);
  CHECK(std::abs(quadrature_mean(s2, [](auto v) { return power_sum_obs(v, 2); }) - 4.0) < 1e-9);
  for (int m = 1; m <= 6; ++m)
    CHECK(std::abs(quadrature_mean(gaussian(2, 4.0, 0.7), [m](auto v) { return power_sum_obs(v, m); }) -
                   oracle::two_body_power_sum(m, 4, 0.7)) < 1e-9);

  CHECK_THROWS_AS(quadrature_integral(gaussian(4, 2.0), one), ParameterError);
}

TEST_CASE("Monte Carlo agrees with quadrature for p1..p4 at n_eigen <= 3") {
  for (auto [m, beta] : {std::pair{1, 2.0}, {2, 1.0}, {3, 3.7}}) {
    const EnsembleSpec s = gaussian(m, beta);
    const SampleBatch b = sample_gbeta(s, 40000, 11 + m);
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-10;
    for (int p = 1; p <= 4; ++p) {
      const MCStat mc = mc_power_sum(b, p);
      const cplx q = quadrature_mean(s, [p](auto v) { return power_sum_obs(v, p); }, nullptr, opt);
      CHECK_MESSAGE(std::abs(mc.mean - q) <= 3.5 * mc.stderr(), "M=", m, " beta=", beta, " p=", p);
    }
  }
}

TEST_CASE("Virasoro constraints") {
  // n = -1 at M = 1 reduces to 2 t_2 <p_1>
  const std::vector<double> t{0, 0, -0.5};
  const double x1[] = {0.37};
  CHECK(virasoro_observable(x1, t, 1.0, -1) == doctest::Approx(-0.37));

  // M = 2, kappa = 1, n = 0 against the quadrature oracle
  const EnsembleSpec s2 = gaussian(2, 2.0);
  CHECK(std::abs(virasoro_residual_quadrature(s2, 0)) < 1e-9);
  for (int n = -1; n <= 4; ++n) {
    CHECK(std::abs(virasoro_residual_quadrature(gaussian(2, 3.0, 0.8), n)) < 1e-8);
    CHECK(std::abs(virasoro_residual_quadrature(gaussian(1, 1.0), n)) < 1e-9);
  }
  // quartic couplings, even and odd parts
  const EnsembleSpec quartic(2, 1.5, PotentialSpec::polynomial({0, 0.3, -0.5, 0.1, -0.2}));
  for (int n = -1; n <= 3; ++n) CHECK(std::abs(virasoro_residual_quadrature(quartic, n)) < 1e-8);

  const SampleBatch b = sample_gbeta(gaussian(8, 3.7), 40000, 7);
  for (int n = -1; n <= 4; ++n) {
    const MCStat r = virasoro_residual(b, n);
    CHECK_MESSAGE(std::abs(r.mean) <= 3 * r.stderr(), "n=", n);
    CHECK(r.stderr() > 0);
  }
  // the identity is sharp: a wrong kappa is detected
  auto wrong = b;
  wrong.spec = gaussian(8, 3.0);
  CHECK(std::abs(virasoro_residual(wrong, 2).mean) > 10 * virasoro_residual(wrong, 2).stderr());
}

TEST_CASE("parity of odd power sums") {
  const SampleBatch b = sample_gbeta(gaussian(5, 1.3), 20000, 5);
  for (int p : {1, 3, 5}) {
    const MCStat s = mc_power_sum(b, p);
    CHECK(std::abs(s.mean) <= 3.5 * s.stderr());
  }
}

TEST_CASE("loop identity") {
  const EnsembleSpec s1 = gaussian(1, 2.0);
  CHECK(std::abs(loop_identity_quadrature(s1, {5.0, 1.0}, 0.0)) < 1e-11);
  CHECK(std::abs(loop_identity_quadrature(s1, {5.0, 0.05}, 0.0)) < 1e-9);
  CHECK_THROWS_AS(loop_identity_quadrature(s1, 5.0, 0.0), ConditioningError);
  const MCStat at5 = loop_identity_residual(sample_gbeta(s1, 100000, 4), 5.0, 0.0);
  CHECK(std::abs(at5.mean) <= 3 * at5.stderr());
  CHECK(std::abs(loop_identity_quadrature(gaussian(2, 3.0), {0.3, 0.9}, 1.0)) < 1e-9);
  CHECK(std::abs(loop_identity_quadrature(gaussian(2, 2.5), {0.3, 0.9}, -1.25)) < 1e-9);

  const SampleBatch b = sample_gbeta(gaussian(4, 1.0), 40000, 9);
  const MCStat r = loop_identity_residual(b, 6.0, 1.0);
  CHECK(std::abs(r.mean) <= 3 * r.stderr());
  const MCStat r2 = loop_identity_residual(b, {0.5, 1.0}, 0.0);
  CHECK(std::abs(r2.mean) <= 3 * r2.stderr());
  CHECK_THROWS_AS(loop_identity_residual(b, 0.1, 1.0), ConditioningError);
}

TEST_CASE("Fuchsian BPZ residuals for a multi-Penner potential") {
  const auto pen = PotentialSpec::multi_penner({1.0, 1.5}, {-1.0, 1.0}, -1.0);
  QuadOptions opt;
  opt.rel_tol = 1e-13;
  opt.abs_tol = 1e-15;

  const EnsembleSpec s1(1, 2.0, pen);
  const BpzResult a = bpz_ode_residual(s1, AlphaChoice::One, 2.5, 0.05, opt);
  CHECK(std::abs(a.residual) <= 10 * a.error_estimate);
  // Richardson-extrapolated residual is far below the raw one, so the
  // residual is pure stencil error
  const BpzResult a2 = bpz_ode_residual(s1, AlphaChoice::One, 2.5, 0.025, opt);
  CHECK(std::abs(4.0 * a2.residual - a.residual) / 3 < 0.02 * std::abs(a2.residual));

  const EnsembleSpec s2(2, 3.0, pen);
  const BpzResult b = bpz_ode_residual(s2, AlphaChoice::MinusHalfBeta, 2.5, 0.05, opt);
  CHECK(std::abs(b.residual) <= 10 * b.error_estimate);

  // second-order decay of the stencil error
  const BpzResult coarse = bpz_ode_residual(s2, AlphaChoice::MinusHalfBeta, 2.5, 0.2, opt);
  const BpzResult fine = bpz_ode_residual(s2, AlphaChoice::MinusHalfBeta, 2.5, 0.1, opt);
  const double ratio = std::abs(coarse.residual) / std::abs(fine.residual);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);

  CHECK_THROWS_AS(bpz_ode_residual(s1, AlphaChoice::One, 1.05, 0.05, opt), ConditioningError);
}

TEST_CASE("confluent BPZ residuals for polynomial couplings") {
  QuadOptions opt;
  opt.rel_tol = 1e-13;
  opt.abs_tol = 1e-15;
  const EnsembleSpec quartic(1, 2.0, PotentialSpec::polynomial({0, 0.2, -0.5, 0.1, -0.15}));
  const BpzResult a = confluent_bpz_residual(quartic, AlphaChoice::One, 0.7, 0.02, opt);
  CHECK(std::abs(a.residual) <= 10 * a.error_estimate);

  const EnsembleSpec g(2, 2.0, PotentialSpec::gaussian(1.0));
  const BpzResult b = confluent_bpz_residual(g, AlphaChoice::One, 0.4, 0.02, opt);
  CHECK(std::abs(b.residual) <= 10 * b.error_estimate);

  const EnsembleSpec s4(2, 4.0, PotentialSpec::polynomial({0, 0.1, -0.5, 0, -0.1}));
  const BpzResult c = confluent_bpz_residual(s4, AlphaChoice::MinusHalfBeta, {0.5, 0.8}, 0.02, opt);
  CHECK(std::abs(c.residual) <= 10 * c.error_estimate);

  const BpzResult coarse = confluent_bpz_residual(s4, AlphaChoice::MinusHalfBeta, {0.5, 0.8}, 0.2, opt);
  const BpzResult fine = confluent_bpz_residual(s4, AlphaChoice::MinusHalfBeta, {0.5, 0.8}, 0.1, opt);
  const double ratio = std::abs(coarse.residual) / std::abs(fine.residual);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
  CHECK(std::abs(4.0 * fine.residual - coarse.residual) / 3 < 0.05 * std::abs(fine.residual));
}
