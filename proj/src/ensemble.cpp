#include "pblab/ensemble.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "pblab/io.hpp"

namespace pblab {

PotentialSpec PotentialSpec::polynomial(std::vector<double> t) {
  PotentialSpec p;
  p.kind = PotentialKind::PolynomialCouplings;
  p.couplings = std::move(t);
  p.validate();
  return p;
}

PotentialSpec PotentialSpec::multi_penner(std::vector<double> m, std::vector<double> w, double c) {
  PotentialSpec p;
  p.kind = PotentialKind::MultiPenner;
  p.masses = std::move(m);
  p.positions = std::move(w);
  p.penner_c = c;
  p.validate();
  return p;
}

PotentialSpec PotentialSpec::gaussian(double a) {
  PotentialSpec p;
  p.kind = PotentialKind::Gaussian;
  p.scale = a;
  p.validate();
  return p;
}

void PotentialSpec::validate() const {
  switch (kind) {
    case PotentialKind::Gaussian:
      require(scale > 0 && std::isfinite(scale), "Gaussian scale a must be positive");
      break;
    case PotentialKind::PolynomialCouplings:
      require(!couplings.empty(), "polynomial potential needs at least one coupling");
      for (double t : couplings) require(std::isfinite(t), "couplings must be finite");
      break;
    case PotentialKind::MultiPenner:
      require(!masses.empty() && masses.size() == positions.size(),
              "multi-Penner masses and positions must have equal nonzero length");
      require(std::isfinite(penner_c), "multi-Penner constant C must be finite");
      for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
          require(positions[i] != positions[j], "multi-Penner positions must be pairwise distinct");
      break;
  }
}

std::vector<double> PotentialSpec::effective_couplings() const {
  if (kind == PotentialKind::Gaussian) return {0.0, 0.0, -1.0 / (2 * scale * scale)};
  require(kind == PotentialKind::PolynomialCouplings, "multi-Penner potential has no couplings");
  return couplings;
}

double PotentialSpec::value(double x) const {
  if (kind == PotentialKind::MultiPenner) {
    double v = 0;
    for (std::size_t l = 0; l < masses.size(); ++l) v += masses[l] * std::log(std::abs(x - positions[l]));
    return penner_c * v;
  }
  const auto t = effective_couplings();
  double v = 0;
  for (std::size_t k = t.size(); k-- > 0;) v = v * x + t[k];
  return -v;
}

double PotentialSpec::derivative(double x) const { return derivative(cplx{x}).real(); }

cplx PotentialSpec::derivative(cplx x) const {
  if (kind == PotentialKind::MultiPenner) {
    cplx v = 0;
    for (std::size_t l = 0; l < masses.size(); ++l) v += masses[l] / (x - positions[l]);
    return penner_c * v;
  }
  const auto t = effective_couplings();
  cplx v = 0;
  for (std::size_t k = t.size(); k-- > 1;) v = v * x + double(k) * t[k];
  return -v;
}

EnsembleSpec::EnsembleSpec(int n_eigen, double beta, PotentialSpec potential)
    : n_(n_eigen), beta_(beta), pot_(std::move(potential)) {
  require(n_eigen >= 1, "n_eigen must be >= 1");
  require(beta > 0 && std::isfinite(beta), "beta must be positive");
  pot_.validate();
}

double EnsembleSpec::central_charge() const {
  const double k = kappa();
  return 1.0 - 6.0 * (1.0 - k) * (1.0 - k) / k;
}

MCStat plain_mean(std::span<const cplx> values) {
  require(!values.empty(), "empty sample");
  const long n = long(values.size());
  cplx mean{};
  for (cplx v : values) mean += v;
  mean /= double(n);
  double ss = 0;
  for (cplx v : values) ss += std::norm(v - mean);
  MCStat s;
  s.mean = mean;
  s.n_samples = n;
  s.stderr_ = n > 1 ? std::sqrt(ss / (double(n) * double(n - 1))) : 0.0;
  return s;
}

MCStat weighted_mean(std::span<const cplx> values, std::span<const cplx> weights) {
  require(!values.empty() && values.size() == weights.size(), "weights and values must match");
  const long n = long(values.size());
  cplx w_sum{}, wf{};
  for (long i = 0; i < n; ++i) {
    w_sum += weights[i];
    wf += weights[i] * values[i];
  }
  if (std::abs(w_sum) == 0) throw ConditioningError("importance weights sum to zero");
  const cplx mean = wf / w_sum;
  double ss = 0;
  for (long i = 0; i < n; ++i) ss += std::norm(weights[i] * (values[i] - mean));
  MCStat s;
  s.mean = mean;
  s.n_samples = n;
  s.stderr_ = n > 1 ? std::sqrt(ss * double(n) / double(n - 1)) / std::abs(w_sum) : 0.0;
  return s;
}

int worker_threads() {
  int n = int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("PBLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

void for_each_chunk(long count, std::uint64_t seed,
                    const std::function<void(std::mt19937_64&, long, long)>& body) {
  const long chunks = (count + kDrawChunk - 1) / kDrawChunk;
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (long c = next++; c < chunks; c = next++) {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(c),
                          std::uint32_t(std::uint64_t(c) >> 32)};
        std::mt19937_64 rng(seq);
        body(rng, c * kDrawChunk, std::min(count, (c + 1) * kDrawChunk));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const int nt = int(std::min<long>(worker_threads(), std::max<long>(chunks, 1)));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

Tridiagonal draw_tridiagonal(int n, double beta, double a, std::mt19937_64& rng) {
  Tridiagonal m;
  m.diag.resize(n);
  m.off.resize(n > 0 ? n - 1 : 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) m.diag[i] = a * normal(rng);
  for (int i = 0; i + 1 < n; ++i) {
    std::gamma_distribution<double> gamma(0.5 * beta * (n - 1 - i), 2.0);
    m.off[i] = a * std::sqrt(gamma(rng) / 2.0);
  }
  return m;
}

double largest_eigenvalue(const Tridiagonal& m, double tol) {
  const int n = int(m.diag.size());
  double lo = m.diag[0], hi = m.diag[0];
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(m.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(m.off[i]) : 0.0);
    lo = std::min(lo, m.diag[i] - r);
    hi = std::max(hi, m.diag[i] + r);
  }
  auto count_below = [&](double x) {
    int count = 0;
    double d = m.diag[0] - x;
    if (d < 0) ++count;
    for (int i = 1; i < n; ++i) {
      if (d == 0) d = 1e-300;
      d = m.diag[i] - x - m.off[i - 1] * m.off[i - 1] / d;
      if (d < 0) ++count;
    }
    return count;
  };
  while (hi - lo > tol * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) == n)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> eigenvalues(const Tridiagonal& m) {
  const int n = int(m.diag.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(m.diag.data(), n);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(m.off.data(), n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  return out;
}

SampleBatch sample_gbeta(const EnsembleSpec& spec, long n_samples, std::uint64_t seed) {
  require(spec.potential().kind == PotentialKind::Gaussian, "sample_gbeta needs a Gaussian potential");
  require(n_samples >= 1, "n_samples must be >= 1");
  const int n = spec.n_eigen();
  SampleBatch batch{std::vector<std::vector<double>>(n_samples), std::vector<double>(n_samples, 0.0),
                    seed, spec};
  for_each_chunk(n_samples, seed, [&](std::mt19937_64& rng, long begin, long end) {
    for (long s = begin; s < end; ++s) {
      Tridiagonal m = draw_tridiagonal(n, spec.beta(), spec.potential().scale, rng);
      batch.configs[s] = n == 1 ? m.diag : eigenvalues(m);
    }
  });
  return batch;
}

Domain default_domain(const EnsembleSpec& spec) {
  const auto& p = spec.potential();
  switch (p.kind) {
    case PotentialKind::Gaussian:
      return {-12 * p.scale, 12 * p.scale};
    case PotentialKind::PolynomialCouplings: {
      const double v0 = std::min(p.value(0.0), 0.0);
      double L = 1.0;
      while (L < 1e6 && std::min(p.value(L), p.value(-L)) - v0 < 80.0 + 2 * spec.beta() * spec.n_eigen() * std::log(2 * L))
        L *= 1.1;
      require(L < 1e6, "polynomial potential is not confining");
      return {-L, L};
    }
    case PotentialKind::MultiPenner: {
      require(p.positions.size() >= 2, "multi-Penner domain needs at least two singular points");
      std::vector<double> w = p.positions;
      std::sort(w.begin(), w.end());
      return {w[0], w[1]};
    }
  }
  return {0, 0};
}

QuadResult quadrature_integral(const EnsembleSpec& spec,
                               const std::function<cplx(std::span<const double>)>& observable,
                               std::optional<Domain> domain, const QuadOptions& options) {
  const int m = spec.n_eigen();
  if (m > 3) throw ParameterError("quadrature_integral supports n_eigen <= 3, got " + std::to_string(m));
  const Domain d = domain.value_or(default_domain(spec));
  require(d.lo < d.hi, "quadrature domain must be nonempty");
  const auto& pot = spec.potential();
  const double beta = spec.beta();
  auto w = [&](double x) { return std::exp(-pot.value(x)); };

  std::array<double, 3> x{};
  double inner_error = 0;
  bool inner_ok = true;
  auto track = [&](const QuadResult& r) {
    inner_error = std::max(inner_error, r.error);
    inner_ok = inner_ok && r.converged;
    return r.value;
  };
  const std::span<const double> xs(x.data(), m);
  std::function<cplx(double)> f;
  if (m == 1) {
    f = [&](double x0) {
      x[0] = x0;
      return observable(xs) * w(x0);
    };
  } else if (m == 2) {
    f = [&](double x0) {
      x[0] = x0;
      const double w0 = w(x0);
      auto g = [&](double x1) {
        x[1] = x1;
        x[0] = x0;
        return observable(xs) * w(x1) * std::pow(std::abs(x0 - x1), beta);
      };
      return w0 * track(integrate_gk(g, d.lo, d.hi, options, {x0}));
    };
  } else {
    f = [&](double x0) {
      const double w0 = w(x0);
      auto g = [&](double x1) {
        const double w1 = w(x1) * std::pow(std::abs(x0 - x1), beta);
        auto h = [&](double x2) {
          x[0] = x0;
          x[1] = x1;
          x[2] = x2;
          return observable(xs) * w(x2) *
                 std::pow(std::abs(x0 - x2) * std::abs(x1 - x2), beta);
        };
        return w1 * track(integrate_gk(h, d.lo, d.hi, options, {x0, x1}));
      };
      return w0 * track(integrate_gk(g, d.lo, d.hi, options, {x0}));
    };
  }
  QuadResult r = integrate_gk(f, d.lo, d.hi, options);
  // Inner errors enter once per outer dimension, scaled by the domain length
  // and the typical weight size.
  r.error += inner_error * std::pow(d.hi - d.lo, m - 1);
  r.converged = r.converged && inner_ok;
  return r;
}

cplx quadrature_mean(const EnsembleSpec& spec,
                     const std::function<cplx(std::span<const double>)>& observable, double* error,
                     const QuadOptions& options) {
  const QuadResult num = quadrature_integral(spec, observable, std::nullopt, options);
  const QuadResult den =
      quadrature_integral(spec, [](std::span<const double>) { return cplx{1.0}; }, std::nullopt, options);
  if (!num.converged || !den.converged)
    throw AccuracyError("quadrature mean did not converge", num.value / den.value,
                        num.error / std::abs(den.value));
  const cplx mean = num.value / den.value;
  if (error) *error = (num.error + std::abs(mean) * den.error) / std::abs(den.value);
  return mean;
}

namespace {

double power_sum(std::span<const double> x, int m) {
  if (m == 0) return double(x.size());
  double s = 0;
  for (double v : x) s += std::pow(v, m);
  return s;
}

}  // namespace

double virasoro_observable(std::span<const double> x, std::span<const double> t, double kappa, int n) {
  require(n >= -1, "Virasoro index n must be >= -1");
  const int kmax = int(t.size()) - 1;
  std::vector<double> p(std::max(n + kmax, 0) + 1);
  for (std::size_t m = 0; m < p.size(); ++m) p[m] = power_sum(x, int(m));
  double v = 0;
  for (int m = 0; m <= n; ++m) v += kappa * p[m] * p[n - m];
  for (int m = 1; m <= kmax; ++m)
    if (t[m] != 0) v += m * t[m] * p[n + m];
  if (n >= 0) v += (1 - kappa) * (n + 1) * p[n];
  return v;
}

MCStat virasoro_residual(const SampleBatch& batch, int n) {
  require(!batch.configs.empty(), "empty batch");
  const auto t = batch.spec.potential().effective_couplings();
  const double kappa = batch.spec.kappa();
  std::vector<cplx> values(batch.configs.size()), weights(batch.configs.size());
  bool unweighted = true;
  for (std::size_t i = 0; i < batch.configs.size(); ++i) {
    values[i] = virasoro_observable(batch.configs[i], t, kappa, n);
    weights[i] = std::exp(batch.log_weights[i]);
    unweighted = unweighted && batch.log_weights[i] == 0.0;
  }
  return unweighted ? plain_mean(values) : weighted_mean(values, weights);
}

cplx virasoro_residual_quadrature(const EnsembleSpec& spec, int n, double* error,
                                  const QuadOptions& options) {
  const auto t = spec.potential().effective_couplings();
  const double kappa = spec.kappa();
  return quadrature_mean(
      spec, [&](std::span<const double> x) { return cplx{virasoro_observable(x, t, kappa, n)}; },
      error, options);
}

cplx loop_observable(std::span<const double> x, const EnsembleSpec& spec, cplx z, double alpha) {
  const auto& pot = spec.potential();
  cplx v{};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const cplx r = 1.0 / (z - x[k]);
    v += (1 - alpha) * r * r - pot.derivative(cplx{x[k]}) * r;
    for (std::size_t j = k + 1; j < x.size(); ++j) v += spec.beta() * r / (z - x[j]);
  }
  return v;
}

namespace {

cplx alpha_weight(std::span<const double> x, cplx z, double alpha) {
  if (alpha == 0) return 1.0;
  cplx w = 1.0;
  for (double v : x) w *= std::pow(z - v, alpha);
  return w;
}

}  // namespace

MCStat loop_identity_residual(const SampleBatch& batch, cplx z, double alpha) {
  require(!batch.configs.empty(), "empty batch");
  if (z.imag() == 0) {
    double lo = batch.configs[0][0], hi = lo;
    for (const auto& c : batch.configs)
      for (double v : c) lo = std::min(lo, v), hi = std::max(hi, v);
    if (z.real() >= lo && z.real() <= hi)
      throw ConditioningError("real z lies inside the sampled eigenvalue support");
  }
  std::vector<cplx> values(batch.configs.size()), weights(batch.configs.size());
  for (std::size_t i = 0; i < batch.configs.size(); ++i) {
    values[i] = loop_observable(batch.configs[i], batch.spec, z, alpha);
    weights[i] = std::exp(batch.log_weights[i]) * alpha_weight(batch.configs[i], z, alpha);
  }
  return weighted_mean(values, weights);
}

cplx loop_identity_quadrature(const EnsembleSpec& spec, cplx z, double alpha, double* error,
                              const QuadOptions& options) {
  const Domain d = default_domain(spec);
  if (z.imag() == 0 && z.real() >= d.lo && z.real() <= d.hi)
    throw ConditioningError("real z lies inside the integration domain");
  const QuadResult num = quadrature_integral(
      spec,
      [&](std::span<const double> x) { return loop_observable(x, spec, z, alpha) * alpha_weight(x, z, alpha); },
      std::nullopt, options);
  const QuadResult den = quadrature_integral(
      spec, [&](std::span<const double> x) { return alpha_weight(x, z, alpha); }, std::nullopt, options);
  const cplx mean = num.value / den.value;
  if (error) *error = (num.error + std::abs(mean) * den.error) / std::abs(den.value);
  return mean;
}

namespace {

struct Sampled {
  cplx value;
  double error;
};

/// Z(z) = int prod (z - x_i)^alpha dmu over a fixed domain.
Sampled z_integral(const EnsembleSpec& spec, double alpha, cplx z, const Domain& d,
                   const QuadOptions& options) {
  const QuadResult r = quadrature_integral(
      spec, [&](std::span<const double> x) { return alpha_weight(x, z, alpha); }, d, options);
  if (!r.converged) throw AccuracyError("BPZ quadrature did not converge", r.value, r.error);
  return {r.value, r.error};
}

struct Derivative {
  cplx value;
  double error;
};

/// Central first and second differences of g at step h, with the stencil
/// error estimated from the 2h stencil by Richardson's rule.
struct Stencil {
  Derivative d1, d2;
  Sampled center;
};

Stencil central(const std::function<Sampled(double)>& g, double h) {
  const Sampled f0 = g(0), fp = g(h), fm = g(-h), fp2 = g(2 * h), fm2 = g(-2 * h);
  const cplx d1h = (fp.value - fm.value) / (2 * h);
  const cplx d1H = (fp2.value - fm2.value) / (4 * h);
  const cplx d2h = (fp.value - 2.0 * f0.value + fm.value) / (h * h);
  const cplx d2H = (fp2.value - 2.0 * f0.value + fm2.value) / (4 * h * h);
  Stencil s;
  s.center = f0;
  s.d1 = {d1h, std::abs(d1h - d1H) / 3 + (fp.error + fm.error) / (2 * h)};
  s.d2 = {d2h, std::abs(d2h - d2H) / 3 + (fp.error + 2 * f0.error + fm.error) / (h * h)};
  return s;
}

double alpha_value(const EnsembleSpec& spec, AlphaChoice a) {
  return a == AlphaChoice::One ? 1.0 : -spec.beta() / 2;
}

void check_z_integrable(const EnsembleSpec& spec, double alpha, cplx z, const Domain& d, double h) {
  if (z.imag() != 0) return;
  const double zr = z.real();
  const bool inside = zr > d.lo - 2 * h && zr < d.hi + 2 * h;
  if (inside && alpha != std::floor(alpha))
    throw ConditioningError("real z within the stencil of the integration domain; (z-x)^alpha is "
                            "not analytic there");
  (void)spec;
}

}  // namespace

BpzResult bpz_ode_residual(const EnsembleSpec& spec, AlphaChoice choice, cplx z, double fd_step,
                           const QuadOptions& options) {
  const auto& pot = spec.potential();
  require(pot.kind == PotentialKind::MultiPenner, "bpz_ode_residual needs a multi-Penner potential");
  require(fd_step > 0, "fd_step must be positive");
  const double alpha = alpha_value(spec, choice);
  const double beta = spec.beta();
  const double h = fd_step;
  for (double w : pot.positions)
    if (std::abs(z - w) < 4 * h) throw ConditioningError("z is within the stencil of a Penner point");
  const Domain d0 = default_domain(spec);
  check_z_integrable(spec, alpha, z, d0, h);
  for (std::size_t l = 0; l < pot.positions.size(); ++l) {
    const double e = -pot.penner_c * pot.masses[l];
    const bool endpoint = pot.positions[l] == d0.lo || pot.positions[l] == d0.hi;
    if (endpoint) require(e > 0, "Penner exponents -C*m at the domain endpoints must be positive");
  }

  const Stencil zs =
      central([&](double dz) { return z_integral(spec, alpha, z + dz, d0, options); }, h);
  const cplx Zp = zs.d1.value, Zpp = zs.d2.value;
  cplx coulomb{};
  for (std::size_t l = 0; l < pot.positions.size(); ++l)
    coulomb += pot.penner_c * pot.masses[l] / (z - pot.positions[l]);

  cplx penner{};
  double penner_err = 0;
  for (std::size_t l = 0; l < pot.positions.size(); ++l) {
    const Stencil ws = central(
        [&](double dw) {
          PotentialSpec p = pot;
          p.positions[l] += dw;
          const EnsembleSpec s(spec.n_eigen(), beta, p);
          return z_integral(s, alpha, z, default_domain(s), options);
        },
        h);
    const double c = 1.0 / std::abs(z - pot.positions[l]);
    penner += ws.d1.value / (z - pot.positions[l]);
    penner_err += c * ws.d1.error;
  }

  BpzResult r;
  r.z_value = zs.center.value;
  if (choice == AlphaChoice::One) {
    r.residual = (beta / 2) * Zpp - coulomb * Zp - penner;
    r.error_estimate = (beta / 2) * zs.d2.error + std::abs(coulomb) * zs.d1.error + penner_err;
  } else {
    r.residual = (2 / beta) * Zpp + (2 / beta) * coulomb * Zp - penner;
    r.error_estimate = (2 / beta) * zs.d2.error + (2 / beta) * std::abs(coulomb) * zs.d1.error + penner_err;
  }
  return r;
}

BpzResult confluent_bpz_residual(const EnsembleSpec& spec_in, AlphaChoice choice, cplx z,
                                 double fd_step, const QuadOptions& options) {
  const auto& pin = spec_in.potential();
  require(pin.kind != PotentialKind::MultiPenner, "confluent_bpz_residual needs polynomial couplings");
  require(fd_step > 0, "fd_step must be positive");
  const EnsembleSpec spec(spec_in.n_eigen(), spec_in.beta(),
                          PotentialSpec::polynomial(pin.effective_couplings()));
  const auto& pot = spec.potential();
  const double alpha = alpha_value(spec, choice);
  const double beta = spec.beta();
  const double h = fd_step;
  const Domain d0 = default_domain(spec);
  check_z_integrable(spec, alpha, z, d0, h);

  const Stencil zs =
      central([&](double dz) { return z_integral(spec, alpha, z + dz, d0, options); }, h);
  const cplx Vp = pot.derivative(z);

  // <p_m> in the Z-weighted measure is dZ/dt_m for m >= 1 and M*Z for m = 0.
  const auto& t = pot.couplings;
  const int K = int(t.size()) - 1;
  std::vector<Derivative> pm(std::max(K - 1, 1));
  pm[0] = {double(spec.n_eigen()) * zs.center.value, double(spec.n_eigen()) * zs.center.error};
  for (int m = 1; m <= K - 2; ++m) {
    const Stencil ts = central(
        [&](double dt) {
          std::vector<double> tt = t;
          tt[m] += dt;
          const EnsembleSpec s(spec.n_eigen(), beta, PotentialSpec::polynomial(tt));
          return z_integral(s, alpha, z, d0, options);
        },
        h);
    pm[m] = ts.d1;
  }
  cplx T{};
  double T_err = 0;
  for (int l = 2; l <= K; ++l) {
    const double sl = -t[l];
    if (sl == 0) continue;
    for (int j = 0; j <= l - 2; ++j) {
      const cplx c = double(l) * sl * std::pow(z, j);
      T += c * pm[l - 2 - j].value;
      T_err += std::abs(c) * pm[l - 2 - j].error;
    }
  }

  BpzResult r;
  r.z_value = zs.center.value;
  if (choice == AlphaChoice::One) {
    r.residual = (beta / 2) * zs.d2.value - Vp * zs.d1.value + T;
    r.error_estimate = (beta / 2) * zs.d2.error + std::abs(Vp) * zs.d1.error + T_err;
  } else {
    r.residual = zs.d2.value + Vp * zs.d1.value + (beta / 2) * T;
    r.error_estimate = zs.d2.error + std::abs(Vp) * zs.d1.error + (beta / 2) * T_err;
  }
  return r;
}

void write_batch_csv(const SampleBatch& batch, std::ostream& out) {
  const int m = batch.spec.n_eigen();
  for (int i = 1; i <= m; ++i) out << 'x' << i << ',';
  out << "log_weight\n";
  for (std::size_t s = 0; s < batch.configs.size(); ++s) {
    for (double v : batch.configs[s]) out << fmt17(v) << ',';
    out << fmt17(batch.log_weights[s]) << '\n';
  }
}

}  // namespace pblab
