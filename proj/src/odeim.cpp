#include "pblab/odeim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "pblab/dop853.hpp"
#include "pblab/io.hpp"

namespace pblab {

namespace {

const cplx I1{0.0, 1.0};

/// q^s = exp(i pi kappa s).
cplx qpow(const SpectralProblem& p, double s) { return std::exp(I1 * (kPi * p.kappa() * s)); }

cplx potential(const SpectralProblem& p, cplx x) {
  return std::pow(x, 2 * p.alpha) + p.l * (p.l + 1) / (x * x);
}

OdeOptions ode_options(double tol, double scale) {
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-8 * std::max(scale, 1e-300);
  return o;
}

/// Psi'' = (V - E) Psi along a path x(s), with dx/ds supplied.
std::array<cplx, 2> integrate_line(const SpectralProblem& p, cplx E, cplx x0, cplx x1, std::array<cplx, 2> y,
                                   double tol) {
  auto rhs = [&](cplx x, const CVec& v, CVec& dv) {
    dv.resize(2);
    dv[0] = v[1];
    dv[1] = (potential(p, x) - E) * v[0];
  };
  const CVec out = integrate_segment(rhs, x0, x1, CVec{y[0], y[1]},
                                     ode_options(tol, std::abs(y[0]) + std::abs(y[1])));
  return {out[0], out[1]};
}

std::array<cplx, 2> integrate_arc(const SpectralProblem& p, cplx E, double r, double theta1, std::array<cplx, 2> y,
                                  double tol) {
  if (theta1 == 0.0) return y;
  auto rhs = [&](double th, const CVec& v, CVec& dv) {
    const cplx x = std::polar(r, th);
    const cplx dx = I1 * x;
    dv.resize(2);
    dv[0] = v[1] * dx;
    dv[1] = (potential(p, x) - E) * v[0] * dx;
  };
  Dop853 solver(rhs, ode_options(tol, std::abs(y[0]) + std::abs(y[1])));
  double th = 0.0;
  CVec v{y[0], y[1]};
  solver.integrate(th, v, theta1);
  return {v[0], v[1]};
}

double default_x_start(cplx E) { return 1e-3 * 2 * kPi / std::sqrt(std::max(1.0, std::abs(E))); }

/// Generalized power series sum c x^p for the large-x Riccati correction.
struct Term {
  double p;
  cplx c;
};
using GSeries = std::vector<Term>;

void add_term(GSeries& s, double p, cplx c) {
  for (Term& t : s)
    if (std::abs(t.p - p) < 1e-9) {
      t.c += c;
      return;
    }
  s.push_back({p, c});
}

void prune(GSeries& s, double X, double floor) {
  std::erase_if(s, [&](const Term& t) { return std::abs(t.c) * std::pow(X, t.p) < floor; });
}

struct Asymptotic {
  cplx log_chi;  ///< log chi(X)
  cplx y;        ///< chi'(X)/chi(X)
  bool converged;
};

/// chi'/chi = -x^alpha - alpha/(2x) + u with
///   u = (E - A/x^2 + u' + u^2) / (2 x^alpha + alpha/x),
///   A = l(l+1) - alpha^2/4 - alpha/2,
/// iterated as a series in decreasing powers of x and evaluated at X.
Asymptotic chi_asymptotic(const SpectralProblem& p, cplx E, double X) {
  const double a = p.alpha;
  const double A = p.l * (p.l + 1) - a * a / 4 - a / 2;
  const double floor = 1e-24;
  // 1 / (2 x^a (1 + a/(2 x^{1+a}))) as a series
  GSeries inv;
  for (int j = 0; j < 40; ++j) {
    const double p_j = -a - j * (1 + a);
    const cplx c = 0.5 * std::pow(-a / 2, j);
    if (std::abs(c) * std::pow(X, p_j) < floor) break;
    inv.push_back({p_j, c});
  }
  GSeries u;
  cplx u_prev{}, int_prev{};
  auto eval = [&](const GSeries& s, cplx& val, cplx& integral) {
    val = 0;
    integral = 0;
    for (const Term& t : s) {
      val += t.c * std::pow(X, t.p);
      integral += t.c * std::pow(X, t.p + 1) / (t.p + 1);  // minus the tail integral
    }
  };
  bool converged = false;
  double last_delta = INFINITY;
  int growing = 0;
  for (int it = 0; it < 60; ++it) {
    GSeries num;
    add_term(num, 0.0, E);
    add_term(num, -2.0, -A);
    for (const Term& t : u)
      if (t.p != 0.0) add_term(num, t.p - 1, t.c * t.p);
    for (const Term& s : u)
      for (const Term& t : u)
        if (std::abs(s.c * t.c) * std::pow(X, s.p + t.p) > floor) add_term(num, s.p + t.p, s.c * t.c);
    GSeries next;
    for (const Term& n : num)
      for (const Term& i : inv)
        if (std::abs(n.c * i.c) * std::pow(X, n.p + i.p) > floor) add_term(next, n.p + i.p, n.c * i.c);
    prune(next, X, floor);
    u = std::move(next);
    cplx val, integral;
    eval(u, val, integral);
    if (it > 0 && std::abs(val - u_prev) <= 1e-16 * (1 + std::abs(val)) &&
        std::abs(integral - int_prev) <= 1e-16 * (1 + std::abs(integral))) {
      converged = true;
      break;
    }
    const double delta = std::abs(val - u_prev) + std::abs(integral - int_prev);
    if (it > 2 && delta >= last_delta && ++growing >= 2) break;  // divergent at this X
    last_delta = delta;
    u_prev = val;
    int_prev = integral;
    if (u.size() > 1500) break;
  }
  const double Xa = std::pow(X, a);
  return {-X * Xa / (1 + a) - a / 2 * std::log(X) + int_prev, -Xa - a / (2 * X) + u_prev, converged};
}

Asymptotic asymptotic_at(const SpectralProblem& p, cplx E, double& X, bool adaptive) {
  for (int attempt = 0; attempt < 12; ++attempt) {
    Asymptotic as = chi_asymptotic(p, E, X);
    if (as.converged) return as;
    if (!adaptive) break;
    X *= 1.2;
  }
  throw NumericalError("shoot_chi: x_far is not in the asymptotic regime (x_far = " + fmt17(X) + ")");
}

}  // namespace

void SpectralProblem::validate() const {
  require(std::isfinite(alpha) && alpha > 1.0, "alpha must be > 1");
  require(std::isfinite(l), "l must be finite");
  const double s = (2 * l + 1) / (2 + 2 * alpha);
  require(std::abs(s - std::round(s)) > 1e-9, "2l+1 must not be a multiple of 2+2alpha");
  // the small-x series of psi(l) and psi(-l-1) must be non-resonant:
  // +-(2l+1) + 2m + (2alpha+2)n != 0 for (m, n) != (0, 0)
  for (double c : {2 * l + 1, -(2 * l + 1)})
    for (int n = 0; n <= 64; ++n) {
      const double r = -c - (2 * alpha + 2) * n;
      if (r < 0) break;
      const double m = r / 2;
      require(!(std::abs(m - std::round(m)) < 1e-9 && (n > 0 || std::round(m) > 0)),
              "l is resonant: the small-x series of psi does not exist");
    }
}

cplx SpectralProblem::q() const { return std::exp(I1 * (kPi * kappa())); }

double SpectralProblem::rho() const {
  const double k = kappa();
  return std::pow(2 / k, 2 - 2 * k) * std::pow(std::tgamma(1 - k), 2);
}

double psi_normalization(const SpectralProblem& p) {
  const double s = (2 * p.l + 1) / (2 + 2 * p.alpha);
  return std::sqrt(2 * kPi / (1 + p.alpha)) * std::pow(2 + 2 * p.alpha, -s) / std::tgamma(1 + s);
}

WaveValue shoot_psi(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  p.validate();
  const double x0 = o.x_start > 0 ? o.x_start : default_x_start(E);
  require(x0 < o.x_match, "x_start must be below x_match");
  // psi = n sum c_{mn} x^{l+1+2m+(2a+2)n},
  // (2m+(2a+2)n)(2l+1+2m+(2a+2)n) c_{mn} = -E c_{m-1,n} + c_{m,n-1}
  const double a = p.alpha;
  const int M = 40, N = 12;
  std::vector<std::vector<cplx>> c(N, std::vector<cplx>(M));
  cplx val{}, der{};
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      if (m == 0 && n == 0) {
        c[0][0] = 1.0;
      } else {
        const double g = 2 * m + (2 * a + 2) * n;
        cplx r{};
        if (m > 0) r -= E * c[n][m - 1];
        if (n > 0) r += c[n - 1][m];
        c[n][m] = r / (g * (2 * p.l + 1 + g));
      }
      const double e = p.l + 1 + 2 * m + (2 * a + 2) * n;
      val += c[n][m] * std::pow(x0, e);
      der += c[n][m] * e * std::pow(x0, e - 1);
    }
  }
  const double nl = psi_normalization(p);
  const auto y = integrate_line(p, E, x0, o.x_match, {nl * val, nl * der}, o.tol);
  return {o.x_match, y[0], y[1]};
}

double default_x_far(const SpectralProblem& p, cplx E) {
  const double a = p.alpha;
  return std::max(std::pow(40 * (1 + a), 1 / (1 + a)), 2.5 * std::pow(std::max(std::abs(E), 1.0), 1 / (2 * a)));
}

std::array<cplx, 2> chi_at(const SpectralProblem& p, cplx E, cplx x, const ShootOptions& o) {
  p.validate();
  const double r = std::abs(x);
  double X = o.x_far > 0 ? o.x_far : default_x_far(p, E);
  const Asymptotic as = asymptotic_at(p, E, X, o.x_far <= 0);
  require(r < X, "chi_at: |x| must be below x_far");
  auto y = integrate_line(p, E, X, r, {1.0, as.y}, o.tol);
  y = integrate_arc(p, E, r, std::arg(x), y, o.tol);
  const double m = std::max(std::abs(y[0]), std::abs(y[1]));
  const cplx scale = std::exp(as.log_chi + std::log(m));
  return {y[0] / m * scale, y[1] / m * scale};
}

WaveValue shoot_chi(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  const auto y = chi_at(p, E, o.x_match, o);
  return {o.x_match, y[0], y[1]};
}

WaveValue shoot_chi_minus(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  const cplx q = p.q();
  const auto y = chi_at(p, E / (q * q), q * o.x_match, o);
  const cplx f = I1 / std::sqrt(q);
  return {o.x_match, f * y[0], f * q * y[1]};
}

cplx wronskian(const WaveValue& f, const WaveValue& g) { return f.psi * g.dpsi - g.psi * f.dpsi; }

cplx spectral_D(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  return 0.5 * wronskian(shoot_chi(p, E, o), shoot_psi(p, E, o));
}

Decomposition decompose_psi(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  const WaveValue psi = shoot_psi(p, E, o), chi = shoot_chi(p, E, o), chim = shoot_chi_minus(p, E, o);
  const cplx w = wronskian(chi, chim);
  Decomposition d;
  d.C = wronskian(psi, chim) / w;
  d.D = wronskian(chi, psi) / w;
  const cplx q = p.q();
  const auto y = chi_at(p, E / (q * q * q * q), q * q * o.x_match, o);
  const cplx f = I1 / std::sqrt(q);
  const WaveValue omega_chim{o.x_match, f * y[0], f * q * q * y[1]};
  d.u = wronskian(chi, omega_chim) / w;
  return d;
}

int node_count(const SpectralProblem& p, double E, const ShootOptions& o) {
  p.validate();
  const double x0 = o.x_start > 0 ? o.x_start : default_x_start(E);
  const double X = o.x_far > 0 ? o.x_far : default_x_far(p, E);
  ShootOptions so = o;
  so.x_start = x0;
  so.x_match = 2 * x0;
  WaveValue w = shoot_psi(p, E, so);
  std::array<cplx, 2> y{w.psi, w.dpsi};
  const int steps = 4000;
  int count = 0;
  double x = so.x_match;
  for (int i = 1; i <= steps; ++i) {
    const double xn = so.x_match + (X - so.x_match) * i / steps;
    auto yn = integrate_line(p, E, x, xn, y, o.tol);
    if ((yn[0].real() > 0) != (y[0].real() > 0)) ++count;
    const double m = std::abs(yn[0]) + std::abs(yn[1]);
    y = {yn[0] / m, yn[1] / m};
    x = xn;
  }
  return count;
}

Spectrum eigenvalues(const SpectralProblem& p, int count, const ShootOptions& o) {
  p.validate();
  require(count >= 1 && count <= 40, "count must be in 1..40");
  const double a = p.alpha;
  // semiclassical density of levels T(E)/(2 pi)
  auto spacing = [&](double E) {
    const double e = std::max(E, 1.0);
    const double T = std::pow(e, (1 - a) / (2 * a)) * std::sqrt(kPi) * std::tgamma(1 + 1 / (2 * a)) /
                     std::tgamma(0.5 + 1 / (2 * a));
    return 2 * kPi / T;
  };
  auto D = [&](double E) { return spectral_D(p, E, o).real(); };
  Spectrum sp;
  double Ea = 0.0, Da = D(0.0);
  while (int(sp.values.size()) < count) {
    const double Eb = Ea + 0.2 * spacing(Ea);
    const double Db = D(Eb);
    if ((Da > 0) != (Db > 0)) {
      // Illinois variant of regula falsi
      double lo = Ea, hi = Eb, flo = Da, fhi = Db;
      int side = 0;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        const double m = (lo * fhi - hi * flo) / (fhi - flo);
        const double fm = D(m);
        if (fm == 0.0) {
          lo = hi = m;
          break;
        }
        if ((fm > 0) == (flo > 0)) {
          lo = m;
          flo = fm;
          if (side == -1) fhi /= 2;
          side = -1;
        } else {
          hi = m;
          fhi = fm;
          if (side == 1) flo /= 2;
          side = 1;
        }
      }
      sp.values.push_back(0.5 * (lo + hi));
    }
    Ea = Eb;
    Da = Db;
  }
  const double E_top = sp.values.back() + 0.3 * spacing(sp.values.back());
  sp.node_count = node_count(p, E_top, o);
  sp.complete = sp.node_count == int(sp.values.size());
  return sp;
}

cplx quantum_wronskian_residual(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  const SpectralProblem m = p.reflected();
  const cplx q = p.q();
  const double s = p.l + 0.5;
  const cplx E2 = q * q * E;
  return qpow(p, s) * spectral_D(p, E2, o) * spectral_D(m, E, o) -
         qpow(p, -s) * spectral_D(p, E, o) * spectral_D(m, E2, o) - (qpow(p, s) - qpow(p, -s));
}

SymmetryReport symmetry_checks(const SpectralProblem& p, cplx E, const ShootOptions& o) {
  const SpectralProblem m = p.reflected();
  const cplx q = p.q();
  const double s = p.l + 0.5;
  const cplx Em = E / (q * q);
  SymmetryReport r;
  const Decomposition d = decompose_psi(p, E, o);
  r.u = d.u;
  r.c_relation = std::abs(d.C + I1 * qpow(p, -s) * spectral_D(p, Em, o)) / (1 + std::abs(d.C));
  r.d_consistency = std::abs(d.D - spectral_D(p, E, o));

  const WaveValue psim = shoot_psi(m, E, o), chi = shoot_chi(p, E, o), chim = shoot_chi_minus(p, E, o);
  const cplx a = spectral_D(m, E, o), b = -I1 * qpow(p, s) * spectral_D(m, Em, o);
  const cplx v = a * chim.psi + b * chi.psi, dv = a * chim.dpsi + b * chi.dpsi;
  r.psi_minus_expansion = (std::abs(v - psim.psi) + std::abs(dv - psim.dpsi)) /
                          (std::abs(psim.psi) + std::abs(psim.dpsi));
  const WaveValue psi = shoot_psi(p, E, o);
  r.wronskian_pin = std::abs(wronskian(psi, psim) - 2.0 * I1 * (qpow(p, s) - qpow(p, -s)));
  r.chi_wronskian = std::abs(wronskian(chi, chim) - 2.0);
  return r;
}

cplx blz_A(double kappa, cplx lambda, double p, const ShootOptions& o) {
  if (!(kappa > 0 && kappa < 0.5)) throw ParameterError("blz_A: kappa must lie in (0, 1/2)");
  const SpectralProblem sp{1 / kappa - 1, 2 * p / kappa - 0.5};
  return spectral_D(sp, sp.rho() * lambda * lambda, o);
}

std::vector<cplx> bethe_equations(double alpha, double l, const std::vector<cplx>& z) {
  const double b = (3 + alpha) * (1 + 2 * alpha), c = alpha * (1 + 2 * alpha);
  const double c0 = ((2 * l + 1) * (2 * l + 1) - 4 * alpha * alpha) / (16 * (alpha + 1));
  std::vector<cplx> f(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    cplx s = -alpha * z[k] / (4 * (1 + alpha)) + c0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j == k) continue;
      const cplx d = z[k] - z[j];
      s += z[k] * (z[k] * z[k] + b * z[k] * z[j] + c * z[j] * z[j]) / (d * d * d);
    }
    f[k] = s;
  }
  return f;
}

namespace {

Eigen::MatrixXcd bethe_jacobian(double alpha, const std::vector<cplx>& z) {
  const double b = (3 + alpha) * (1 + 2 * alpha), c = alpha * (1 + 2 * alpha);
  const int L = int(z.size());
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(L, L);
  for (int k = 0; k < L; ++k) {
    J(k, k) = -alpha / (4 * (1 + alpha));
    for (int j = 0; j < L; ++j) {
      if (j == k) continue;
      const cplx zk = z[k], zj = z[j], d = zk - zj;
      const cplx n = zk * (zk * zk + b * zk * zj + c * zj * zj);
      const cplx d3 = d * d * d, d4 = d3 * d;
      J(k, k) += (3.0 * zk * zk + 2 * b * zk * zj + c * zj * zj) / d3 - 3.0 * n / d4;
      J(k, j) += zk * (b * zk + 2 * c * zj) / d3 + 3.0 * n / d4;
    }
  }
  return J;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

BetheRoots bethe_solve(double alpha, double l, const std::vector<cplx>& init, double tol, int max_iter) {
  require(alpha > 1, "alpha must be > 1");
  require(!init.empty(), "init must not be empty");
  for (std::size_t i = 0; i < init.size(); ++i)
    for (std::size_t j = i + 1; j < init.size(); ++j)
      require(init[i] != init[j], "init must be pairwise distinct");
  std::vector<cplx> z = init;
  std::vector<cplx> f = bethe_equations(alpha, l, z);
  double r = max_abs(f);
  for (int it = 0; it < max_iter && r > tol; ++it) {
    const Eigen::MatrixXcd J = bethe_jacobian(alpha, z);
    Eigen::VectorXcd rhs(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) rhs[k] = -f[k];
    const auto lu = J.fullPivLu();
    if (!lu.isInvertible()) throw NumericalError("bethe_solve: singular Jacobian at residual " + fmt17(r));
    const Eigen::VectorXcd step = lu.solve(rhs);
    double lambda = 1.0;
    bool accepted = false;
    for (int back = 0; back < 40; ++back, lambda /= 2) {
      std::vector<cplx> trial = z;
      for (std::size_t k = 0; k < z.size(); ++k) trial[k] += lambda * step[k];
      const std::vector<cplx> ft = bethe_equations(alpha, l, trial);
      const double rt = max_abs(ft);
      if (std::isfinite(rt) && rt < (1 - 1e-4 * lambda) * r) {
        z = trial;
        f = ft;
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(r <= tol)) {
    std::string last;
    for (const cplx& x : z) last += " (" + fmt17(x.real()) + "," + fmt17(x.imag()) + ")";
    throw NumericalError("bethe_solve: no convergence, residual " + fmt17(r) + ", last iterate" + last);
  }
  std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return {alpha, l, z, max_abs(bethe_equations(alpha, l, z))};
}

cplx excited_potential(const BetheRoots& roots, cplx x) {
  const double a = roots.alpha;
  require(x != cplx{}, "x must be nonzero");
  cplx v = std::pow(x, 2 * a) + roots.l * (roots.l + 1) / (x * x);
  const cplx xp = std::pow(x, 2 * a);
  const cplx g1 = (2 * a + 2) * xp * x, g2 = (2 * a + 2) * (2 * a + 1) * xp;
  for (const cplx& zk : roots.z) {
    const cplx g = xp * x * x - zk;
    if (std::abs(g) < 1e-12 * (std::abs(xp * x * x) + std::abs(zk)))
      throw ConditioningError("excited_potential: x on a singular locus");
    v -= 2.0 * (g2 / g - (g1 / g) * (g1 / g));
  }
  return v;
}

cplx z_form_potential(const BetheRoots& roots, cplx E, cplx z, ZCoefficient c) {
  const double k = 1 / (1 + roots.alpha), l = roots.l;
  const double extra = c == ZCoefficient::Consistent ? (k * k - 4) / 4 : (k - 2) * (6 - k) / 4;
  cplx first = k * k / 4;
  cplx w = (k * k * l * (l + 1) + extra) / (4.0 * z * z);
  for (const cplx& zk : roots.z) {
    first -= (k - 2) / zk;
    w += 2.0 / ((z - zk) * (z - zk)) + (k - 2) / (zk * (z - zk));
  }
  return w + first / z - k * k * E / 4.0 * std::pow(z, k - 2);
}

double change_of_variables_residual(const BetheRoots& roots, cplx E, const std::vector<cplx>& z_grid,
                                    ZCoefficient c) {
  const double k = 1 / (1 + roots.alpha);
  double worst = 0;
  for (const cplx& z : z_grid) {
    const cplx x = std::pow(z, k / 2);
    const cplx xp = k / 2 * std::pow(z, k / 2 - 1);
    // psi'' - p psi' - xp^2 (V - E) psi = 0 with p = x''/x'; removing the
    // first derivative adds p^2/4 - p'/2
    const cplx pz = (k / 2 - 1) / z, dpz = -(k / 2 - 1) / (z * z);
    const cplx sub = xp * xp * (excited_potential(roots, x) - E) + pz * pz / 4.0 - dpz / 2.0;
    const cplx w = z_form_potential(roots, E, z, c);
    worst = std::max(worst, std::abs(sub - w) / (1 + std::abs(w)));
  }
  return worst;
}

void write_spectrum_csv(std::ostream& os, const std::vector<double>& E) {
  os << "n,E\n";
  for (std::size_t i = 0; i < E.size(); ++i) os << i + 1 << ',' << fmt17(E[i]) << '\n';
}

void write_determinant_csv(std::ostream& os, const std::vector<cplx>& E, const std::vector<cplx>& D) {
  require(E.size() == D.size(), "E and D must have the same length");
  os << "re_E,im_E,re_D,im_D\n";
  for (std::size_t i = 0; i < E.size(); ++i)
    os << fmt17(E[i].real()) << ',' << fmt17(E[i].imag()) << ',' << fmt17(D[i].real()) << ','
       << fmt17(D[i].imag()) << '\n';
}

}  // namespace pblab
