#include "pblab/qpii.hpp"

#include <algorithm>
#include <cmath>

#include "pblab/ensemble.hpp"
#include "pblab/io.hpp"

namespace pblab {

void Grid2D::validate() const {
  require(t_min < t_max, "grid needs t_min < t_max");
  require(x_min < x_max, "grid needs x_min < x_max");
  require(n_t >= 8 && n_x >= 8, "grid needs n_t, n_x >= 8");
}

double TerminalSpec::value(double t_max, double x) const {
  require(t_max > 0, "terminal condition needs t_max > 0");
  return 1.0 / (1.0 + std::exp(-steepness * (x + std::sqrt(t_max))));
}

namespace {

/// Thomas algorithm; sub[0] and sup[n-1] are ignored.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                       std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

Field2D solve_qpii(double kappa, const Grid2D& grid, const TerminalSpec& terminal,
                   const SolveOptions& options) {
  require(kappa > 0, "kappa must be positive");
  grid.validate();
  require(options.max_substep > 0, "max_substep must be positive");
  require(grid.x_min < -std::sqrt(std::max(grid.t_max, 0.0)) &&
              grid.x_max > std::sqrt(std::max(grid.t_max, 0.0)),
          "x-grid must cover the parabola x^2 = t at t_max");

  const int nx = grid.n_x, nt = grid.n_t;
  const double h = grid.dx();
  Field2D field{grid, std::vector<double>(std::size_t(nx) * nt), kappa};
  std::vector<double> F(nx);
  for (int j = 0; j < nx; ++j) F[j] = terminal.value(grid.t_max, grid.x(j));
  F[0] = 0.0;
  std::copy(F.begin(), F.end(), field.values.begin() + std::size_t(nt - 1) * nx);

  const int substeps = std::max(1, int(std::ceil(grid.dt() / options.max_substep)));
  const double tau = grid.dt() / substeps;
  std::vector<double> sub(nx), diag(nx), sup(nx), rhs(nx);

  for (int i = nt - 1; i > 0; --i) {
    for (int s = 0; s < substeps; ++s) {
      // Backward step from t to t - tau, coefficients at the new level.
      const double t_new = grid.t(i) - (s + 1) * tau;
      const double r = tau / kappa;
      sub[0] = sup[0] = 0;
      diag[0] = 1;
      rhs[0] = 0;
      for (int j = 1; j < nx; ++j) {
        const double v = t_new - grid.x(j) * grid.x(j);
        double lo = 1 / (h * h), hi = 1 / (h * h), mid = -2 / (h * h);
        if (std::abs(v) * h / 2 <= 1) {
          lo -= v / (2 * h);
          hi += v / (2 * h);
        } else if (v > 0) {
          hi += v / h;
          mid -= v / h;
        } else {
          lo -= v / h;
          mid += v / h;
        }
        if (j == nx - 1) {
          // Neumann ghost point F_{n} = F_{n-2}
          lo += hi;
          hi = 0;
        }
        sub[j] = -r * lo;
        diag[j] = 1 - r * mid;
        sup[j] = -r * hi;
        rhs[j] = F[j];
      }
      solve_tridiagonal(sub, diag, sup, rhs);
      F.swap(rhs);
      for (double f : F)
        if (!std::isfinite(f)) throw NumericalError("qpii implicit solve produced a non-finite value");
    }
    std::copy(F.begin(), F.end(), field.values.begin() + std::size_t(i - 1) * nx);
  }
  return field;
}

double qpii_residual(const Field2D& field, std::optional<double> t_upper) {
  const Grid2D& g = field.grid;
  const double h = g.dx(), k = g.dt();
  double worst = 0;
  for (int i = 1; i + 1 < g.n_t; ++i) {
    const double t = g.t(i);
    if (t_upper && t > *t_upper) continue;
    for (int j = 1; j + 1 < g.n_x; ++j) {
      const double ft = (field.at(i + 1, j) - field.at(i - 1, j)) / (2 * k);
      const double fx = (field.at(i, j + 1) - field.at(i, j - 1)) / (2 * h);
      const double fxx = (field.at(i, j + 1) - 2 * field.at(i, j) + field.at(i, j - 1)) / (h * h);
      const double x = g.x(j);
      worst = std::max(worst, std::abs(field.kappa * ft + fxx + (t - x * x) * fx));
    }
  }
  return worst;
}

double TWTable::interpolate(double t) const {
  require(!t_values.empty(), "empty table");
  if (t <= t_values.front()) return cdf_values.front();
  if (t >= t_values.back()) return cdf_values.back();
  const auto it = std::upper_bound(t_values.begin(), t_values.end(), t);
  const std::size_t i = std::size_t(it - t_values.begin());
  const double w = (t - t_values[i - 1]) / (t_values[i] - t_values[i - 1]);
  return (1 - w) * cdf_values[i - 1] + w * cdf_values[i];
}

double characteristic_time(double t0, double x, double kappa) {
  // dt/du = kappa / (1 - t u^2) with u = 1/x, from u = 0 at t = t0
  const double u_end = 1.0 / x;
  const int steps = 32;
  const double du = u_end / steps;
  auto f = [kappa](double u, double t) { return kappa / (1 - t * u * u); };
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    const double u = k * du;
    const double k1 = f(u, t), k2 = f(u + du / 2, t + du * k1 / 2), k3 = f(u + du / 2, t + du * k2 / 2),
                 k4 = f(u + du, t + du * k3);
    t += du * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
  }
  return t;
}

TWTable extract_tw(const Field2D& field, double plateau_tol, TWReadout readout) {
  const Grid2D& g = field.grid;
  require(g.x_max > 0, "extract_tw needs x_max > 0");
  TWTable tw;
  tw.beta = 2 * field.kappa;
  const int j = g.n_x - 1;
  TWTable edge;
  for (int i = 0; i < g.n_t; ++i) {
    edge.t_values.push_back(g.t(i));
    edge.cdf_values.push_back(field.at(i, j));
  }
  const double h = g.dx();
  for (int i = 0; i < g.n_t; ++i) {
    const double t0 = g.t(i);
    double t1 = t0;
    if (readout == TWReadout::Characteristic) t1 = characteristic_time(t0, g.x_max, field.kappa);
    tw.t_values.push_back(t0);
    tw.cdf_values.push_back(edge.interpolate(t1));
    // The readout neglects diffusion along a characteristic that spends a
    // time of order kappa/x_max in the boundary region.
    const int ii = std::clamp(int(std::lround((std::min(t1, g.t_max) - g.t_min) / g.dt())), 0, g.n_t - 1);
    const double fxx = (field.at(ii, j - 1) - 2 * field.at(ii, j - 2) + field.at(ii, j - 3)) / (h * h);
    tw.plateau_ok.push_back(t1 <= g.t_max && std::abs(fxx) / g.x_max <= plateau_tol);
  }
  return tw;
}

TWTable empirical_soft_edge_cdf(double beta, int N, long n_samples, std::uint64_t seed,
                                const std::vector<double>& t_points, const SoftEdgeScaling& scaling) {
  require(beta > 0, "beta must be positive");
  require(N >= 1, "N must be >= 1");
  require(n_samples >= 1, "n_samples must be >= 1");
  const double kappa = beta / 2;
  const double lf = scaling.lambda_factor.value_or(std::sqrt(2.0 / beta));
  const double tf = scaling.t_factor.value_or(std::pow(kappa, 2.0 / 3.0));
  const double nscale = std::pow(double(N), scaling.exponent);
  const double center = scaling.center * std::sqrt(double(N));

  std::vector<double> s(n_samples);
  for_each_chunk(n_samples, seed, [&](std::mt19937_64& rng, long begin, long end) {
    for (long k = begin; k < end; ++k) {
      const Tridiagonal m = draw_tridiagonal(N, beta, 1.0, rng);
      s[k] = tf * nscale * (lf * largest_eigenvalue(m, 1e-10) - center);
    }
  });
  std::sort(s.begin(), s.end());
  TWTable tw;
  tw.beta = beta;
  for (double t : t_points) {
    const double p = double(std::upper_bound(s.begin(), s.end(), t) - s.begin()) / double(n_samples);
    tw.t_values.push_back(t);
    tw.cdf_values.push_back(p);
    tw.stderr_values.push_back(std::sqrt(p * (1 - p) / double(n_samples)));
  }
  return tw;
}

double sup_distance(const TWTable& a, const TWTable& b, double lo, double hi) {
  double d = 0;
  for (std::size_t i = 0; i < b.t_values.size(); ++i) {
    const double t = b.t_values[i];
    if (t < lo || t > hi) continue;
    d = std::max(d, std::abs(a.interpolate(t) - b.cdf_values[i]));
  }
  return d;
}

void write_tw_csv(const TWTable& table, std::ostream& out) {
  out << "t,F_beta,stderr\n";
  for (std::size_t i = 0; i < table.t_values.size(); ++i) {
    out << fmt17(table.t_values[i]) << ',' << fmt17(table.cdf_values[i]) << ',';
    if (i < table.stderr_values.size()) out << fmt17(table.stderr_values[i]);
    out << '\n';
  }
}

}  // namespace pblab
