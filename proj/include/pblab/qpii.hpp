#pragma once

// Quantum Painleve II Fokker-Planck equation
//   (kappa d_t + d_xx + (t - x^2) d_x) F = 0
// solved backwards in t from a terminal profile, and the Tracy-Widom tables
// read off at large x.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "pblab/common.hpp"

namespace pblab {

struct Grid2D {
  double t_min = -10, t_max = 8;
  double x_min = -8, x_max = 8;
  int n_t = 800, n_x = 800;

  void validate() const;
  double dt() const { return (t_max - t_min) / (n_t - 1); }
  double dx() const { return (x_max - x_min) / (n_x - 1); }
  double t(int i) const { return t_min + i * dt(); }
  double x(int j) const { return x_min + j * dx(); }
};

struct Field2D {
  Grid2D grid;
  std::vector<double> values;  ///< row-major, row i is t = grid.t(i)
  double kappa = 1.0;

  double at(int i, int j) const { return values[std::size_t(i) * grid.n_x + j]; }
  double& at(int i, int j) { return values[std::size_t(i) * grid.n_x + j]; }
};

/// F(t_max, x) = sigmoid(steepness * (x + sqrt(t_max))).
struct TerminalSpec {
  double steepness = 2.0;
  double value(double t_max, double x) const;
};

struct SolveOptions {
  double max_substep = 0.005;  ///< upper bound on the internal implicit-Euler step
};

Field2D solve_qpii(double kappa, const Grid2D& grid, const TerminalSpec& terminal = {},
                   const SolveOptions& options = {});

/// max over interior points with t <= t_upper of
/// |kappa F_t + F_xx + (t - x^2) F_x|, central differences.
double qpii_residual(const Field2D& field, std::optional<double> t_upper = std::nullopt);

struct TWTable {
  std::vector<double> t_values;
  std::vector<double> cdf_values;
  std::vector<double> stderr_values;  ///< empty for the PDE route
  std::vector<bool> plateau_ok;       ///< empty for the empirical route
  double beta = 2.0;

  /// Linear interpolation of the CDF.
  double interpolate(double t) const;
};

enum class TWReadout {
  Direct,          ///< F_beta(t) = F(t, x_max)
  Characteristic,  ///< F_beta(t) = F(t', x_max), t' on the large-x characteristic through (t, +inf)
};

/// Time at which the characteristic dx/dt = (t - x^2)/kappa entering from
/// x = +inf at t0 reaches x.
double characteristic_time(double t0, double x, double kappa);

/// Tracy-Widom table from the large-x limit of F.  At finite x_max the
/// transport term gives F(t, x) = F_beta(t - kappa/x + O(x^-3)), which the
/// characteristic readout removes.  Rows whose neglected-diffusion estimate
/// |F_xx|/x_max near x_max exceeds plateau_tol, or whose characteristic
/// leaves the grid, are flagged.
TWTable extract_tw(const Field2D& field, double plateau_tol = 1e-3,
                   TWReadout readout = TWReadout::Characteristic);

/// Scaling of the largest eigenvalue of the tridiagonal model (density
/// |Delta|^beta exp(-sum x^2/2)) onto the variable t of the QPII equation:
///   s = N^exponent * (lambda_factor * lambda_max - center * sqrt(N)),
///   t = t_factor * s,
/// with defaults lambda_factor = sqrt(2/beta), center = 2, exponent = 1/6,
/// t_factor = kappa^(2/3).
struct SoftEdgeScaling {
  std::optional<double> lambda_factor;
  double center = 2.0;
  double exponent = 1.0 / 6.0;
  std::optional<double> t_factor;
};

TWTable empirical_soft_edge_cdf(double beta, int N, long n_samples, std::uint64_t seed,
                                const std::vector<double>& t_points,
                                const SoftEdgeScaling& scaling = {});

/// sup over rows of b with t in [lo, hi] of |a(t) - b(t)|, a interpolated.
double sup_distance(const TWTable& a, const TWTable& b, double lo, double hi);

void write_tw_csv(const TWTable& table, std::ostream& out);

}  // namespace pblab
