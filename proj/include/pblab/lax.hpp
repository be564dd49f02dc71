#pragma once

// Polynomial-in-x Lax pair of QPII for integer kappa,
//   d_x Psi = L Psi,  d_t Psi = B Psi,  Psi = (F, G),
// and the reconstruction of F from the linear system.

#include <array>
#include <vector>

#include "pblab/common.hpp"
#include "pblab/poles.hpp"

namespace pblab {

struct Matrix2 {
  cplx a11, a12, a21, a22;

  cplx trace() const { return a11 + a22; }
  cplx det() const { return a11 * a22 - a12 * a21; }
  double frobenius() const;

  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator*(cplx s, const Matrix2& a);
};

/// Sign convention of the f_v entry of L.  Consistent is
///   f_v = -x^4/2 + t x^2 - (kappa - 2) x + U,
/// the one for which zero curvature holds.  AsPrinted flips the sign of the
/// last three terms and is kept for comparison only.
enum class FvConvention { Consistent, AsPrinted };

Matrix2 eval_L(const PoleState& state, cplx x, FvConvention fv = FvConvention::Consistent);
Matrix2 eval_B(const PoleState& state, cplx x, FvConvention fv = FvConvention::Consistent);

/// The interpolation polynomials L_d and B_d at x.
cplx lax_Ld(const PoleState& state, cplx x);
cplx lax_Bd(const PoleState& state, cplx x);

struct LaxOptions {
  TimeDerivative mode = TimeDerivative::Analytic;
  double fd_step = 1e-4;
  double pole_margin = 1e-3;
  FvConvention fv = FvConvention::Consistent;
};

/// max Frobenius norm of d_t L - d_x B + [L, B] over states and grid points.
double zero_curvature_residual(const Trajectory& traj, const std::vector<cplx>& x_grid,
                               const LaxOptions& options = {});

struct LinSolution {
  std::vector<cplx> x_grid;
  std::vector<std::array<cplx, 2>> values;  ///< (F, G) at each grid point
  double t = 0.0;
  PoleState state;
};

/// Integrates d_x (F, G) = L (F, G) along the polyline x_grid from
/// init at x_grid[0].  Segments passing within pole_margin of a pole raise
/// ConditioningError; see detour_path.
LinSolution reconstruct_F(const PoleState& state, const std::vector<cplx>& x_grid, std::array<cplx, 2> init,
                          double tol = 1e-12, double pole_margin = 1e-3);

/// Polyline from a to b that keeps a distance of at least margin from every
/// pole, going around on the left of the direction of travel.
std::vector<cplx> detour_path(const PoleState& state, cplx a, cplx b, double margin);

/// max over grid points of |F'' + (t - x^2 + kappa b_+) F' - kappa b_1 F|
/// divided by |F''| + |(t - x^2 + kappa b_+) F'| + |kappa b_1 F|.
double separated_ode_residual(const LinSolution& sol);

struct TimeCheck {
  double qpii = 0.0;         ///< |kappa F_t + F_xx + (t - x^2) F_x| / scale
  double first_order = 0.0;  ///< |F_t - b_+ F_x + b_1 F| / scale
};

/// Reconstructs F at t - h, t, t + h, evolving the initial vector at
/// x_grid[0] by d_t Psi = B Psi together with the poles, and differences in
/// t.  Scale is max |F| on the grid at t.
TimeCheck time_evolution_check(const PoleState& state, const std::vector<cplx>& x_grid,
                               std::array<cplx, 2> init, double h = 1e-3, double tol = 1e-13);

/// Psi = F Y^{-1/2} exp((t x - x^3/3)/2), square root continued along the
/// grid from the principal branch at x_grid[0].
std::vector<cplx> schrodinger_gauge(const LinSolution& sol);

/// max over grid points of |Psi'' - V Psi| / (|Psi''| + |V Psi|), V from
/// eval_fields.
double schrodinger_residual(const LinSolution& sol);

enum class MonodromyGauge {
  FG,   ///< the pair (F, G) of the linear system
  Psi,  ///< (Psi, Psi') of the Schrodinger form
};

/// Fundamental matrix after one counterclockwise loop of the given radius
/// around Q_k, starting from the identity.
Matrix2 monodromy(const PoleState& state, int k, double radius, MonodromyGauge gauge, double tol = 1e-12);

}  // namespace pblab
