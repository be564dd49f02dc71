#pragma once

// kappa-pole solution of the QPII governing system: Calogero-type dynamics
//   kappa^2 Q_k'' = -2 Q_k (t - Q_k^2) + (kappa - 2) - sum_{j != k} 8 / (Q_k - Q_j)^3,
//   kappa U' = -sum_k Q_k^2,
// the fields P, b, V built from the poles, and residuals of the identities
// they satisfy.

#include <ostream>
#include <vector>

#include "pblab/common.hpp"
#include "pblab/dop853.hpp"

namespace pblab {

inline constexpr double kCollisionEps = 1e-6;

struct PoleState {
  int kappa = 1;
  double t = 0.0;
  std::vector<cplx> Q;
  std::vector<cplx> Qdot;
  cplx U{};

  void validate(double collision_eps = kCollisionEps) const;
  /// R_k = sum_{j != k} 1 / (Q_k - Q_j).
  cplx R(int k) const;
  double min_separation() const;
};

struct PoleRates {
  std::vector<cplx> Qdot;
  std::vector<cplx> Qddot;
  cplx Udot{};
};

PoleRates poles_rhs(const PoleState& state, double collision_eps = kCollisionEps);

/// The kappa first integrals; zero on admissible states.
std::vector<cplx> first_integrals(const PoleState& state);

/// Complete (t, Q, Qdot_1) to an admissible state: solves for Qdot_2..kappa
/// and U so that every first integral vanishes.  Throws NumericalError if
/// Newton's method fails.
PoleState admissible_state(int kappa, double t, const std::vector<cplx>& Q, cplx qdot_first,
                           cplx guess_qdot = cplx{}, cplx guess_U = cplx{});

/// Poles on a circle of radius 0.7 around 1.2i, Qdot_1 = 0.1, completed to
/// an admissible state at t.
PoleState demo_initial_state(int kappa, double t = 0.0);

struct PoleIntegrateOptions {
  double output_step = 0.05;
  double collision_eps = kCollisionEps;
};

struct Trajectory {
  std::vector<PoleState> states;
  OdeStats stats;
  double tol = 0.0;
};

/// DOP853 with rtol = atol = tol.  Records a state every output_step and at
/// t_final.  Throws CollisionError with the time of the close approach.
Trajectory integrate_poles(const PoleState& initial, double t_final, double tol,
                           const PoleIntegrateOptions& options = {});

/// Advance one state, same integrator and tolerance semantics.
PoleState advance(const PoleState& state, double t_final, double tol,
                  double collision_eps = kCollisionEps);

struct FieldEval {
  cplx x;
  double t = 0.0;
  cplx b_plus;
  cplx b_one;
  cplx P;
  cplx b;
  cplx V;
  cplx v() const { return t - x * x; }
};

FieldEval eval_fields(const PoleState& state, cplx x);

/// Schrodinger potential from its definition b + (P - v)^2/4 - d_x(P - v)/2,
/// for comparison with the closed form in FieldEval::V.
cplx potential_from_definition(const PoleState& state, cplx x);

enum class TimeDerivative {
  Analytic,          ///< Taylor jets in t from the equations of motion
  FiniteDifference,  ///< central differences of states advanced by +-fd_step
};

enum class GoverningForm {
  PB,  ///< equations in P and b
  PV,  ///< equations in P and the Schrodinger potential V
};

struct ResidualOptions {
  TimeDerivative mode = TimeDerivative::Analytic;
  double fd_step = 1e-4;
  double pole_margin = 1e-3;  ///< minimum |x - Q_k| on the grid
  GoverningForm form = GoverningForm::PB;
};

/// Candidates whose distance to every pole along the trajectory is at least
/// margin.
std::vector<cplx> pole_free_grid(const Trajectory& traj, const std::vector<cplx>& candidates, double margin);

/// 9 x 9 lattice on [-2, 2]^2 filtered by pole_free_grid.
std::vector<cplx> default_grid(const Trajectory& traj, double margin = 0.3);

/// max over states and grid points of both governing-equation residuals.
double governing_residual(const Trajectory& traj, const std::vector<cplx>& x_grid,
                          const ResidualOptions& options = {});

/// Residual of the bilinear equation for Y = exp(g(t)) prod_k (x - Q_k),
/// g' = (t^2/2 + U)/kappa.  The exponential gauge is fixed by P = d_x log Y
/// only up to a function of t; this is the choice for which the equation
/// holds.  Evaluated with g(t_state) = 0 at every state, so the residual
/// equals the expression for the bare product with the two gauge terms
/// added.
double hirota_residual(const Trajectory& traj, const std::vector<cplx>& x_grid,
                       const ResidualOptions& options = {});

/// Same, with Y scaled by a constant.
double hirota_residual_scaled(const Trajectory& traj, const std::vector<cplx>& x_grid, cplx scale,
                              const ResidualOptions& options = {});

/// Taylor coefficients Q_k(t0 + s) = sum_n q[k][n] s^n and U likewise,
/// from the equations of motion.
struct PoleSeries {
  int kappa = 1;
  double t0 = 0.0;
  std::vector<std::vector<cplx>> q;
  std::vector<cplx> u;
};

PoleSeries pole_series(const PoleState& state, int order);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace pblab
