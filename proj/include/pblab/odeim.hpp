#pragma once

// Half-line Schrodinger problem
//   -Psi'' + (x^{2 alpha} + l(l+1)/x^2) Psi = E Psi,   x > 0,
// its spectral determinant D(E, l) built from Wronskians, the discrete
// symmetries, and the excited-state (Bethe root) deformation.

#include <array>
#include <iosfwd>
#include <vector>

#include "pblab/common.hpp"

namespace pblab {

struct SpectralProblem {
  double alpha = 2.0;
  double l = 0.3;

  /// alpha > 1, 2l+1 not a multiple of 2 + 2 alpha, and neither l nor
  /// -l-1 resonant in the small-x series.  For Re l <= -3/2 psi is the
  /// analytic continuation given by the same series.
  void validate() const;

  double kappa() const { return 1.0 / (1.0 + alpha); }
  cplx q() const;
  double rho() const;
  /// l -> -l-1.
  SpectralProblem reflected() const { return {alpha, -l - 1.0}; }
};

struct WaveValue {
  double x = 0.0;
  cplx psi, dpsi;
};

struct ShootOptions {
  double x_match = 1.0;
  double x_start = 0.0;  ///< 0: 1e-3 times the local wavelength
  double x_far = 0.0;    ///< 0: chosen by the asymptotic-series test
  double tol = 1e-13;
};

/// Constant n(l) with psi ~ n(l) x^{l+1} as x -> 0.
double psi_normalization(const SpectralProblem& p);

/// The solution regular at the origin, psi ~ n(l) x^{l+1} (1 + O(x^2)),
/// evaluated from the convergent double series at x_start and integrated
/// to x_match.
WaveValue shoot_psi(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

/// The solution decaying along the positive axis,
/// chi ~ x^{-alpha/2} exp(-x^{1+alpha}/(1+alpha)).
WaveValue shoot_chi(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

/// chi at a complex point, reached along the real axis from x_far to |x|
/// and then along the arc |x| = const.
std::array<cplx, 2> chi_at(const SpectralProblem& p, cplx E, cplx x, const ShootOptions& o = {});

/// chi^-(x) = i q^{-1/2} chi(q x, q^{-2} E) at x_match.
WaveValue shoot_chi_minus(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

/// Value of x_far selected for (p, E) when o.x_far is zero.
double default_x_far(const SpectralProblem& p, cplx E);

cplx wronskian(const WaveValue& f, const WaveValue& g);

/// D(E, l) = W[chi, psi] / 2.
cplx spectral_D(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

struct Decomposition {
  cplx C, D;  ///< psi = C chi + D chi^-
  cplx u;     ///< i q^{-1/2} chi(q^2 x, q^{-4} E) = -i q^{1/2} chi + u chi^-
};

/// Coefficients from the 2x2 linear system at x_match.
Decomposition decompose_psi(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

struct Spectrum {
  std::vector<double> values;
  int node_count = 0;     ///< zeros of psi(x, E_top) on (0, x_far)
  bool complete = true;   ///< node_count == values.size()
};

/// Lowest `count` real zeros of D(., l), bracketed by a scan with a step
/// of a fifth of the semiclassical level spacing and refined by safeguarded
/// secant iteration.
Spectrum eigenvalues(const SpectralProblem& p, int count, const ShootOptions& o = {});

/// Number of zeros of psi(x, E) on (0, x_far) for real E.
int node_count(const SpectralProblem& p, double E, const ShootOptions& o = {});

/// q^{l+1/2} D(q^2 E, l) D(E, -l-1) - q^{-l-1/2} D(E, l) D(q^2 E, -l-1)
///   - (q^{l+1/2} - q^{-l-1/2}).
cplx quantum_wronskian_residual(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

struct SymmetryReport {
  double c_relation = 0.0;         ///< |C(E,l) + i q^{-l-1/2} D(q^{-2}E, l)|
  double psi_minus_expansion = 0.0; ///< relative mismatch of the psi^- expansion
  double d_consistency = 0.0;      ///< |D from the decomposition - spectral_D|
  double wronskian_pin = 0.0;      ///< |W[psi+, psi-] - 2i(q^{l+1/2} - q^{-l-1/2})|
  double chi_wronskian = 0.0;      ///< |W[chi, chi^-] - 2|
  cplx u;                          ///< reported, not asserted
};

SymmetryReport symmetry_checks(const SpectralProblem& p, cplx E, const ShootOptions& o = {});

/// A(lambda, p) = D(rho lambda^2, 2p/kappa - 1/2) with alpha = 1/kappa - 1.
cplx blz_A(double kappa, cplx lambda, double p, const ShootOptions& o = {});

struct BetheRoots {
  double alpha = 2.0;
  double l = 0.3;
  std::vector<cplx> z;
  double residual = 0.0;
};

/// Left-hand sides of the L coupled Bethe equations at z.
std::vector<cplx> bethe_equations(double alpha, double l, const std::vector<cplx>& z);

/// Damped Newton from init; roots sorted by real part, then imaginary part.
BetheRoots bethe_solve(double alpha, double l, const std::vector<cplx>& init, double tol = 1e-12,
                       int max_iter = 200);

/// x^{2 alpha} + l(l+1)/x^2 - 2 d^2/dx^2 sum_k log(x^{2 alpha + 2} - z_k).
cplx excited_potential(const BetheRoots& roots, cplx x);

enum class ZCoefficient {
  Consistent,  ///< 1/(4z^2) coefficient kappa^2 l(l+1) + (kappa^2 - 4)/4
  AsPrinted,   ///< kappa^2 l(l+1) + (kappa - 2)(6 - kappa)/4
};

/// Potential of the z-form equation -psi'' + W(z) psi = 0.
cplx z_form_potential(const BetheRoots& roots, cplx E, cplx z, ZCoefficient c = ZCoefficient::Consistent);

/// max over z_grid of |W_sub(z) - W(z)| / (1 + |W(z)|), where W_sub is
/// obtained from excited_potential by x = z^{kappa/2},
/// Psi = z^{(kappa-2)/4} psi.
double change_of_variables_residual(const BetheRoots& roots, cplx E, const std::vector<cplx>& z_grid,
                                    ZCoefficient c = ZCoefficient::Consistent);

void write_spectrum_csv(std::ostream& os, const std::vector<double>& E);
/// Columns re_E, im_E, re_D, im_D.
void write_determinant_csv(std::ostream& os, const std::vector<cplx>& E, const std::vector<cplx>& D);

}  // namespace pblab
