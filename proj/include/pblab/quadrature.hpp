#pragma once

// Adaptive Gauss-Kronrod (10/21) quadrature for complex-valued integrands.

#include <functional>
#include <vector>

#include "pblab/common.hpp"

namespace pblab {

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 2000;
};

struct QuadResult {
  cplx value;
  double error = 0.0;  ///< estimated absolute error
  int intervals = 0;
  bool converged = true;
};

/// Integrate f over [a, b].  Interior break points (kinks, integrable
/// singularities) are honoured as initial subdivision points.
QuadResult integrate_gk(const std::function<cplx(double)>& f, double a, double b,
                        const QuadOptions& options = {},
                        const std::vector<double>& breaks = {});

/// As integrate_gk but throws AccuracyError carrying the best estimate when
/// the tolerance is not met.
cplx integrate_or_throw(const std::function<cplx(double)>& f, double a, double b,
                        const QuadOptions& options = {}, const std::vector<double>& breaks = {},
                        double* error = nullptr);

}  // namespace pblab
