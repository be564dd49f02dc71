#pragma once

// Dormand-Prince 8(5,3) embedded Runge-Kutta integrator for complex-valued
// systems with a real independent variable.

#include <functional>
#include <limits>
#include <vector>

#include "pblab/common.hpp"

namespace pblab {

using CVec = std::vector<cplx>;
using OdeRhs = std::function<void(double, const CVec&, CVec&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  ///< 0 selects a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

class Dop853 {
 public:
  Dop853(OdeRhs f, OdeOptions options = {});

  /// Advance (t, y) to t_end.  Throws NumericalError on step-size underflow
  /// or when max_steps is exceeded; exceptions from the right-hand side
  /// propagate unchanged.
  void integrate(double& t, CVec& y, double t_end);

  const OdeStats& stats() const { return stats_; }
  const OdeOptions& options() const { return opt_; }

 private:
  double initial_step(double t, const CVec& y, const CVec& f0, double direction);
  void eval(double t, const CVec& y, CVec& out);

  OdeRhs f_;
  OdeOptions opt_;
  OdeStats stats_;
  double h_last_ = 0.0;
};

/// Integrate dy/dz = f(z, y) along the straight segment from z0 to z1 in the
/// complex plane.
CVec integrate_segment(const std::function<void(cplx, const CVec&, CVec&)>& f, cplx z0, cplx z1,
                       CVec y, const OdeOptions& options, OdeStats* stats = nullptr);

}  // namespace pblab
