#pragma once

// General-beta log-gases: tridiagonal sampling, small-N quadrature, and the
// Virasoro / loop / BPZ identities evaluated as numerical residuals.
//
// Density convention: |Delta(x)|^beta * prod_i exp(-V(x_i)) with
//   V(x) = -sum_k t_k x^k              (polynomial couplings)
//   V(x) = x^2 / (2 a^2)               (Gaussian of scale a, i.e. t_2 = -1/(2a^2))
//   V(x) = C sum_l m_l log|x - w_l|    (multi-Penner)

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pblab/common.hpp"
#include "pblab/quadrature.hpp"

namespace pblab {

enum class PotentialKind { PolynomialCouplings, MultiPenner, Gaussian };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::Gaussian;
  std::vector<double> couplings;  ///< t_0 .. t_K
  std::vector<double> masses;     ///< m_l
  std::vector<double> positions;  ///< w_l
  double penner_c = 0.0;          ///< overall constant C
  double scale = 1.0;             ///< Gaussian a

  static PotentialSpec polynomial(std::vector<double> t);
  static PotentialSpec multi_penner(std::vector<double> m, std::vector<double> w, double c);
  static PotentialSpec gaussian(double a);

  /// t_k for the polynomial and Gaussian variants.
  std::vector<double> effective_couplings() const;
  double value(double x) const;
  double derivative(double x) const;
  cplx derivative(cplx x) const;
  void validate() const;
};

class EnsembleSpec {
 public:
  EnsembleSpec(int n_eigen, double beta, PotentialSpec potential);

  int n_eigen() const { return n_; }
  double beta() const { return beta_; }
  double kappa() const { return beta_ / 2.0; }
  double central_charge() const;
  const PotentialSpec& potential() const { return pot_; }

 private:
  int n_;
  double beta_;
  PotentialSpec pot_;
};

struct SampleBatch {
  std::vector<std::vector<double>> configs;
  std::vector<double> log_weights;
  std::uint64_t seed = 0;
  EnsembleSpec spec;
};

struct MCStat {
  cplx mean;
  double stderr_ = 0.0;
  long n_samples = 0;
  double stderr() const { return stderr_; }
};

/// Weighted mean with a delta-method standard error.
MCStat weighted_mean(std::span<const cplx> values, std::span<const cplx> weights);
MCStat plain_mean(std::span<const cplx> values);

/// Number of worker threads (PBLAB_THREADS caps hardware concurrency).
int worker_threads();

/// Symmetric tridiagonal matrix of the general-beta Gaussian model with
/// scale a; eigenvalue density |Delta|^beta exp(-sum x^2/(2a^2)).
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
};
Tridiagonal draw_tridiagonal(int n, double beta, double a, std::mt19937_64& rng);

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
double largest_eigenvalue(const Tridiagonal& m, double tol = 1e-12);

/// Eigenvalues in ascending order.
std::vector<double> eigenvalues(const Tridiagonal& m);

inline constexpr long kDrawChunk = 256;

/// Run body(rng, begin, end) over [0, count) in chunks of kDrawChunk.  Each
/// chunk owns a generator seeded from (seed, chunk index), so the output is
/// independent of the thread count.
void for_each_chunk(long count, std::uint64_t seed,
                    const std::function<void(std::mt19937_64&, long, long)>& body);

SampleBatch sample_gbeta(const EnsembleSpec& spec, long n_samples, std::uint64_t seed);

struct Domain {
  double lo, hi;
};

/// Default integration domain: |x| <= 12a for Gaussian specs, [-L, L] with L
/// from the leading coupling for polynomial specs, and the interval between
/// the two leftmost Penner points for multi-Penner specs.
Domain default_domain(const EnsembleSpec& spec);

/// Integral of observable * |Delta|^beta * exp(-sum V) over domain^M, M <= 3.
QuadResult quadrature_integral(const EnsembleSpec& spec,
                               const std::function<cplx(std::span<const double>)>& observable,
                               std::optional<Domain> domain = std::nullopt,
                               const QuadOptions& options = {});

/// Normalized quadrature expectation value; error estimate in *error.
cplx quadrature_mean(const EnsembleSpec& spec,
                     const std::function<cplx(std::span<const double>)>& observable,
                     double* error = nullptr, const QuadOptions& options = {});

/// Per-sample Virasoro observable; its exact expectation vanishes.
double virasoro_observable(std::span<const double> x, std::span<const double> t, double kappa,
                           int n);

MCStat virasoro_residual(const SampleBatch& batch, int n);
cplx virasoro_residual_quadrature(const EnsembleSpec& spec, int n, double* error = nullptr,
                                  const QuadOptions& options = {});

/// Loop-equation observable under the alpha-weighted measure.
cplx loop_observable(std::span<const double> x, const EnsembleSpec& spec, cplx z, double alpha);

MCStat loop_identity_residual(const SampleBatch& batch, cplx z, double alpha);
cplx loop_identity_quadrature(const EnsembleSpec& spec, cplx z, double alpha,
                              double* error = nullptr, const QuadOptions& options = {});

enum class AlphaChoice { One, MinusHalfBeta };

struct BpzResult {
  cplx residual;
  double error_estimate = 0.0;  ///< quadrature noise plus Richardson stencil error
  cplx z_value;                 ///< Z(z), for scale
};

/// Fuchsian BPZ equation for multi-Penner potentials applied to
/// Z(z) = int prod (z - x_i)^alpha dmu.
BpzResult bpz_ode_residual(const EnsembleSpec& spec, AlphaChoice alpha, cplx z, double fd_step,
                           const QuadOptions& options = {});

/// Confluent BPZ equation for polynomial potentials.
BpzResult confluent_bpz_residual(const EnsembleSpec& spec, AlphaChoice alpha, cplx z,
                                 double fd_step, const QuadOptions& options = {});

void write_batch_csv(const SampleBatch& batch, std::ostream& out);

}  // namespace pblab
