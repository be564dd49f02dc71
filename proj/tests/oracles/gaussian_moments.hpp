#pragma once

// Closed-form two-eigenvalue averages for even beta, obtained by expanding
// (x1 - x2)^beta binomially against independent Gaussian moments.

#include <cmath>

namespace oracle {

/// E[x^k] for x ~ N(0, a^2).
inline double gaussian_moment(int k, double a) {
  if (k % 2) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 0; j -= 2) m *= j;
  return m * std::pow(a, k);
}

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

/// <p_m> = <x1^m + x2^m> for density (x1-x2)^beta exp(-(x1^2+x2^2)/(2a^2)),
/// beta a positive even integer.
inline double two_body_power_sum(int m, int beta, double a) {
  double num = 0, den = 0;
  for (int j = 0; j <= beta; ++j) {
    const double c = binomial(beta, j) * (((beta - j) % 2) ? -1.0 : 1.0);
    num += c * (gaussian_moment(j + m, a) * gaussian_moment(beta - j, a) +
                gaussian_moment(j, a) * gaussian_moment(beta - j + m, a));
    den += c * gaussian_moment(j, a) * gaussian_moment(beta - j, a);
  }
  return num / den;
}

}  // namespace oracle
