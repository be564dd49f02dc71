#pragma once

// Jets in (x, t) of the pole data and the fields built from it.  Shared by
// the poles and lax modules.

#include <vector>

#include "pblab/jet.hpp"
#include "pblab/poles.hpp"

namespace pblab::detail {

template <int NX, int NT>
struct PoleJets {
  using J = Jet<NX, NT>;
  int kappa = 1;
  J x, t;
  std::vector<J> Q, Qd;
  J U;
  J g;  ///< integral of (t^2/2 + U)/kappa from the expansion time

  J R(int k) const {
    J r;
    for (int j = 0; j < kappa; ++j)
      if (j != k) r += 1.0 / (Q[k] - Q[j]);
    return r;
  }
};

/// Needs series.q up to order NT + 1 and series.u up to order NT.
template <int NX, int NT>
PoleJets<NX, NT> pole_jets(const PoleSeries& s, cplx x0) {
  using J = Jet<NX, NT>;
  PoleJets<NX, NT> pj;
  pj.kappa = s.kappa;
  pj.x = J::x_variable(x0);
  pj.t = J::t_variable(s.t0);
  pj.Q.resize(s.kappa);
  pj.Qd.resize(s.kappa);
  for (int k = 0; k < s.kappa; ++k)
    for (int b = 0; b <= NT; ++b) {
      pj.Q[k](0, b) = s.q[k][b];
      pj.Qd[k](0, b) = double(b + 1) * s.q[k][b + 1];
    }
  for (int b = 0; b <= NT; ++b) pj.U(0, b) = s.u[b];
  // (t^2/2 + U)/kappa as a series in s = t - t0, then integrate
  for (int b = 1; b <= NT; ++b) {
    cplx c = s.u[b - 1];
    if (b - 1 == 0) c += s.t0 * s.t0 / 2;
    if (b - 1 == 1) c += s.t0;
    if (b - 1 == 2) c += 0.5;
    pj.g(0, b) = c / (double(s.kappa) * b);
  }
  return pj;
}

template <int NX, int NT>
struct FieldJets {
  using J = Jet<NX, NT>;
  J P, b, V, Y, v;
};

template <int NX, int NT>
FieldJets<NX, NT> field_jets(const PoleJets<NX, NT>& pj) {
  using J = Jet<NX, NT>;
  const double kappa = pj.kappa;
  FieldJets<NX, NT> f;
  f.v = pj.t - pj.x * pj.x;
  J sum_b, sum_q, pole2, simple_v;
  f.Y = exp(pj.g);
  for (int k = 0; k < pj.kappa; ++k) {
    const J inv = 1.0 / (pj.x - pj.Q[k]);
    const J Rk = pj.R(k);
    f.P += inv;
    sum_b += (kappa * pj.Qd[k] + pj.t - pj.Q[k] * pj.Q[k] - 2.0 * Rk) * inv;
    sum_q += pj.Q[k];
    pole2 += inv * inv;
    simple_v += (kappa * pj.Qd[k] - Rk) * inv;
    f.Y *= pj.x - pj.Q[k];
  }
  f.b = 0.5 * (sum_b - sum_q - (0.5 * pj.t * pj.t + pj.U));
  f.V = 0.75 * pole2 + 0.5 * simple_v - 0.5 * pj.U + 0.5 * (kappa - 2) * pj.x -
        0.5 * pj.t * pj.x * pj.x + 0.25 * ipow(pj.x, 4);
  return f;
}

}  // namespace pblab::detail
