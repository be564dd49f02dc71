#include "pblab/poles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pblab/detail/pole_jets.hpp"
#include "pblab/io.hpp"

namespace pblab {

void PoleState::validate(double collision_eps) const {
  require(kappa >= 1, "kappa must be a positive integer");
  require(int(Q.size()) == kappa && int(Qdot.size()) == kappa, "PoleState needs kappa positions and velocities");
  if (min_separation() <= collision_eps)
    throw CollisionError("pole separation below collision_eps", t);
}

cplx PoleState::R(int k) const {
  cplx r{};
  for (int j = 0; j < kappa; ++j)
    if (j != k) r += 1.0 / (Q[k] - Q[j]);
  return r;
}

double PoleState::min_separation() const {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kappa; ++k)
    for (int j = k + 1; j < kappa; ++j) d = std::min(d, std::abs(Q[k] - Q[j]));
  return d;
}

PoleRates poles_rhs(const PoleState& s, double collision_eps) {
  s.validate(collision_eps);
  const double kappa = s.kappa;
  PoleRates r;
  r.Qdot = s.Qdot;
  r.Qddot.resize(s.kappa);
  for (int k = 0; k < s.kappa; ++k) {
    const cplx q = s.Q[k];
    cplx f = -2.0 * q * (s.t - q * q) + (kappa - 2);
    for (int j = 0; j < s.kappa; ++j)
      if (j != k) f -= 8.0 / ipow(q - s.Q[j], 3);
    r.Qddot[k] = f / (kappa * kappa);
    r.Udot -= q * q / kappa;
  }
  return r;
}

std::vector<cplx> first_integrals(const PoleState& s) {
  s.validate(0.0);
  const double kappa = s.kappa;
  std::vector<cplx> I(s.kappa);
  for (int k = 0; k < s.kappa; ++k) {
    const cplx q = s.Q[k], p = kappa * s.Qdot[k];
    cplx e = p * p / 2.0 + s.t * q * q - q * q * q * q / 2.0 - (kappa - 2) * q + s.U;
    for (int j = 0; j < s.kappa; ++j) {
      if (j == k) continue;
      const cplx d = q - s.Q[j];
      e -= 2.0 / (d * d) + kappa * (s.Qdot[k] + s.Qdot[j]) / d;
      for (int l = 0; l < s.kappa; ++l)
        if (l != k && l != j) e += 2.0 / (d * (s.Q[j] - s.Q[l]));
    }
    I[k] = e;
  }
  return I;
}

PoleState admissible_state(int kappa, double t, const std::vector<cplx>& Q, cplx qdot_first,
                           cplx guess_qdot, cplx guess_U) {
  require(kappa >= 1 && int(Q.size()) == kappa, "admissible_state needs kappa positions");
  PoleState s;
  s.kappa = kappa;
  s.t = t;
  s.Q = Q;
  s.Qdot.assign(kappa, guess_qdot);
  s.Qdot[0] = qdot_first;
  s.U = guess_U;
  s.validate();

  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  auto residual = [&](const PoleState& st) {
    const auto I = first_integrals(st);
    return Vec(Eigen::Map<const Vec>(I.data(), kappa));
  };
  // unknowns: Qdot_2..kappa, then U
  Vec r = residual(s);
  for (int iter = 0; iter < 100; ++iter) {
    if (r.cwiseAbs().maxCoeff() <= 1e-13 * (1 + std::abs(s.U))) return s;
    Mat Jm = Mat::Zero(kappa, kappa);
    for (int k = 0; k < kappa; ++k) {
      for (int m = 1; m < kappa; ++m)
        Jm(k, m - 1) = (m == k) ? double(kappa * kappa) * s.Qdot[k] - double(kappa) * s.R(k)
                                : -double(kappa) / (s.Q[k] - s.Q[m]);
      Jm(k, kappa - 1) = 1.0;
    }
    const Vec step = Jm.partialPivLu().solve(-r);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    const double r0 = r.norm();
    for (int ls = 0; ls < 30; ++ls, lambda /= 2) {
      PoleState trial = s;
      for (int m = 1; m < kappa; ++m) trial.Qdot[m] += lambda * step(m - 1);
      trial.U += lambda * step(kappa - 1);
      const Vec rt = residual(trial);
      if (rt.norm() < (1 - 1e-4 * lambda) * r0 || ls == 29) {
        s = trial;
        r = rt;
        break;
      }
    }
  }
  throw NumericalError("admissible_state: Newton iteration did not converge (|I| = " +
                       fmt17(r.cwiseAbs().maxCoeff()) + ")");
}

PoleState demo_initial_state(int kappa, double t) {
  require(kappa >= 1, "kappa must be a positive integer");
  std::vector<cplx> Q(kappa);
  for (int k = 0; k < kappa; ++k) {
    const double th = 2 * kPi * k / kappa + 0.3;
    Q[k] = cplx{0.0, 1.2} + (kappa == 1 ? 0.0 : 0.7) * std::polar(1.0, th);
  }
  return admissible_state(kappa, t, Q, cplx{0.1, 0.0});
}

namespace {

CVec pack(const PoleState& s) {
  CVec y;
  y.reserve(2 * s.kappa + 1);
  y.insert(y.end(), s.Q.begin(), s.Q.end());
  y.insert(y.end(), s.Qdot.begin(), s.Qdot.end());
  y.push_back(s.U);
  return y;
}

void unpack(const CVec& y, double t, PoleState& s) {
  s.t = t;
  std::copy(y.begin(), y.begin() + s.kappa, s.Q.begin());
  std::copy(y.begin() + s.kappa, y.begin() + 2 * s.kappa, s.Qdot.begin());
  s.U = y[2 * s.kappa];
}

OdeRhs make_rhs(int kappa, double collision_eps) {
  return [kappa, collision_eps](double t, const CVec& y, CVec& dy) {
    PoleState s;
    s.kappa = kappa;
    s.Q.resize(kappa);
    s.Qdot.resize(kappa);
    unpack(y, t, s);
    const PoleRates r = poles_rhs(s, collision_eps);
    dy.resize(y.size());
    std::copy(r.Qdot.begin(), r.Qdot.end(), dy.begin());
    std::copy(r.Qddot.begin(), r.Qddot.end(), dy.begin() + kappa);
    dy[2 * kappa] = r.Udot;
  };
}

}  // namespace

Trajectory integrate_poles(const PoleState& initial, double t_final, double tol,
                           const PoleIntegrateOptions& options) {
  initial.validate(options.collision_eps);
  require(tol > 0, "tol must be positive");
  require(options.output_step > 0, "output_step must be positive");
  OdeOptions o;
  o.rtol = o.atol = tol;
  Dop853 solver(make_rhs(initial.kappa, options.collision_eps), o);
  Trajectory traj;
  traj.tol = tol;
  traj.states.push_back(initial);
  const double dir = t_final >= initial.t ? 1.0 : -1.0;
  double t = initial.t;
  CVec y = pack(initial);
  PoleState s = initial;
  for (long m = 1; dir * (t_final - t) > 0; ++m) {
    double target = initial.t + dir * m * options.output_step;
    if (dir * (target - t_final) > -1e-12 * options.output_step) target = t_final;
    solver.integrate(t, y, target);
    unpack(y, t, s);
    traj.states.push_back(s);
  }
  traj.stats = solver.stats();
  return traj;
}

PoleState advance(const PoleState& state, double t_final, double tol, double collision_eps) {
  state.validate(collision_eps);
  OdeOptions o;
  o.rtol = o.atol = tol;
  Dop853 solver(make_rhs(state.kappa, collision_eps), o);
  double t = state.t;
  CVec y = pack(state);
  solver.integrate(t, y, t_final);
  PoleState s = state;
  unpack(y, t, s);
  return s;
}

PoleSeries pole_series(const PoleState& state, int order) {
  constexpr int kMax = 8;
  require(order >= 1 && order <= kMax, "pole_series order must be in 1..8");
  state.validate(0.0);
  using S = Jet<0, kMax>;
  const int K = state.kappa;
  const double kappa = K;
  PoleSeries ps;
  ps.kappa = K;
  ps.t0 = state.t;
  ps.q.assign(K, std::vector<cplx>(order + 1));
  ps.u.assign(order + 1, cplx{});
  for (int k = 0; k < K; ++k) {
    ps.q[k][0] = state.Q[k];
    ps.q[k][1] = state.Qdot[k];
  }
  ps.u[0] = state.U;
  const S t = S::t_variable(state.t);
  for (int n = 0; n < order; ++n) {
    std::vector<S> Q(K);
    for (int k = 0; k < K; ++k)
      for (int b = 0; b <= order; ++b) Q[k](0, b) = ps.q[k][b];
    S udot;
    for (int k = 0; k < K; ++k) {
      S f = -2.0 * Q[k] * (t - Q[k] * Q[k]) + (kappa - 2);
      for (int j = 0; j < K; ++j)
        if (j != k) f -= 8.0 / ipow(Q[k] - Q[j], 3);
      if (n + 2 <= order) ps.q[k][n + 2] = f(0, n) / (kappa * kappa * (n + 1) * (n + 2));
      udot -= Q[k] * Q[k] / kappa;
    }
    ps.u[n + 1] = udot(0, n) / double(n + 1);
  }
  return ps;
}

FieldEval eval_fields(const PoleState& state, cplx x) {
  state.validate(0.0);
  for (const cplx& q : state.Q)
    if (std::abs(x - q) == 0.0) throw ConditioningError("eval_fields: x coincides with a pole");
  const double kappa = state.kappa;
  FieldEval e;
  e.x = x;
  e.t = state.t;
  cplx sum_b{}, sum_q{}, pole2{}, simple{};
  for (int k = 0; k < state.kappa; ++k) {
    const cplx inv = 1.0 / (x - state.Q[k]);
    const cplx Rk = state.R(k), q = state.Q[k];
    e.P += inv;
    sum_b += (kappa * state.Qdot[k] + state.t - q * q - 2.0 * Rk) * inv;
    sum_q += q;
    pole2 += inv * inv;
    simple += (kappa * state.Qdot[k] - Rk) * inv;
  }
  e.b_plus = -e.P / kappa;
  e.b_one = (sum_b - sum_q - (state.t * state.t / 2 + state.U)) / (2 * kappa);
  e.b = kappa * e.b_one;
  e.V = 0.75 * pole2 + 0.5 * simple - 0.5 * state.U + 0.5 * (kappa - 2) * x - 0.5 * state.t * x * x +
        0.25 * ipow(x, 4);
  return e;
}

cplx potential_from_definition(const PoleState& state, cplx x) {
  const FieldEval e = eval_fields(state, x);
  cplx Px{};
  for (const cplx& q : state.Q) Px -= 1.0 / ((x - q) * (x - q));
  const cplx w = e.P - e.v();
  return e.b + w * w / 4.0 - (Px + 2.0 * x) / 2.0;
}

namespace {

void check_margin(const PoleState& s, cplx x, double margin) {
  for (const cplx& q : s.Q)
    if (std::abs(x - q) < margin)
      throw ConditioningError("grid point within pole_margin of a pole at t = " + fmt17(s.t));
}

/// Partial derivatives of Y entering the bilinear equation.
struct YDerivs {
  cplx Y, Yx, Yxx, Yxxx, Yxxxx, Yt, Ytx, Ytxx, Ytt;
};

cplx hirota_expression(const YDerivs& d, double kappa, double t, cplx x) {
  const cplx DY = kappa * d.Yt + d.Yxx;
  const cplx DYx = kappa * d.Ytx + d.Yxxx;
  const cplx DYxx = kappa * d.Ytxx + d.Yxxxx;
  const cplx DYt = kappa * d.Ytt + d.Ytxx;
  const cplx DDY = kappa * DYt + DYxx;
  const cplx v = t - x * x;
  const cplx f = -(kappa - 2) * x - v * v / 2.0;
  const cplx ft = -v;
  const cplx fx = -(kappa - 2) + 2.0 * x * v;
  return d.Y * DDY - DY * DY - 2.0 * d.Yx * DYx + 2.0 * d.Yxx * DY + d.Y * (kappa * ft * d.Y + fx * d.Yx) +
         2.0 * f * (d.Y * d.Yxx - d.Yx * d.Yx);
}

template <int NX, int NT>
YDerivs yderivs_from_jet(const Jet<NX, NT>& Y) {
  YDerivs d;
  d.Y = Y.derivative(0, 0);
  d.Yx = Y.derivative(1, 0);
  d.Yxx = Y.derivative(2, 0);
  d.Yxxx = Y.derivative(3, 0);
  d.Yxxxx = Y.derivative(4, 0);
  d.Yt = Y.derivative(0, 1);
  d.Ytx = Y.derivative(1, 1);
  d.Ytxx = Y.derivative(2, 1);
  d.Ytt = Y.derivative(0, 2);
  return d;
}

struct Neighbours {
  PoleState minus, plus;
};

Neighbours neighbours(const PoleState& s, double h) {
  return {advance(s, s.t - h, 1e-13), advance(s, s.t + h, 1e-13)};
}

detail::FieldJets<3, 0> static_fields(const PoleState& s, cplx x) {
  return detail::field_jets(detail::pole_jets<3, 0>(pole_series(s, 1), x));
}

double governing_at(const PoleState& s, const std::vector<cplx>& x_grid, const ResidualOptions& o) {
  const double kappa = s.kappa;
  double worst = 0;
  std::optional<Neighbours> nb;
  std::optional<PoleSeries> ps;
  if (o.mode == TimeDerivative::Analytic)
    ps = pole_series(s, 2);
  else
    nb = neighbours(s, o.fd_step);
  for (const cplx& x : x_grid) {
    check_margin(s, x, o.pole_margin);
    cplx r1, r2;
    if (ps) {
      using J = Jet<3, 1>;
      const auto pj = detail::pole_jets<3, 1>(*ps, x);
      const auto f = detail::field_jets(pj);
      const J Px = f.P.dx();
      if (o.form == GoverningForm::PB) {
        r1 = (kappa * (f.P - f.v).dt() + (Px + f.P * (f.P - f.v) + 2.0 * f.b).dx()).value();
        r2 = (kappa * f.b.dt() + f.b.dx().dx() + f.v * f.b.dx() + 2.0 * f.b * Px).value();
      } else {
        r1 = (kappa * f.V.dt() + f.P * f.V.dx() + 2.0 * f.V * Px - 0.5 * Px.dx().dx()).value();
        r2 = (kappa * f.P.dt() + 2.0 * Px.dx() + f.P * Px + 2.0 * pj.x * f.v - (kappa - 2) + 2.0 * f.V.dx())
                 .value();
      }
    } else {
      check_margin(nb->minus, x, o.pole_margin);
      check_margin(nb->plus, x, o.pole_margin);
      const auto f = static_fields(s, x), fm = static_fields(nb->minus, x), fp = static_fields(nb->plus, x);
      const double h2 = 2 * o.fd_step;
      const auto Px = f.P.dx();
      if (o.form == GoverningForm::PB) {
        const cplx Pt = (fp.P.value() - fm.P.value()) / h2, bt = (fp.b.value() - fm.b.value()) / h2;
        r1 = kappa * (Pt - 1.0) + (Px + f.P * (f.P - f.v) + 2.0 * f.b).dx().value();
        r2 = kappa * bt + (f.b.dx().dx() + f.v * f.b.dx() + 2.0 * f.b * Px).value();
      } else {
        const cplx Pt = (fp.P.value() - fm.P.value()) / h2, Vt = (fp.V.value() - fm.V.value()) / h2;
        r1 = kappa * Vt + (f.P * f.V.dx() + 2.0 * f.V * Px - 0.5 * Px.dx().dx()).value();
        r2 = kappa * Pt + (2.0 * Px.dx() + f.P * Px + 2.0 * f.V.dx()).value() + 2.0 * x * (s.t - x * x) -
             (kappa - 2);
      }
    }
    worst = std::max({worst, std::abs(r1), std::abs(r2)});
  }
  return worst;
}

/// Bare product prod (x - Q_k) and its x-derivatives up to order 4.
Jet<4, 0> bare_product(const PoleState& s, cplx x) {
  Jet<4, 0> Y(1.0);
  const auto X = Jet<4, 0>::x_variable(x);
  for (const cplx& q : s.Q) Y *= X - q;
  return Y;
}

double hirota_at(const PoleState& s, const std::vector<cplx>& x_grid, cplx scale, const ResidualOptions& o) {
  const double kappa = s.kappa;
  double worst = 0;
  std::optional<Neighbours> nb;
  std::optional<PoleSeries> ps;
  if (o.mode == TimeDerivative::Analytic)
    ps = pole_series(s, 3);
  else
    nb = neighbours(s, o.fd_step);
  for (const cplx& x : x_grid) {
    check_margin(s, x, o.pole_margin);
    cplx r;
    if (ps) {
      const auto f = detail::field_jets(detail::pole_jets<4, 2>(*ps, x));
      r = hirota_expression(yderivs_from_jet(f.Y * scale), kappa, s.t, x);
    } else {
      // Bare product with finite differences in t, plus the gauge terms
      // -kappa c' Y^2 - 2c (Y Y_xx - Y_x^2), c = -(t^2/2 + U).
      const double h = o.fd_step;
      const Jet<4, 0> Y = bare_product(s, x) * scale, Ym = bare_product(nb->minus, x) * scale,
                      Yp = bare_product(nb->plus, x) * scale;
      YDerivs d = yderivs_from_jet(Y);
      d.Yt = (Yp.derivative(0, 0) - Ym.derivative(0, 0)) / (2 * h);
      d.Ytx = (Yp.derivative(1, 0) - Ym.derivative(1, 0)) / (2 * h);
      d.Ytxx = (Yp.derivative(2, 0) - Ym.derivative(2, 0)) / (2 * h);
      d.Ytt = (Yp.derivative(0, 0) - 2.0 * d.Y + Ym.derivative(0, 0)) / (h * h);
      const cplx c = -(s.t * s.t / 2 + s.U);
      const cplx cdot = -(s.t + poles_rhs(s, 0.0).Udot);
      r = hirota_expression(d, kappa, s.t, x) - kappa * cdot * d.Y * d.Y - 2.0 * c * (d.Y * d.Yxx - d.Yx * d.Yx);
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace

std::vector<cplx> pole_free_grid(const Trajectory& traj, const std::vector<cplx>& candidates, double margin) {
  std::vector<cplx> out;
  for (const cplx& x : candidates) {
    bool ok = true;
    for (const PoleState& s : traj.states)
      for (const cplx& q : s.Q) ok = ok && std::abs(x - q) >= margin;
    if (ok) out.push_back(x);
  }
  return out;
}

std::vector<cplx> default_grid(const Trajectory& traj, double margin) {
  std::vector<cplx> c;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) c.emplace_back(-2 + 0.5 * i, -2 + 0.5 * j);
  return pole_free_grid(traj, c, margin);
}

double governing_residual(const Trajectory& traj, const std::vector<cplx>& x_grid, const ResidualOptions& options) {
  require(options.fd_step > 0, "fd_step must be positive");
  double worst = 0;
  for (const PoleState& s : traj.states) worst = std::max(worst, governing_at(s, x_grid, options));
  return worst;
}

double hirota_residual(const Trajectory& traj, const std::vector<cplx>& x_grid, const ResidualOptions& options) {
  return hirota_residual_scaled(traj, x_grid, 1.0, options);
}

double hirota_residual_scaled(const Trajectory& traj, const std::vector<cplx>& x_grid, cplx scale,
                              const ResidualOptions& options) {
  require(options.fd_step > 0, "fd_step must be positive");
  double worst = 0;
  for (const PoleState& s : traj.states) worst = std::max(worst, hirota_at(s, x_grid, scale, options));
  return worst;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.states.empty()) return;
  const int K = traj.states.front().kappa;
  out << 't';
  for (int k = 1; k <= K; ++k) out << ",re_Q" << k << ",im_Q" << k;
  for (int k = 1; k <= K; ++k) out << ",re_Qdot" << k << ",im_Qdot" << k;
  out << ",re_U,im_U\n";
  for (const PoleState& s : traj.states) {
    out << fmt17(s.t);
    for (const cplx& q : s.Q) out << ',' << fmt17(q.real()) << ',' << fmt17(q.imag());
    for (const cplx& p : s.Qdot) out << ',' << fmt17(p.real()) << ',' << fmt17(p.imag());
    out << ',' << fmt17(s.U.real()) << ',' << fmt17(s.U.imag()) << '\n';
  }
}

}  // namespace pblab
