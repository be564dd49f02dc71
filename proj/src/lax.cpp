#include "pblab/lax.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pblab/detail/pole_jets.hpp"
#include "pblab/dop853.hpp"
#include "pblab/io.hpp"

namespace pblab {

double Matrix2::frobenius() const {
  return std::sqrt(std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22));
}

Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22, a.a21 * b.a11 + a.a22 * b.a21,
          a.a21 * b.a12 + a.a22 * b.a22};
}
Matrix2 operator*(cplx s, const Matrix2& a) { return {s * a.a11, s * a.a12, s * a.a21, s * a.a22}; }

namespace {

template <int NX, int NT>
struct LaxJets {
  using J = Jet<NX, NT>;
  J L11, L12, L21, L22, B11, B12, B21, B22;
  J Ld, Bd;
};

/// Ld_t overrides d_t L_d inside B_21 (used by the finite-difference mode).
template <int NX, int NT>
LaxJets<NX, NT> lax_jets(const detail::PoleJets<NX, NT>& pj, FvConvention fv, const Jet<NX, NT>* Ld_t = nullptr) {
  using J = Jet<NX, NT>;
  const int K = pj.kappa;
  const double kappa = K;
  const J& x = pj.x;
  const J& t = pj.t;
  J Y(1.0), S;
  std::vector<J> others(K, J(1.0));  // prod_{j != k} (x - Q_j)
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j)
      if (j != k) others[k] *= x - pj.Q[j];
    Y *= x - pj.Q[k];
    S += others[k];
  }
  LaxJets<NX, NT> r;
  J kBd;
  for (int k = 0; k < K; ++k) {
    J Yp(1.0);  // prod_{j != k} (Q_k - Q_j)
    for (int j = 0; j < K; ++j)
      if (j != k) Yp *= pj.Q[k] - pj.Q[j];
    const J c = kappa * pj.Qd[k] - 2.0 * pj.R(k);
    r.Ld -= c * others[k] / Yp;
    kBd += c / (x - pj.Q[k]) * (S / Yp - 1.0);
  }
  r.Bd = kBd / kappa;
  const J v = t - x * x;
  const J fv_jet = fv == FvConvention::Consistent
                       ? -0.5 * ipow(x, 4) + t * x * x - (kappa - 2) * x + pj.U
                       : -0.5 * ipow(x, 4) - t * x * x + (kappa - 2) * x - pj.U;
  const J Yx = S;
  r.L11 = 0.5 * (-v + r.Ld);
  r.L22 = 0.5 * (-v - r.Ld);
  r.L12 = Y;
  r.L21 = -(kBd + r.Ld.dx() + 0.5 * r.Ld * r.Ld + fv_jet) / (2.0 * Y);
  const J diag = -x + (pj.U + 0.5 * t * t) / kappa;
  r.B11 = 0.5 * (diag + r.Bd);
  r.B22 = 0.5 * (diag - r.Bd);
  r.B12 = -Yx / kappa;
  const J Ldt = Ld_t ? *Ld_t : r.Ld.dt();
  r.B21 = -(2.0 * r.L21 * Yx + kappa * Ldt - kappa * r.Bd.dx()) / (2.0 * kappa * Y);
  return r;
}

template <int NX, int NT>
Matrix2 value_L(const LaxJets<NX, NT>& j) {
  return {j.L11.value(), j.L12.value(), j.L21.value(), j.L22.value()};
}
template <int NX, int NT>
Matrix2 value_B(const LaxJets<NX, NT>& j) {
  return {j.B11.value(), j.B12.value(), j.B21.value(), j.B22.value()};
}

void check_margin(const PoleState& s, cplx x, double margin) {
  for (const cplx& q : s.Q)
    if (std::abs(x - q) < margin) throw ConditioningError("evaluation point within pole_margin of a pole");
}

LaxJets<1, 1> point_jets(const PoleState& s, cplx x, FvConvention fv) {
  for (const cplx& q : s.Q)
    if (x == q) throw ConditioningError("Lax matrices evaluated at a pole");
  return lax_jets(detail::pole_jets<1, 1>(pole_series(s, 2), x), fv);
}

}  // namespace

Matrix2 eval_L(const PoleState& state, cplx x, FvConvention fv) { return value_L(point_jets(state, x, fv)); }
Matrix2 eval_B(const PoleState& state, cplx x, FvConvention fv) { return value_B(point_jets(state, x, fv)); }
cplx lax_Ld(const PoleState& state, cplx x) { return point_jets(state, x, FvConvention::Consistent).Ld.value(); }
cplx lax_Bd(const PoleState& state, cplx x) { return point_jets(state, x, FvConvention::Consistent).Bd.value(); }

namespace {

double zero_curvature_at(const PoleState& s, const std::vector<cplx>& x_grid, const LaxOptions& o) {
  double worst = 0;
  if (o.mode == TimeDerivative::Analytic) {
    const PoleSeries ps = pole_series(s, 3);
    for (const cplx& x : x_grid) {
      check_margin(s, x, o.pole_margin);
      const auto j = lax_jets(detail::pole_jets<2, 1>(ps, x), o.fv);
      const Matrix2 Lt{j.L11.dt().value(), j.L12.dt().value(), j.L21.dt().value(), j.L22.dt().value()};
      const Matrix2 Bx{j.B11.dx().value(), j.B12.dx().value(), j.B21.dx().value(), j.B22.dx().value()};
      const Matrix2 L = value_L(j), B = value_B(j);
      worst = std::max(worst, (Lt - Bx + L * B - B * L).frobenius());
    }
    return worst;
  }
  const double h = o.fd_step;
  const PoleState sm = advance(s, s.t - h, 1e-13), sp = advance(s, s.t + h, 1e-13);
  const PoleSeries ps = pole_series(s, 1), psm = pole_series(sm, 1), psp = pole_series(sp, 1);
  for (const cplx& x : x_grid) {
    check_margin(s, x, o.pole_margin);
    using J = Jet<2, 0>;
    const auto jm = lax_jets(detail::pole_jets<2, 0>(psm, x), o.fv, static_cast<const J*>(nullptr));
    const auto jp = lax_jets(detail::pole_jets<2, 0>(psp, x), o.fv, static_cast<const J*>(nullptr));
    const J Ldt = (jp.Ld - jm.Ld) / (2 * h);
    const auto j = lax_jets(detail::pole_jets<2, 0>(ps, x), o.fv, &Ldt);
    const Matrix2 Lt = (1.0 / (2 * h)) * (value_L(jp) - value_L(jm));
    const Matrix2 Bx{j.B11.dx().value(), j.B12.dx().value(), j.B21.dx().value(), j.B22.dx().value()};
    const Matrix2 L = value_L(j), B = value_B(j);
    worst = std::max(worst, (Lt - Bx + L * B - B * L).frobenius());
  }
  return worst;
}

}  // namespace

double zero_curvature_residual(const Trajectory& traj, const std::vector<cplx>& x_grid, const LaxOptions& options) {
  require(options.fd_step > 0, "fd_step must be positive");
  double worst = 0;
  for (const PoleState& s : traj.states) worst = std::max(worst, zero_curvature_at(s, x_grid, options));
  return worst;
}

namespace {

double segment_distance(cplx a, cplx b, cplx q) {
  const cplx d = b - a;
  const double n2 = std::norm(d);
  double u = n2 > 0 ? ((q - a) * std::conj(d)).real() / n2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(a + u * d - q);
}

}  // namespace

LinSolution reconstruct_F(const PoleState& state, const std::vector<cplx>& x_grid, std::array<cplx, 2> init,
                          double tol, double pole_margin) {
  state.validate();
  require(!x_grid.empty(), "x_grid must not be empty");
  require(init[0] != cplx{} || init[1] != cplx{}, "init must be nonzero");
  for (std::size_t i = 0; i + 1 < x_grid.size(); ++i)
    for (const cplx& q : state.Q)
      if (segment_distance(x_grid[i], x_grid[i + 1], q) < pole_margin)
        throw ConditioningError("reconstruct_F: segment " + std::to_string(i) +
                                " passes within pole_margin of a pole; use detour_path");
  const PoleSeries ps = pole_series(state, 2);
  auto rhs = [&](cplx x, const CVec& y, CVec& dy) {
    const Matrix2 L = value_L(lax_jets(detail::pole_jets<1, 1>(ps, x), FvConvention::Consistent));
    dy.resize(2);
    dy[0] = L.a11 * y[0] + L.a12 * y[1];
    dy[1] = L.a21 * y[0] + L.a22 * y[1];
  };
  OdeOptions o;
  o.rtol = o.atol = tol;
  LinSolution sol;
  sol.x_grid = x_grid;
  sol.t = state.t;
  sol.state = state;
  CVec y{init[0], init[1]};
  sol.values.push_back(init);
  for (std::size_t i = 0; i + 1 < x_grid.size(); ++i) {
    y = integrate_segment(rhs, x_grid[i], x_grid[i + 1], y, o);
    sol.values.push_back({y[0], y[1]});
  }
  return sol;
}

std::vector<cplx> detour_path(const PoleState& state, cplx a, cplx b, double margin) {
  require(margin > 0, "margin must be positive");
  for (const cplx& q : state.Q)
    if (std::abs(a - q) < margin || std::abs(b - q) < margin)
      throw ConditioningError("detour_path: endpoint within margin of a pole");
  std::vector<cplx> path{a, b};
  for (int pass = 0; pass < 64; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i + 1 < path.size() && !changed; ++i)
      for (const cplx& q : state.Q) {
        if (segment_distance(path[i], path[i + 1], q) >= margin) continue;
        const cplx d = path[i + 1] - path[i];
        const cplx n = cplx{0, 1} * d / std::abs(d);  // left normal
        // two corners of a box around the pole on the left side
        const cplx along = d / std::abs(d);
        path.insert(path.begin() + i + 1, {q - 2 * margin * along + 2 * margin * n, q + 2 * margin * along + 2 * margin * n});
        changed = true;
        break;
      }
    if (!changed) return path;
  }
  throw ConditioningError("detour_path: could not clear the poles");
}

namespace {

struct Derivs {
  cplx F, Fx, Fxx, a, c;  ///< F'' + a F' + c F = 0
};

Derivs separated_derivs(const PoleState& s, const PoleSeries& ps, cplx x, std::array<cplx, 2> fg) {
  const auto j = lax_jets(detail::pole_jets<1, 1>(ps, x), FvConvention::Consistent);
  const Matrix2 L = value_L(j);
  const cplx F = fg[0], G = fg[1];
  const cplx Fx = L.a11 * F + L.a12 * G;
  const cplx Gx = L.a21 * F + L.a22 * G;
  const cplx Fxx = j.L11.dx().value() * F + L.a11 * Fx + j.L12.dx().value() * G + L.a12 * Gx;
  const FieldEval e = eval_fields(s, x);
  return {F, Fx, Fxx, s.t - x * x + double(s.kappa) * e.b_plus, -double(s.kappa) * e.b_one};
}

}  // namespace

double separated_ode_residual(const LinSolution& sol) {
  const PoleSeries ps = pole_series(sol.state, 2);
  double worst = 0;
  for (std::size_t i = 0; i < sol.x_grid.size(); ++i) {
    const Derivs d = separated_derivs(sol.state, ps, sol.x_grid[i], sol.values[i]);
    const double scale = std::abs(d.Fxx) + std::abs(d.a * d.Fx) + std::abs(d.c * d.F);
    if (scale == 0) continue;
    worst = std::max(worst, std::abs(d.Fxx + d.a * d.Fx + d.c * d.F) / scale);
  }
  return worst;
}

TimeCheck time_evolution_check(const PoleState& state, const std::vector<cplx>& x_grid, std::array<cplx, 2> init,
                               double h, double tol) {
  require(h > 0, "h must be positive");
  require(!x_grid.empty(), "x_grid must not be empty");
  const int K = state.kappa;
  const cplx x0 = x_grid.front();
  // poles and (F, G) at x0 evolved together in t
  auto rhs = [K, x0](double t, const CVec& y, CVec& dy) {
    PoleState s;
    s.kappa = K;
    s.t = t;
    s.Q.assign(y.begin(), y.begin() + K);
    s.Qdot.assign(y.begin() + K, y.begin() + 2 * K);
    s.U = y[2 * K];
    const PoleRates r = poles_rhs(s);
    const Matrix2 B = eval_B(s, x0);
    dy.resize(y.size());
    std::copy(r.Qdot.begin(), r.Qdot.end(), dy.begin());
    std::copy(r.Qddot.begin(), r.Qddot.end(), dy.begin() + K);
    dy[2 * K] = r.Udot;
    dy[2 * K + 1] = B.a11 * y[2 * K + 1] + B.a12 * y[2 * K + 2];
    dy[2 * K + 2] = B.a21 * y[2 * K + 1] + B.a22 * y[2 * K + 2];
  };
  auto evolve = [&](double t1) {
    CVec y(state.Q);
    y.insert(y.end(), state.Qdot.begin(), state.Qdot.end());
    y.push_back(state.U);
    y.push_back(init[0]);
    y.push_back(init[1]);
    OdeOptions o;
    o.rtol = o.atol = tol;
    Dop853 solver(rhs, o);
    double t = state.t;
    solver.integrate(t, y, t1);
    PoleState s = state;
    s.t = t;
    std::copy(y.begin(), y.begin() + K, s.Q.begin());
    std::copy(y.begin() + K, y.begin() + 2 * K, s.Qdot.begin());
    s.U = y[2 * K];
    return reconstruct_F(s, x_grid, {y[2 * K + 1], y[2 * K + 2]}, tol);
  };
  const LinSolution minus = evolve(state.t - h), plus = evolve(state.t + h);
  const LinSolution mid = reconstruct_F(state, x_grid, init, tol);
  const PoleSeries ps = pole_series(state, 2);
  double scale = 0;
  for (const auto& v : mid.values) scale = std::max(scale, std::abs(v[0]));
  TimeCheck out;
  const double kappa = K;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const cplx x = x_grid[i];
    const Derivs d = separated_derivs(state, ps, x, mid.values[i]);
    const cplx Ft = (plus.values[i][0] - minus.values[i][0]) / (2 * h);
    const FieldEval e = eval_fields(state, x);
    out.qpii = std::max(out.qpii, std::abs(kappa * Ft + d.Fxx + (state.t - x * x) * d.Fx) / scale);
    out.first_order = std::max(out.first_order, std::abs(Ft - e.b_plus * d.Fx + e.b_one * d.F) / scale);
  }
  return out;
}

std::vector<cplx> schrodinger_gauge(const LinSolution& sol) {
  std::vector<cplx> psi;
  cplx prev_root{};
  for (std::size_t i = 0; i < sol.x_grid.size(); ++i) {
    const cplx x = sol.x_grid[i];
    cplx Y = 1.0;
    for (const cplx& q : sol.state.Q) Y *= x - q;
    cplx root = std::sqrt(Y);
    if (i > 0 && std::abs(root + prev_root) < std::abs(root - prev_root)) root = -root;
    prev_root = root;
    psi.push_back(sol.values[i][0] / root * std::exp(0.5 * (sol.t * x - x * x * x / 3.0)));
  }
  return psi;
}

double schrodinger_residual(const LinSolution& sol) {
  // Psi = F w with w'/w = a/2, so Psi'' - V Psi = (F'' + a F' + (a'/2 + a^2/4 - V) F) w.
  const PoleSeries ps = pole_series(sol.state, 2);
  const std::vector<cplx> psi = schrodinger_gauge(sol);
  double worst = 0;
  for (std::size_t i = 0; i < sol.x_grid.size(); ++i) {
    const cplx x = sol.x_grid[i];
    const Derivs d = separated_derivs(sol.state, ps, x, sol.values[i]);
    cplx Px{};
    for (const cplx& q : sol.state.Q) Px -= 1.0 / ((x - q) * (x - q));
    const cplx ax = -2.0 * x - Px;  // a = t - x^2 - P
    const cplx V = eval_fields(sol.state, x).V;
    const cplx w = psi[i] / d.F;
    const cplx psi_xx = (d.Fxx + d.a * d.Fx + (ax / 2.0 + d.a * d.a / 4.0) * d.F) * w;
    const double scale = std::abs(psi_xx) + std::abs(V * psi[i]);
    if (scale == 0) continue;
    worst = std::max(worst, std::abs(psi_xx - V * psi[i]) / scale);
  }
  return worst;
}

Matrix2 monodromy(const PoleState& state, int k, double radius, MonodromyGauge gauge, double tol) {
  state.validate();
  require(k >= 0 && k < state.kappa, "pole index out of range");
  require(radius > 0, "radius must be positive");
  for (int j = 0; j < state.kappa; ++j)
    if (j != k && std::abs(state.Q[j] - state.Q[k]) <= 1.5 * radius)
      throw ConditioningError("monodromy loop would enclose or touch another pole");
  const PoleSeries ps = pole_series(state, 2);
  const cplx q = state.Q[k];
  // y = (u1, u2, w1, w2): two columns of the fundamental matrix
  auto rhs = [&](double th, const CVec& y, CVec& dy) {
    const cplx e = std::polar(1.0, th);
    const cplx x = q + radius * e, dx = cplx{0, 1} * radius * e;
    Matrix2 A;
    if (gauge == MonodromyGauge::FG)
      A = value_L(lax_jets(detail::pole_jets<1, 1>(ps, x), FvConvention::Consistent));
    else
      A = {0.0, 1.0, eval_fields(state, x).V, 0.0};
    dy.resize(4);
    dy[0] = dx * (A.a11 * y[0] + A.a12 * y[1]);
    dy[1] = dx * (A.a21 * y[0] + A.a22 * y[1]);
    dy[2] = dx * (A.a11 * y[2] + A.a12 * y[3]);
    dy[3] = dx * (A.a21 * y[2] + A.a22 * y[3]);
  };
  OdeOptions o;
  o.rtol = o.atol = tol;
  Dop853 solver(rhs, o);
  double th = 0;
  CVec y{1.0, 0.0, 0.0, 1.0};
  solver.integrate(th, y, 2 * kPi);
  return {y[0], y[2], y[1], y[3]};
}

}  // namespace pblab
