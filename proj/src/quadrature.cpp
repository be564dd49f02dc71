#include "pblab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pblab {

namespace {

constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980393246, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                           0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                           0.295524224714752870173892994651338};

struct Panel {
  double a, b;
  cplx value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk21(const std::function<cplx(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx kron = fc * kWgk[10];
  cplx gauss{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const cplx s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  Panel p{a, b, kron * h, std::abs((kron - gauss) * h)};
  return p;
}

}  // namespace

QuadResult integrate_gk(const std::function<cplx(double)>& f, double a, double b,
                        const QuadOptions& options, const std::vector<double>& breaks) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > std::min(a, b) && x < std::max(a, b)) pts.push_back(x);
  pts.push_back(b);
  if (a < b)
    std::sort(pts.begin() + 1, pts.end() - 1);
  else
    std::sort(pts.begin() + 1, pts.end() - 1, std::greater<>());

  std::priority_queue<Panel> heap;
  cplx total{};
  double err = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i] == pts[i + 1]) continue;
    Panel p = gk21(f, pts[i], pts[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }

  QuadResult r;
  while (!heap.empty()) {
    if (err <= std::max(options.abs_tol, options.rel_tol * std::abs(total))) break;
    if (int(heap.size()) >= options.max_intervals) {
      r.converged = false;
      break;
    }
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      r.converged = false;
      break;
    }
    heap.pop();
    Panel left = gk21(f, worst.a, mid);
    Panel right = gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Recompute the running sums to avoid drift from the incremental updates.
  total = 0;
  err = 0;
  r.intervals = int(heap.size());
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  r.value = total;
  r.error = err;
  if (!std::isfinite(std::abs(total))) r.converged = false;
  return r;
}

cplx integrate_or_throw(const std::function<cplx(double)>& f, double a, double b,
                        const QuadOptions& options, const std::vector<double>& breaks,
                        double* error) {
  QuadResult r = integrate_gk(f, a, b, options, breaks);
  if (error) *error = r.error;
  if (!r.converged)
    throw AccuracyError("adaptive quadrature did not converge", r.value, r.error);
  return r.value;
}

}  // namespace pblab
