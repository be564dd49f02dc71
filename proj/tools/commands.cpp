#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "pblab/ensemble.hpp"
#include "pblab/io.hpp"
#include "pblab/lax.hpp"
#include "pblab/odeim.hpp"
#include "pblab/poles.hpp"
#include "pblab/qpii.hpp"

namespace pblab::cli {

namespace {

std::string choice_list(std::initializer_list<const char*> c) {
  std::string s;
  for (const char* x : c) s += (s.empty() ? "" : "|") + std::string(x);
  return s;
}

template <class E>
E pick(const std::string& value, const std::string& name, std::initializer_list<std::pair<const char*, E>> c) {
  for (const auto& [k, v] : c)
    if (value == k) return v;
  std::string allowed;
  for (const auto& [k, v] : c) allowed += (allowed.empty() ? "" : ", ") + std::string(k);
  throw ParameterError(name + " must be one of " + allowed + ", got '" + value + "'");
}

TimeDerivative pick_mode(const std::string& s) {
  return pick<TimeDerivative>(s, "mode", {{"analytic", TimeDerivative::Analytic},
                                          {"fd", TimeDerivative::FiniteDifference}});
}

AlphaChoice pick_alpha(const std::string& s) {
  return pick<AlphaChoice>(s, "alpha", {{"one", AlphaChoice::One},
                                        {"minus-half-beta", AlphaChoice::MinusHalfBeta}});
}

QuadOptions quad_options(const RunContext& ctx) {
  QuadOptions q;
  q.rel_tol = ctx.tol(1e-13);
  q.abs_tol = 1e-15;
  return q;
}

void require_kappa(int kappa) { require(kappa >= 1 && kappa <= 8, "kappa must be in 1..8"); }

Trajectory run_poles(int kappa, double t_final, double tol, double output_step = 0.05) {
  require_kappa(kappa);
  require(t_final > 0, "t_final must be positive");
  PoleIntegrateOptions o;
  o.output_step = output_step;
  return integrate_poles(demo_initial_state(kappa), t_final, tol, o);
}

json matrix_json(const Matrix2& m) {
  return json::array({json::array({cplx_json(m.a11), cplx_json(m.a12)}),
                      json::array({cplx_json(m.a21), cplx_json(m.a22)})});
}

// ---------------------------------------------------------------- ensemble

Runner setup_sample(Params& p) {
  struct Cfg {
    int M = 4;
    double beta = 2, a = 1, samples = 1000;
  };
  auto c = std::make_shared<Cfg>();
  p.add("M", c->M, "number of eigenvalues");
  p.add("beta", c->beta, "Dyson index");
  p.add("a", c->a, "Gaussian scale");
  p.add("samples", c->samples, "number of draws");
  return [c](RunContext& ctx) {
    const EnsembleSpec spec(c->M, c->beta, PotentialSpec::gaussian(c->a));
    const SampleBatch b = sample_gbeta(spec, as_count(c->samples, "samples"), ctx.seed());
    std::ostringstream os;
    write_batch_csv(b, os);
    ctx.write_csv("samples.csv", os.str());
  };
}

Runner setup_virasoro(Params& p) {
  struct Cfg {
    int M = 8;
    double beta = 3.7, a = 1, samples = 1e5;
    std::string n = "0..4";
  };
  auto c = std::make_shared<Cfg>();
  p.add("M", c->M, "number of eigenvalues");
  p.add("beta", c->beta, "Dyson index");
  p.add("a", c->a, "Gaussian scale");
  p.add("n", c->n, "Virasoro indices, e.g. -1..4 or 0,2,3");
  p.add("samples", c->samples, "Monte Carlo sample count");
  return [c](RunContext& ctx) {
    const auto ns = parse_int_range(c->n);
    for (int n : ns) require(n >= -1, "Virasoro index n must be >= -1");
    const EnsembleSpec spec(c->M, c->beta, PotentialSpec::gaussian(c->a));
    const SampleBatch b = sample_gbeta(spec, as_count(c->samples, "samples"), ctx.seed());
    std::ostringstream os;
    os << "n,re_mean,im_mean,stderr,z_score\n";
    double worst = 0;
    for (int n : ns) {
      const MCStat r = virasoro_residual(b, n);
      const double z = std::abs(r.mean) / r.stderr();
      worst = std::max(worst, z);
      os << n << ',' << num(r.mean.real()) << ',' << num(r.mean.imag()) << ',' << num(r.stderr()) << ','
         << num(z) << '\n';
    }
    ctx.write_csv("virasoro.csv", os.str());
    json summary{{"max_z_score", worst}, {"within_3_stderr", worst <= 3.0}};
    if (c->M <= 2) {
      std::ostringstream q;
      q << "n,re_value,im_value,error\n";
      double worst_q = 0;
      for (int n : ns) {
        double err = 0;
        const cplx v = virasoro_residual_quadrature(spec, n, &err, quad_options(ctx));
        worst_q = std::max(worst_q, std::abs(v));
        q << n << ',' << num(v.real()) << ',' << num(v.imag()) << ',' << num(err) << '\n';
      }
      ctx.write_csv("virasoro_quadrature.csv", q.str());
      summary["max_quadrature_residual"] = worst_q;
    }
    ctx.write_json("virasoro.json", summary);
  };
}

Runner setup_bpz(Params& p) {
  struct Cfg {
    int M = 1;
    double beta = 2, C = -1, a = 1, z_re = 2.5, z_im = 0;
    std::string potential = "penner", masses = "1,1.5", positions = "-1,1";
    std::string couplings = "0,0.2,-0.5,0.1,-0.15", alpha = "one", fd_steps = "0.2,0.1,0.05";
  };
  auto c = std::make_shared<Cfg>();
  p.add("M", c->M, "number of eigenvalues (<= 2)");
  p.add("beta", c->beta, "Dyson index");
  p.add("potential", c->potential, choice_list({"penner", "polynomial", "gaussian"}));
  p.add("masses", c->masses, "Penner masses m_l");
  p.add("positions", c->positions, "Penner points w_l");
  p.add("C", c->C, "Penner overall constant");
  p.add("couplings", c->couplings, "polynomial couplings t_0..t_K");
  p.add("a", c->a, "Gaussian scale");
  p.add("alpha", c->alpha, choice_list({"one", "minus-half-beta"}));
  p.add("z_re", c->z_re, "Re z");
  p.add("z_im", c->z_im, "Im z");
  p.add("fd_steps", c->fd_steps, "finite-difference steps, decreasing");
  return [c](RunContext& ctx) {
    require(c->M >= 1 && c->M <= 2, "bpz-check supports M in 1..2");
    const PotentialSpec pot =
        c->potential == "penner"
            ? PotentialSpec::multi_penner(parse_doubles(c->masses), parse_doubles(c->positions), c->C)
        : c->potential == "polynomial" ? PotentialSpec::polynomial(parse_doubles(c->couplings))
        : c->potential == "gaussian"
            ? PotentialSpec::gaussian(c->a)
            : throw ParameterError("potential must be penner, polynomial or gaussian");
    const EnsembleSpec spec(c->M, c->beta, pot);
    const AlphaChoice alpha = pick_alpha(c->alpha);
    const cplx z{c->z_re, c->z_im};
    const auto steps = parse_doubles(c->fd_steps);
    require(!steps.empty(), "fd_steps is empty");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      require(steps[i] > 0, "fd_steps must be positive");
      if (i) require(steps[i] < steps[i - 1], "fd_steps must decrease");
    }
    std::ostringstream os;
    os << "fd_step,re_residual,im_residual,abs_residual,error_estimate,ratio_to_estimate\n";
    std::vector<double> r;
    json rows = json::array();
    for (double h : steps) {
      const BpzResult b = c->potential == "penner" ? bpz_ode_residual(spec, alpha, z, h, quad_options(ctx))
                                                   : confluent_bpz_residual(spec, alpha, z, h, quad_options(ctx));
      r.push_back(std::abs(b.residual));
      os << num(h) << ',' << num(b.residual.real()) << ',' << num(b.residual.imag()) << ','
         << num(std::abs(b.residual)) << ',' << num(b.error_estimate) << ','
         << num(std::abs(b.residual) / b.error_estimate) << '\n';
      rows.push_back({{"fd_step", h},
                      {"residual", cplx_json(b.residual)},
                      {"error_estimate", b.error_estimate},
                      {"Z", cplx_json(b.z_value)}});
    }
    json orders = json::array();
    for (std::size_t i = 1; i < steps.size(); ++i)
      orders.push_back(std::log(r[i - 1] / r[i]) / std::log(steps[i - 1] / steps[i]));
    ctx.write_csv("bpz.csv", os.str());
    ctx.write_json("bpz.json", {{"equation", c->potential == "penner" ? "fuchsian" : "confluent"},
                                {"rows", rows},
                                {"decay_orders", orders}});
  };
}

// ---------------------------------------------------------------- qpii

Grid2D grid_preset(const std::string& name) {
  Grid2D g;
  if (name == "default") return g;
  if (name == "coarse") {
    g.n_t = g.n_x = 400;
    return g;
  }
  if (name == "fine") {
    g.n_t = g.n_x = 1200;
    return g;
  }
  throw ParameterError("grid must be one of coarse, default, fine, got '" + name + "'");
}

Runner setup_qpii_solve(Params& p) {
  struct Cfg {
    double beta = 2;
    Grid2D g;
    double steepness = 2;
    int stride = 10;
  };
  auto c = std::make_shared<Cfg>();
  p.add("beta", c->beta, "Dyson index, kappa = beta/2");
  p.add("t_min", c->g.t_min, "lower time");
  p.add("t_max", c->g.t_max, "terminal time");
  p.add("x_min", c->g.x_min, "left edge");
  p.add("x_max", c->g.x_max, "right edge");
  p.add("n_t", c->g.n_t, "time nodes");
  p.add("n_x", c->g.n_x, "space nodes");
  p.add("steepness", c->steepness, "terminal sigmoid steepness");
  p.add("stride", c->stride, "output subsampling stride");
  return [c](RunContext& ctx) {
    require(c->beta > 0, "beta must be positive");
    require(c->stride >= 1, "stride must be >= 1");
    TerminalSpec term;
    term.steepness = c->steepness;
    const Field2D f = solve_qpii(c->beta / 2, c->g, term);
    std::ostringstream os;
    os << "t,x,F\n";
    for (int i = 0; i < c->g.n_t; i += c->stride)
      for (int j = 0; j < c->g.n_x; j += c->stride)
        os << num(c->g.t(i)) << ',' << num(c->g.x(j)) << ',' << num(f.at(i, j)) << '\n';
    ctx.write_csv("field.csv", os.str());
    ctx.write_json("qpii.json", {{"kappa", f.kappa},
                                 {"residual", qpii_residual(f)},
                                 {"residual_below_terminal_layer", qpii_residual(f, c->g.t_max - 4)}});
  };
}

Runner setup_tw_table(Params& p) {
  struct Cfg {
    double beta = 2, plateau_tol = 1e-3;
    std::string grid = "default", readout = "characteristic";
  };
  auto c = std::make_shared<Cfg>();
  p.add("beta", c->beta, "Dyson index");
  p.add("grid", c->grid, choice_list({"coarse", "default", "fine"}));
  p.add("plateau_tol", c->plateau_tol, "plateau flag threshold");
  p.add("readout", c->readout, choice_list({"characteristic", "direct"}));
  return [c](RunContext& ctx) {
    require(c->beta > 0, "beta must be positive");
    const TWReadout r = pick<TWReadout>(c->readout, "readout", {{"characteristic", TWReadout::Characteristic},
                                                                {"direct", TWReadout::Direct}});
    const Field2D f = solve_qpii(c->beta / 2, grid_preset(c->grid));
    TWTable tw = extract_tw(f, c->plateau_tol, r);
    tw.beta = c->beta;
    std::ostringstream os;
    write_tw_csv(tw, os);
    ctx.write_csv("tw_table.csv", os.str());
  };
}

Runner setup_tw_empirical(Params& p) {
  struct Cfg {
    double beta = 2, samples = 1e5, t_min = -5, t_max = 2, t_step = 0.05;
    int N = 400;
  };
  auto c = std::make_shared<Cfg>();
  p.add("beta", c->beta, "Dyson index");
  p.add("N", c->N, "matrix size");
  p.add("samples", c->samples, "number of matrices");
  p.add("t_min", c->t_min, "first t");
  p.add("t_max", c->t_max, "last t");
  p.add("t_step", c->t_step, "t spacing");
  return [c](RunContext& ctx) {
    require(c->t_step > 0 && c->t_max >= c->t_min, "need t_step > 0 and t_max >= t_min");
    std::vector<double> t;
    const long n = std::lround((c->t_max - c->t_min) / c->t_step);
    for (long i = 0; i <= n; ++i) t.push_back(c->t_min + i * c->t_step);
    const TWTable tw = empirical_soft_edge_cdf(c->beta, c->N, as_count(c->samples, "samples"), ctx.seed(), t);
    std::ostringstream os;
    write_tw_csv(tw, os);
    ctx.write_csv("tw_empirical.csv", os.str());
  };
}

// ---------------------------------------------------------------- poles

Runner setup_poles_run(Params& p) {
  struct Cfg {
    int kappa = 2;
    double t_final = 3, output_step = 0.05;
  };
  auto c = std::make_shared<Cfg>();
  p.add("kappa", c->kappa, "number of poles");
  p.add("t_final", c->t_final, "end time");
  p.add("output_step", c->output_step, "recording interval");
  return [c](RunContext& ctx) {
    require(c->output_step > 0, "output_step must be positive");
    const double tol = ctx.tol(1e-12);
    const Trajectory tr = run_poles(c->kappa, c->t_final, tol, c->output_step);
    double drift = 0, min_sep = INFINITY;
    const auto I0 = first_integrals(tr.states.front());
    for (const PoleState& s : tr.states) {
      const auto I = first_integrals(s);
      for (std::size_t k = 0; k < I.size(); ++k) drift = std::max(drift, std::abs(I[k] - I0[k]));
      if (s.kappa > 1) min_sep = std::min(min_sep, s.min_separation());
    }
    std::ostringstream os;
    write_trajectory_csv(tr, os);
    ctx.write_csv("trajectory.csv", os.str());
    json j{{"kappa", c->kappa},
           {"tol", tol},
           {"first_integral_drift", drift},
           {"accepted_steps", tr.stats.accepted},
           {"rejected_steps", tr.stats.rejected},
           {"evaluations", tr.stats.evaluations}};
    if (c->kappa > 1) j["min_separation"] = min_sep;
    ctx.write_json("poles.json", j);
  };
}

Runner setup_residual_check(Params& p, bool governing) {
  struct Cfg {
    int kappa = 2;
    double t_final = 3, fd_step = 1e-4, margin = 0.3;
    std::string mode = "analytic", form = "pb";
  };
  auto c = std::make_shared<Cfg>();
  p.add("kappa", c->kappa, "number of poles");
  p.add("t_final", c->t_final, "end time");
  p.add("mode", c->mode, choice_list({"analytic", "fd"}));
  p.add("fd_step", c->fd_step, "time step for fd mode");
  p.add("margin", c->margin, "minimum grid distance from the poles");
  if (governing) p.add("form", c->form, choice_list({"pb", "pv"}));
  return [c, governing](RunContext& ctx) {
    require(c->fd_step > 0, "fd_step must be positive");
    require(c->margin >= 0, "margin must be nonnegative");
    ResidualOptions o;
    o.mode = pick_mode(c->mode);
    o.fd_step = c->fd_step;
    o.form = pick<GoverningForm>(c->form, "form", {{"pb", GoverningForm::PB}, {"pv", GoverningForm::PV}});
    const double tol = ctx.tol(1e-12);
    const Trajectory tr = run_poles(c->kappa, c->t_final, tol);
    const auto grid = default_grid(tr, c->margin);
    require(!grid.empty(), "no grid point is farther than margin from the poles");
    const double r = governing ? governing_residual(tr, grid, o) : hirota_residual(tr, grid, o);
    ctx.write_json(governing ? "governing.json" : "hirota.json",
                   {{"kappa", c->kappa}, {"tol", tol}, {"grid_points", grid.size()},
                    {"states", tr.states.size()}, {"residual", r}});
  };
}

// ---------------------------------------------------------------- lax

Runner setup_lax_check(Params& p) {
  struct Cfg {
    int kappa = 2;
    double t_final = 3, perturbation = 1e-3;
    std::string fv = "consistent";
  };
  auto c = std::make_shared<Cfg>();
  p.add("kappa", c->kappa, "number of poles");
  p.add("t_final", c->t_final, "end time");
  p.add("perturbation", c->perturbation, "off-shell displacement of Q_1 and Qdot_1");
  p.add("fv", c->fv, choice_list({"consistent", "printed"}));
  return [c](RunContext& ctx) {
    LaxOptions o;
    o.fv = pick<FvConvention>(c->fv, "fv", {{"consistent", FvConvention::Consistent},
                                            {"printed", FvConvention::AsPrinted}});
    const Trajectory tr = run_poles(c->kappa, c->t_final, ctx.tol(1e-12));
    const auto grid = default_grid(tr);
    const PoleState& s0 = tr.states.front();
    auto single = [&](const PoleState& s) {
      Trajectory one;
      one.states = {s};
      return zero_curvature_residual(one, grid, o);
    };
    PoleState dq = s0, dqdot = s0;
    dq.Q[0] += c->perturbation;
    dqdot.Qdot[0] += c->perturbation;

    double trace_err = 0, bplus_err = 0;
    json dumps = json::array();
    for (std::size_t i = 0; i < tr.states.size(); i += 10) {
      const PoleState& s = tr.states[i];
      for (const cplx& x : grid) {
        const Matrix2 L = eval_L(s, x, o.fv), B = eval_B(s, x, o.fv);
        const FieldEval f = eval_fields(s, x);
        trace_err = std::max(trace_err, std::abs(L.trace() - (x * x - s.t)));
        trace_err = std::max(trace_err, std::abs(B.trace() - (-x + (s.U + s.t * s.t / 2) / double(s.kappa))));
        bplus_err = std::max(bplus_err, std::abs(B.a12 / L.a12 - f.b_plus) / (1 + std::abs(f.b_plus)));
      }
      const cplx x = grid.front();
      dumps.push_back({{"t", s.t}, {"x", cplx_json(x)}, {"L", matrix_json(eval_L(s, x, o.fv))},
                       {"B", matrix_json(eval_B(s, x, o.fv))}});
    }
    ctx.write_json("lax.json", {{"kappa", c->kappa},
                                {"zero_curvature_on_shell", zero_curvature_residual(tr, grid, o)},
                                {"zero_curvature_initial", single(s0)},
                                {"zero_curvature_off_shell_Q", single(dq)},
                                {"zero_curvature_off_shell_Qdot", single(dqdot)},
                                {"trace_error", trace_err},
                                {"b_plus_agreement", bplus_err},
                                {"matrices", dumps}});
  };
}

Runner setup_reconstruct(Params& p) {
  struct Cfg {
    int kappa = 2, points = 41;
    double x_min = -1.5, x_max = 1.5, x_im = 0;
    std::string init = "1;0.5";
  };
  auto c = std::make_shared<Cfg>();
  p.add("kappa", c->kappa, "number of poles");
  p.add("x_min", c->x_min, "contour start (real part)");
  p.add("x_max", c->x_max, "contour end (real part)");
  p.add("x_im", c->x_im, "imaginary part of the contour");
  p.add("points", c->points, "grid points");
  p.add("init", c->init, "(F, G) at the first point as 're,im;re,im'");
  return [c](RunContext& ctx) {
    require_kappa(c->kappa);
    require(c->points >= 3, "points must be >= 3");
    require(c->x_max > c->x_min, "x_max must exceed x_min");
    const auto iv = parse_complex_list(c->init);
    require(iv.size() == 2, "init needs two complex values");
    const PoleState s = demo_initial_state(c->kappa);
    std::vector<cplx> line;
    for (int i = 0; i < c->points; ++i)
      line.emplace_back(c->x_min + (c->x_max - c->x_min) * i / (c->points - 1), c->x_im);
    const double tol = ctx.tol(1e-12);
    const LinSolution sol = reconstruct_F(s, line, {iv[0], iv[1]}, tol);
    const auto psi = schrodinger_gauge(sol);
    std::ostringstream os;
    os << "re_x,im_x,re_F,im_F,re_G,im_G,re_Psi,im_Psi\n";
    for (std::size_t i = 0; i < line.size(); ++i) {
      os << num(line[i].real()) << ',' << num(line[i].imag());
      for (const cplx& v : {sol.values[i][0], sol.values[i][1], psi[i]})
        os << ',' << num(v.real()) << ',' << num(v.imag());
      os << '\n';
    }
    ctx.write_csv("reconstruct.csv", os.str());
    const TimeCheck tc = time_evolution_check(s, line, {iv[0], iv[1]});
    ctx.write_json("reconstruct.json", {{"kappa", c->kappa},
                                        {"separated_ode_residual", separated_ode_residual(sol)},
                                        {"schrodinger_residual", schrodinger_residual(sol)},
                                        {"qpii_residual", tc.qpii},
                                        {"first_order_residual", tc.first_order}});
  };
}

// ---------------------------------------------------------------- odeim

void add_problem(Params& p, SpectralProblem& sp) {
  p.add("alpha", sp.alpha, "potential exponent parameter (> 1)");
  p.add("l", sp.l, "angular parameter");
}

ShootOptions shoot_options(const RunContext& ctx) {
  ShootOptions o;
  o.tol = ctx.tol(1e-13);
  return o;
}

Runner setup_odeim_spectrum(Params& p) {
  struct Cfg {
    SpectralProblem sp;
    int count = 10, e_points = 71;
    double e_min = -5, e_max = 30;
  };
  auto c = std::make_shared<Cfg>();
  add_problem(p, c->sp);
  p.add("count", c->count, "number of eigenvalues (<= 40)");
  p.add("e_min", c->e_min, "determinant scan start");
  p.add("e_max", c->e_max, "determinant scan end");
  p.add("e_points", c->e_points, "determinant scan points");
  return [c](RunContext& ctx) {
    c->sp.validate();
    require(c->e_points >= 2 && c->e_max > c->e_min, "need e_points >= 2 and e_max > e_min");
    const ShootOptions o = shoot_options(ctx);
    const Spectrum s = eigenvalues(c->sp, c->count, o);
    std::ostringstream sc;
    write_spectrum_csv(sc, s.values);
    ctx.write_csv("spectrum.csv", sc.str());
    std::vector<cplx> E, D;
    for (int i = 0; i < c->e_points; ++i) {
      E.emplace_back(c->e_min + (c->e_max - c->e_min) * i / (c->e_points - 1), 0.0);
      D.push_back(spectral_D(c->sp, E.back(), o));
    }
    std::ostringstream dc;
    write_determinant_csv(dc, E, D);
    ctx.write_csv("determinant.csv", dc.str());
    const cplx prod = spectral_D(c->sp, 0.0, o) * spectral_D(c->sp.reflected(), 0.0, o);
    ctx.write_json("odeim.json", {{"alpha", c->sp.alpha},
                                  {"l", c->sp.l},
                                  {"node_count", s.node_count},
                                  {"complete", s.complete},
                                  {"D0_product", cplx_json(prod)},
                                  {"D0_product_error", std::abs(prod - 1.0)}});
  };
}

Runner setup_qwronskian(Params& p) {
  struct Cfg {
    SpectralProblem sp;
    std::string E = "0;1;2,1;-1,0.5;3,-2;0.5,4;-4,-1;6;-2,3;8,-6";
  };
  auto c = std::make_shared<Cfg>();
  add_problem(p, c->sp);
  p.add("E", c->E, "energies as 're,im;re,im;...'");
  return [c](RunContext& ctx) {
    c->sp.validate();
    const ShootOptions o = shoot_options(ctx);
    std::ostringstream os;
    os << "re_E,im_E,re_residual,im_residual,abs_residual\n";
    double worst = 0;
    json sym = json::array();
    for (const cplx& E : parse_complex_list(c->E)) {
      const cplx r = quantum_wronskian_residual(c->sp, E, o);
      worst = std::max(worst, std::abs(r));
      os << num(E.real()) << ',' << num(E.imag()) << ',' << num(r.real()) << ',' << num(r.imag()) << ','
         << num(std::abs(r)) << '\n';
      const SymmetryReport s = symmetry_checks(c->sp, E, o);
      sym.push_back({{"E", cplx_json(E)},
                     {"c_relation", s.c_relation},
                     {"psi_minus_expansion", s.psi_minus_expansion},
                     {"d_consistency", s.d_consistency},
                     {"wronskian_pin", s.wronskian_pin},
                     {"chi_wronskian", s.chi_wronskian},
                     {"u", cplx_json(s.u)}});
    }
    ctx.write_csv("qwronskian.csv", os.str());
    ctx.write_json("qwronskian.json", {{"max_residual", worst}, {"symmetries", sym}});
  };
}

Runner setup_bethe(Params& p) {
  struct Cfg {
    double alpha = 2, l = 0.3;
    std::string init = "1,1;-3,0.5";
  };
  auto c = std::make_shared<Cfg>();
  p.add("alpha", c->alpha, "potential exponent parameter (> 1)");
  p.add("l", c->l, "angular parameter");
  p.add("init", c->init, "initial roots as 're,im;re,im;...'");
  return [c](RunContext& ctx) {
    const BetheRoots r = bethe_solve(c->alpha, c->l, parse_complex_list(c->init), ctx.tol(1e-12));
    json roots = json::array();
    for (const cplx& z : r.z) roots.push_back(cplx_json(z));
    json j{{"alpha", r.alpha}, {"l", r.l}, {"L", r.z.size()}, {"roots", roots}, {"residual", r.residual}};
    if (r.z.size() == 1) {
      const double a = c->alpha, l = c->l;
      const double closed = ((2 * l + 1) * (2 * l + 1) - 4 * a * a) / (4 * a);
      j["closed_form"] = closed;
      j["closed_form_error"] = std::abs(r.z[0] - closed);
    }
    std::vector<cplx> zg;
    for (int k = 0; k < 8; ++k) zg.push_back(std::polar(2.5, 0.3 + 0.7 * k));
    j["change_of_variables_residual"] = change_of_variables_residual(r, {1.0, 0.5}, zg);
    ctx.write_json("bethe.json", j);
  };
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"sample", "draw Gaussian beta-ensemble configurations", setup_sample},
      {"virasoro-check", "Monte Carlo (and quadrature) Virasoro residuals", setup_virasoro},
      {"bpz-check", "BPZ residuals for Penner or polynomial potentials", setup_bpz},
      {"qpii-solve", "solve the QPII equation on a grid", setup_qpii_solve},
      {"tw-table", "Tracy-Widom table from the QPII solution", setup_tw_table},
      {"tw-empirical", "empirical soft-edge CDF from tridiagonal matrices", setup_tw_empirical},
      {"poles-run", "integrate the pole dynamics", setup_poles_run},
      {"governing-check", "governing-system residual along a pole trajectory",
       [](Params& p) { return setup_residual_check(p, true); }},
      {"hirota-check", "bilinear-equation residual along a pole trajectory",
       [](Params& p) { return setup_residual_check(p, false); }},
      {"lax-check", "zero-curvature and consistency checks of the Lax pair", setup_lax_check},
      {"reconstruct", "reconstruct F from the linear system", setup_reconstruct},
      {"odeim-spectrum", "eigenvalues and spectral determinant", setup_odeim_spectrum},
      {"qwronskian-check", "quantum Wronskian and symmetry residuals", setup_qwronskian},
      {"bethe-solve", "solve the Bethe equations for excited states", setup_bethe},
  };
  return list;
}

}  // namespace pblab::cli
