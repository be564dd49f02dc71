#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pblab/ensemble.hpp"
#include "pblab/lax.hpp"
#include "pblab/odeim.hpp"
#include "pblab/poles.hpp"
#include "pblab/qpii.hpp"

namespace py = pybind11;
using namespace pblab;

namespace {

EnsembleSpec make_spec(int M, double beta, const std::string& potential, double a, std::vector<double> couplings,
                       std::vector<double> masses, std::vector<double> positions, double c) {
  if (potential == "gaussian") return EnsembleSpec(M, beta, PotentialSpec::gaussian(a));
  if (potential == "polynomial") return EnsembleSpec(M, beta, PotentialSpec::polynomial(std::move(couplings)));
  if (potential == "penner")
    return EnsembleSpec(M, beta, PotentialSpec::multi_penner(std::move(masses), std::move(positions), c));
  throw ParameterError("potential must be gaussian, polynomial or penner");
}

py::array_t<cplx> matrix(const Matrix2& m) {
  py::array_t<cplx> out({2, 2});
  auto r = out.mutable_unchecked<2>();
  r(0, 0) = m.a11;
  r(0, 1) = m.a12;
  r(1, 0) = m.a21;
  r(1, 1) = m.a22;
  return out;
}

py::dict tw_dict(const TWTable& t) {
  py::dict d;
  d["t"] = t.t_values;
  d["cdf"] = t.cdf_values;
  d["stderr"] = t.stderr_values;
  d["beta"] = t.beta;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pblab, m) {
  m.doc() = "Beta-ensemble, quantum Painleve II and ODE/IM numerics.";

  static py::exception<ParameterError> param_exc(m, "ParameterError", PyExc_ValueError);
  static py::exception<NumericalError> num_exc(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParameterError& e) {
      param_exc(e.what());
    } catch (const NumericalError& e) {
      num_exc(e.what());
    }
  });

  py::class_<EnsembleSpec>(m, "EnsembleSpec")
      .def(py::init(&make_spec), py::arg("M"), py::arg("beta"), py::arg("potential") = "gaussian",
           py::arg("a") = 1.0, py::arg("couplings") = std::vector<double>{},
           py::arg("masses") = std::vector<double>{}, py::arg("positions") = std::vector<double>{},
           py::arg("C") = 0.0)
      .def_property_readonly("M", &EnsembleSpec::n_eigen)
      .def_property_readonly("beta", &EnsembleSpec::beta)
      .def_property_readonly("kappa", &EnsembleSpec::kappa)
      .def_property_readonly("central_charge", &EnsembleSpec::central_charge);

  py::class_<SampleBatch>(m, "SampleBatch")
      .def_property_readonly("configs",
                             [](const SampleBatch& b) {
                               const py::ssize_t n = b.configs.size(), k = b.spec.n_eigen();
                               py::array_t<double> out({n, k});
                               auto r = out.mutable_unchecked<2>();
                               for (py::ssize_t i = 0; i < n; ++i)
                                 for (py::ssize_t j = 0; j < k; ++j) r(i, j) = b.configs[i][j];
                               return out;
                             })
      .def_readonly("seed", &SampleBatch::seed);

  m.def("sample_gbeta", &sample_gbeta, py::arg("spec"), py::arg("n_samples"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "virasoro_residual",
      [](const SampleBatch& b, int n) {
        const MCStat s = virasoro_residual(b, n);
        return py::make_tuple(s.mean, s.stderr());
      },
      py::arg("batch"), py::arg("n"), "(mean, stderr) of the Virasoro residual");
  m.def(
      "virasoro_residual_quadrature", [](const EnsembleSpec& s, int n) { return virasoro_residual_quadrature(s, n); },
      py::arg("spec"), py::arg("n"));

  m.def(
      "solve_qpii",
      [](double kappa, double t_min, double t_max, double x_min, double x_max, int n_t, int n_x) {
        const Field2D f = solve_qpii(kappa, Grid2D{t_min, t_max, x_min, x_max, n_t, n_x});
        py::array_t<double> out({n_t, n_x});
        std::copy(f.values.begin(), f.values.end(), out.mutable_data());
        return out;
      },
      py::arg("kappa"), py::arg("t_min") = -10.0, py::arg("t_max") = 8.0, py::arg("x_min") = -8.0,
      py::arg("x_max") = 8.0, py::arg("n_t") = 800, py::arg("n_x") = 800);
  m.def(
      "tw_table",
      [](double beta, int n_t, int n_x) {
        Grid2D g;
        g.n_t = n_t;
        g.n_x = n_x;
        TWTable t = extract_tw(solve_qpii(beta / 2, g));
        t.beta = beta;
        return tw_dict(t);
      },
      py::arg("beta"), py::arg("n_t") = 800, py::arg("n_x") = 800);
  m.def(
      "empirical_soft_edge_cdf",
      [](double beta, int N, long n, std::uint64_t seed, const std::vector<double>& t) {
        return tw_dict(empirical_soft_edge_cdf(beta, N, n, seed, t));
      },
      py::arg("beta"), py::arg("N"), py::arg("n_samples"), py::arg("seed"), py::arg("t"));

  py::class_<PoleState>(m, "PoleState")
      .def_readonly("kappa", &PoleState::kappa)
      .def_readonly("t", &PoleState::t)
      .def_readonly("Q", &PoleState::Q)
      .def_readonly("Qdot", &PoleState::Qdot)
      .def_readonly("U", &PoleState::U);
  py::class_<Trajectory>(m, "Trajectory").def_readonly("states", &Trajectory::states);

  m.def("demo_initial_state", &demo_initial_state, py::arg("kappa"), py::arg("t") = 0.0);
  m.def(
      "integrate_poles",
      [](const PoleState& s, double t_final, double tol) { return integrate_poles(s, t_final, tol); },
      py::arg("state"), py::arg("t_final"), py::arg("tol") = 1e-12);
  m.def("first_integrals", &first_integrals, py::arg("state"));
  m.def(
      "governing_residual",
      [](const Trajectory& tr) { return governing_residual(tr, default_grid(tr)); }, py::arg("trajectory"));
  m.def(
      "hirota_residual", [](const Trajectory& tr) { return hirota_residual(tr, default_grid(tr)); },
      py::arg("trajectory"));

  m.def(
      "eval_L", [](const PoleState& s, cplx x) { return matrix(eval_L(s, x)); }, py::arg("state"), py::arg("x"));
  m.def(
      "eval_B", [](const PoleState& s, cplx x) { return matrix(eval_B(s, x)); }, py::arg("state"), py::arg("x"));
  m.def(
      "zero_curvature_residual",
      [](const Trajectory& tr) { return zero_curvature_residual(tr, default_grid(tr)); }, py::arg("trajectory"));

  py::class_<SpectralProblem>(m, "SpectralProblem")
      .def(py::init([](double alpha, double l) {
             SpectralProblem p{alpha, l};
             p.validate();
             return p;
           }),
           py::arg("alpha") = 2.0, py::arg("l") = 0.3)
      .def_readonly("alpha", &SpectralProblem::alpha)
      .def_readonly("l", &SpectralProblem::l)
      .def_property_readonly("q", &SpectralProblem::q)
      .def("reflected", &SpectralProblem::reflected);

  m.def(
      "spectral_D", [](const SpectralProblem& p, cplx E) { return spectral_D(p, E); }, py::arg("problem"),
      py::arg("E"));
  m.def(
      "eigenvalues", [](const SpectralProblem& p, int count) { return eigenvalues(p, count).values; },
      py::arg("problem"), py::arg("count"));
  m.def(
      "quantum_wronskian_residual",
      [](const SpectralProblem& p, cplx E) { return quantum_wronskian_residual(p, E); }, py::arg("problem"),
      py::arg("E"));
  m.def(
      "bethe_solve",
      [](double alpha, double l, const std::vector<cplx>& init) {
        const BetheRoots r = bethe_solve(alpha, l, init);
        return py::make_tuple(r.z, r.residual);
      },
      py::arg("alpha"), py::arg("l"), py::arg("init"), "(roots, residual)");
}
