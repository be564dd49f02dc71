import math

import numpy as np
import pytest

import pblab


def test_virasoro_against_quadrature_and_samples():
    spec = pblab.EnsembleSpec(2, 2.0)
    assert spec.kappa == 1.0
    for n in range(-1, 5):
        assert abs(pblab.virasoro_residual_quadrature(spec, n)) < 1e-6
    batch = pblab.sample_gbeta(spec, 20000, 7)
    assert batch.configs.shape == (20000, 2)
    mean, err = pblab.virasoro_residual(batch, 2)
    assert abs(mean) <= 4 * err


def test_sampling_is_seeded():
    spec = pblab.EnsembleSpec(3, 1.5)
    a = pblab.sample_gbeta(spec, 500, 1).configs
    b = pblab.sample_gbeta(spec, 500, 1).configs
    c = pblab.sample_gbeta(spec, 500, 2).configs
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_tw_table_is_a_cdf():
    table = pblab.tw_table(2.0, n_t=300, n_x=300)
    cdf = np.array(table["cdf"])
    assert cdf[0] < 1e-3 and cdf[-1] > 0.99
    assert np.all(np.diff(cdf) >= -1e-12)


def test_pole_dynamics_and_lax_pair():
    for kappa in (1, 2, 3):
        tr = pblab.integrate_poles(pblab.demo_initial_state(kappa), 1.0)
        assert max(abs(i) for i in pblab.first_integrals(tr.states[-1])) < 1e-8
        assert pblab.governing_residual(tr) < 1e-6
        assert pblab.zero_curvature_residual(tr) < 1e-6
    s = pblab.demo_initial_state(2)
    x = 0.4 + 0.3j
    L = pblab.eval_L(s, x)
    assert L.shape == (2, 2)
    assert abs(np.trace(L) - (x * x - s.t)) < 1e-12


def test_spectral_determinant():
    p = pblab.SpectralProblem(2.0, 0.3)
    assert abs(pblab.spectral_D(p, 0) * pblab.spectral_D(p.reflected(), 0) - 1) < 1e-6
    levels = pblab.eigenvalues(p, 3)
    assert abs(levels[0] - 4.741087798888) < 1e-8
    assert abs(pblab.quantum_wronskian_residual(p, 2 + 1j)) < 1e-6


def test_bethe_single_root():
    roots, residual = pblab.bethe_solve(2.0, 0.3, [1 + 1j])
    assert residual < 1e-10
    assert abs(roots[0] - ((1.6**2 - 16) / 8)) < 1e-10


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        pblab.SpectralProblem(0.5, 0.3)
    with pytest.raises(pblab.ParameterError):
        pblab.EnsembleSpec(2, -1.0)
    with pytest.raises(pblab.NumericalError):
        pblab.integrate_poles(pblab.demo_initial_state(2), 1.0, 1e-30)
    assert issubclass(pblab.NumericalError, RuntimeError)
    assert math.isfinite(pblab.EnsembleSpec(4, 1.0).central_charge)
