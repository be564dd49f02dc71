"""Beta-ensemble, quantum Painleve II and ODE/IM numerics."""

from ._pblab import (
    EnsembleSpec,
    NumericalError,
    ParameterError,
    PoleState,
    SampleBatch,
    SpectralProblem,
    Trajectory,
    bethe_solve,
    demo_initial_state,
    eigenvalues,
    empirical_soft_edge_cdf,
    eval_B,
    eval_L,
    first_integrals,
    governing_residual,
    hirota_residual,
    integrate_poles,
    quantum_wronskian_residual,
    sample_gbeta,
    solve_qpii,
    spectral_D,
    tw_table,
    virasoro_residual,
    virasoro_residual_quadrature,
    zero_curvature_residual,
)

__version__ = "0.1.0"
