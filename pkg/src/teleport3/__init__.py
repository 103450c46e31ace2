"""Density-operator simulation of teleportation with GHZ and W resources."""

from .analysis import (
    FidelityReport,
    MonteCarloResult,
    SphereQuadrature,
    affine_fit,
    average_fidelity,
    monte_carlo_average,
    n_sweep,
    noise_sweep,
    nu_sweep,
    p0_report,
    p1_report,
    theta_profile,
)
from .measurement import MeasurementBranch, make_rng, measure, sample_outcome
from .closed_forms import oracle
from .protocols import (
    TABLE_GHZ_P0,
    TABLE_GHZ_P1,
    TABLE_W_P0,
    TABLE_W_P1,
    BranchModel,
    CorrectionTable,
    OutcomeRecord,
    fidelity,
    p0_model,
    p1_ghz_model,
    p1_w_model,
    run_p0,
    run_p1_ghz,
    run_p1_w,
)
from .qmat import (
    DensityOperator,
    dagger,
    embed,
    kron,
    matmul,
    min_eigenvalue,
    partial_trace,
    tensor,
    trace,
)
from .states import (
    BlochAngles,
    MeasurementAngle,
    ProjectorSet,
    Visibility,
    bell_projectors,
    ghz_state,
    input_state,
    noisy_state,
    nu_projectors,
    pauli,
    w_state,
)

__version__ = "0.1.0"
