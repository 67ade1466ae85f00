"""Spectrally negative Markov additive processes: scale matrices, exit
identities, Monte Carlo checks and drawdown stopping."""

from ._core import (  # noqa: F401
    BoundaryMissing,
    DegenerateRoots,
    Error,
    GainSpec,
    HorizonTooShort,
    InvalidConfig,
    MapModel,
    ModelParseError,
    ModelShapeMismatch,
    ScaleTable,
    SimConfig,
    SingularScaleMatrix,
    SpectralRep,
    StopSolution,
    Unbounded,
    estimate_exit,
    estimate_stopped_gain,
    kappa,
    load_model,
    one_sided_up,
    parse_model,
    perron_vector,
    phi,
    psi,
    solve_boundary_ode,
    solve_shepp,
    spectral_decompose,
    stationary_distribution,
    talbot_w,
    two_sided_down,
    two_sided_up,
    w_zero_plus,
)

__version__ = "0.1.0"
