"""Crypto-Hermitian matrix models, their Hermitizing metrics and the
parameter domains where spectra are real and metrics positive."""

from .errors import (
    AsymmetryError,
    ConvergenceError,
    NotFoundError,
    NotPositiveDefiniteError,
    ParameterError,
    QuasiHermError,
    SpectrumError,
)
from .numerics import PolyCoeffs, Spectrum, char_poly, eig, poly_discriminant, spd_sqrt, sym_eig
from .models import (
    ChainParams,
    ModelSpec,
    NineLevelParams,
    RobinLatticeParams,
    SecondObservableParams,
    ThreeLevelParams,
    TwoLevelParams,
    build_chain,
    build_discrete_robin,
    build_nine,
    build_second_observable,
    build_three_level,
    build_two_level,
    robin_continuum_spectrum,
)
from .metric import (
    MetricFamily,
    assemble_metric,
    hermitize,
    metric_basis,
    metric_nullspace_oracle,
    positivity,
    residual,
    three_level_metric,
    two_level_metric,
)
from .observables import DomainFlags, QConstraintParams, q_from_s, triple_check
from .domains import (
    beta_critical,
    classify_spectrum,
    evaluate_G,
    reality_count,
    scan_grid,
    secular_quartic,
    t_crit,
    trace_zero_line,
)

__version__ = "0.1.0"
