"""Numerical laboratory for the radial energy-critical wave equation in 3D."""

from .errors import (
    BlowupDetected,
    ConfigError,
    DivergentWeight,
    DomainOverflow,
    InadmissibleTriple,
    InsufficientTrials,
    NonFinite,
    RadnlwError,
    RangeExceeded,
    SolverParamError,
    TruncationLoss,
)
from .spectral import (
    BandSpec,
    RadialField,
    RadialGrid,
    SpectralField,
    apply_band,
    forward_transform,
    fourier_values,
    fractional_derivative,
    inverse_transform,
    sobolev_norm,
    weighted_norm,
)

__version__ = "0.1.0"
