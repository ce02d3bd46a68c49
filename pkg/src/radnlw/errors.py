"""Exception types shared across the package."""


class RadnlwError(Exception):
    """Base class for all package errors."""


class DivergentWeight(RadnlwError):
    """Weighted norm requested with a non-integrable power weight."""


class DomainOverflow(RadnlwError):
    """Field mass reached the outer wall; the truncated domain is no longer faithful."""


class TruncationLoss(RadnlwError):
    """Data carries spectral mass above the randomization shell cover."""


class RangeExceeded(RadnlwError):
    """A cone parameter left the stored profile window."""


class BlowupDetected(RadnlwError):
    """The L^6 blowup threshold was exceeded during time stepping."""


class NonFinite(RadnlwError):
    """A field sample left the finite floating-point range."""


class InsufficientTrials(RadnlwError):
    """A Monte Carlo slope claim was requested with too few trials."""


class InadmissibleTriple(RadnlwError):
    """The (q, p, alpha) triple violates the admissibility window of the sweep."""


class SolverParamError(RadnlwError):
    """Solver parameters violate their invariants (CFL, horizon, stride)."""


class ConfigError(RadnlwError):
    """A run configuration is missing or malformed; message names the offending key."""
