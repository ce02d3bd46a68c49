"""Radial randomization over annular frequency shells and the low/high split.

Shell k covers frequencies [k^gamma, (k+1)^gamma); every shell piece of the
data is multiplied by an independent standard real Gaussian.  Draws come from
a counter-based Philox stream keyed on (seed, trial, component), with the
shell index k addressing into the stream, so trials parallelize without
sequential RNG state and identical (seed, trial) reproduce bit-identical
output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TruncationLoss
from .spectral import (
    BandSpec,
    RadialField,
    RadialGrid,
    SpectralField,
    apply_band,
    forward_transform,
    inverse_transform,
)

__all__ = ["RandomizationParams", "WaveData", "sample_randomization", "split_frequency"]

TRUNCATION_TOLERANCE = 1e-8


@dataclass(frozen=True)
class RandomizationParams:
    gamma: float = 1.0
    shell_max: int = 128
    seed: int = 0
    cutoff: int = 64

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.shell_max < 1:
            raise ValueError("shell_max must be >= 1")
        n = self.cutoff
        if n < 1 or (n & (n - 1)) != 0:
            raise ValueError("cutoff must be a dyadic integer >= 1")

    @property
    def shell_top(self) -> float:
        """Upper edge of the covered frequency range, shell_max^gamma."""
        return float(self.shell_max) ** self.gamma


@dataclass(frozen=True)
class WaveData:
    """Initial-data pair (f, g) on a shared grid."""

    position: RadialField
    velocity: RadialField

    def __post_init__(self):
        if self.position.grid != self.velocity.grid:
            raise ValueError("position and velocity must share a grid")

    @property
    def grid(self) -> RadialGrid:
        return self.position.grid

    def coefficients(self) -> tuple[SpectralField, SpectralField]:
        return forward_transform(self.position), forward_transform(self.velocity)

    @classmethod
    def from_coefficients(cls, cf: SpectralField, cg: SpectralField) -> "WaveData":
        return cls(inverse_transform(cf), inverse_transform(cg))

    @classmethod
    def zero(cls, grid: RadialGrid) -> "WaveData":
        return cls(RadialField.zero(grid), RadialField.zero(grid))


def shell_indices(grid: RadialGrid, gamma: float) -> np.ndarray:
    """Shell index k = floor(rho^{1/gamma}) of every mode (half-open shells)."""
    return np.floor(grid.frequencies ** (1.0 / gamma)).astype(np.int64)


def shell_gaussians(params: RandomizationParams, trial: int, component: int) -> np.ndarray:
    """The shell_max independent N(0,1) draws for one data component."""
    key = np.array(
        [np.uint64(params.seed & 0xFFFFFFFFFFFFFFFF),
         np.uint64(((trial & 0x7FFFFFFFFFFFFFFF) << 1) | (component & 1))],
        dtype=np.uint64,
    )
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(params.shell_max)


def _randomize_component(c: SpectralField, k_of_mode: np.ndarray,
                         gains: np.ndarray, what: str) -> SpectralField:
    coeff = c.coefficients
    covered = k_of_mode < len(gains)
    if not np.all(covered):
        lost = np.sqrt(np.sum(coeff[~covered] ** 2))
        total = np.sqrt(np.sum(coeff**2))
        if total > 0.0 and lost > TRUNCATION_TOLERANCE * total:
            raise TruncationLoss(
                f"{what}: {lost / total:.3e} of the L2 mass sits above the "
                f"shell cover (shell_max too small)")
    out = np.where(covered, coeff * gains[np.minimum(k_of_mode, len(gains) - 1)], 0.0)
    return SpectralField(c.grid, out)


def sample_randomization(data: WaveData, params: RandomizationParams,
                         trial: int, gains: np.ndarray | None = None) -> WaveData:
    """Multiply each annular shell piece of (f, g) by an independent Gaussian.

    `gains`, when given, overrides the random draws for both components
    (test hook; gains of all ones reproduce the input exactly).
    """
    cf, cg = data.coefficients()
    k_of_mode = shell_indices(data.grid, params.gamma)
    if gains is not None:
        gains = np.asarray(gains, dtype=np.float64)
        gf = gg = gains
    else:
        gf = shell_gaussians(params, trial, 0)
        gg = shell_gaussians(params, trial, 1)
    rf = _randomize_component(cf, k_of_mode, gf, "position")
    rg = _randomize_component(cg, k_of_mode, gg, "velocity")
    return WaveData.from_coefficients(rf, rg)


def split_frequency(data: WaveData, cutoff: int) -> tuple[WaveData, WaveData]:
    """Sharp split into (P_{<=cutoff} data, P_{>cutoff} data); low + high = data."""
    cf, cg = data.coefficients()
    low = BandSpec.low(cutoff)
    high = BandSpec.high(cutoff)
    low_data = WaveData.from_coefficients(apply_band(cf, low), apply_band(cg, low))
    high_data = WaveData.from_coefficients(apply_band(cf, high), apply_band(cg, high))
    return low_data, high_data
