"""Half-wave propagators, the companion solution, and the in/out decomposition.

Free radial waves diagonalize over sine modes: mode m rotates at frequency
rho_m.  The same fact makes every free wave a superposition of two
one-dimensional profiles riding the characteristics,

    w(t, r) = A(r + t) + B(r - t),   w = r * v,

where A and B are 2R-periodic extensions of the initial data's mode series.
Profiles, reconstruction, and all linear space-time norms are built on that
identity.  With the conventions of :mod:`radnlw.spectral`,

    W_s[uhat](tau) = (1/2) sum_m c_m sin(rho_m tau),
    W_c[uhat](tau) = (1/2) sum_m c_m cos(rho_m tau),

and one period of any mixed series is evaluated with a single FFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import RangeExceeded
from .randomize import WaveData
from .spectral import RadialField, RadialGrid, SpectralField, inverse_transform

__all__ = [
    "WaveState",
    "Profile",
    "linear_solution",
    "companion_solution",
    "profile_sine",
    "profile_cosine",
    "in_out_decompose",
    "gradient_profiles",
    "reconstruct",
    "CharacteristicSampler",
    "spacetime_norm",
    "periodic_series",
    "profile_lq_period_norm",
]


# ---------------------------------------------------------------------------
# states and exact propagation


@dataclass(frozen=True)
class WaveState:
    """Snapshot (v, d_t v) at a time t."""

    time: float
    position: RadialField
    velocity: RadialField

    def __post_init__(self):
        if self.position.grid != self.velocity.grid:
            raise ValueError("state components must share a grid")

    @property
    def grid(self) -> RadialGrid:
        return self.position.grid


def rotate_pair(cf: np.ndarray, cg: np.ndarray, rho: np.ndarray, t: float):
    """Exact mode-wise free evolution of a coefficient pair by time t."""
    c, s = np.cos(rho * t), np.sin(rho * t)
    return cf * c + cg * s / rho, -cf * rho * s + cg * c


def linear_solution(data: WaveData, t: float) -> WaveState:
    """Free wave cos(t|grad|) f + (sin(t|grad|)/|grad|) g at time t."""
    cf, cg = data.coefficients()
    rho = data.grid.frequencies
    at, bt = rotate_pair(cf.coefficients, cg.coefficients, rho, t)
    return WaveState(
        t,
        inverse_transform(SpectralField(data.grid, at)),
        inverse_transform(SpectralField(data.grid, bt)),
    )


def companion_solution(data: WaveData) -> WaveData:
    """Initial data of the companion wave: (|grad|^{-1} g, -|grad| f).

    The free wave with this data has |grad| times it equal to d_t of the free
    wave of `data` for all times.
    """
    cf, cg = data.coefficients()
    rho = data.grid.frequencies
    return WaveData.from_coefficients(
        SpectralField(data.grid, cg.coefficients / rho),
        SpectralField(data.grid, -rho * cf.coefficients),
    )


# ---------------------------------------------------------------------------
# periodic mode-series evaluation


def top_occupied_mode(*coeff_arrays) -> int:
    """Largest 1-based mode index carrying a nonzero coefficient (0 if none)."""
    top = 0
    for arr in coeff_arrays:
        if arr is None:
            continue
        idx = np.nonzero(np.asarray(arr))[0]
        if len(idx):
            top = max(top, int(idx[-1]) + 1)
    return top


def periodic_series(grid: RadialGrid, cos_coeffs, sin_coeffs, n_samples: int) -> np.ndarray:
    """One 2R-period of sum_m [a_m cos(rho_m tau) + b_m sin(rho_m tau)].

    Samples sit at tau_k = k * 2R/n_samples; n_samples must exceed twice the
    top occupied mode index for alias-free values.
    """
    m = grid.point_count - 1
    top = top_occupied_mode(cos_coeffs, sin_coeffs)
    if n_samples < 2 * top + 2:
        raise ValueError("n_samples too small for the mode content")
    x = np.zeros(n_samples, dtype=np.complex128)
    a = np.zeros(m) if cos_coeffs is None else np.asarray(cos_coeffs, dtype=np.float64)
    b = np.zeros(m) if sin_coeffs is None else np.asarray(sin_coeffs, dtype=np.float64)
    x[1 : top + 1] = a[:top] - 1j * b[:top]
    return np.fft.ifft(x).real * n_samples


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def profile_lq_period_norm(grid: RadialGrid, cos_coeffs, sin_coeffs, q: float,
                           oversample: int = 2) -> float:
    """L^q_tau norm over one 2R period of a mixed mode series.

    Exact (to round-off) for even integer q when the sample count clears the
    q-fold Nyquist threshold; the default doubles it for safety.
    """
    m_top = max(1, top_occupied_mode(cos_coeffs, sin_coeffs))
    if np.isinf(q):
        n = _next_pow2(oversample * 8 * (m_top + 1))
        vals = periodic_series(grid, cos_coeffs, sin_coeffs, n)
        return float(np.max(np.abs(vals)))
    n = _next_pow2(int(oversample * max(4, q) * (m_top + 1)) + 2)
    vals = periodic_series(grid, cos_coeffs, sin_coeffs, n)
    period = 2.0 * grid.radius_max
    return float((period * np.mean(np.abs(vals) ** q)) ** (1.0 / q))


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """Function of the cone parameter tau on a uniform grid."""

    tau_min: float
    spacing: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(s)):
            raise ValueError("profile samples must be finite")
        if not self.spacing > 0:
            raise ValueError("profile spacing must be positive")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "_spline", None)

    @property
    def tau_max(self) -> float:
        return self.tau_min + self.spacing * (len(self.samples) - 1)

    @property
    def tau_grid(self) -> np.ndarray:
        return self.tau_min + self.spacing * np.arange(len(self.samples))

    def _get_spline(self) -> CubicSpline:
        if object.__getattribute__(self, "_spline") is None:
            spline = CubicSpline(self.tau_grid, self.samples)
            object.__setattr__(self, "_spline", spline)
        return object.__getattribute__(self, "_spline")

    def value(self, tau) -> np.ndarray:
        """Cubic-spline evaluation; raises RangeExceeded outside the window."""
        tau = np.asarray(tau, dtype=np.float64)
        if np.any(tau < self.tau_min - 1e-12) or np.any(tau > self.tau_max + 1e-12):
            raise RangeExceeded(
                f"tau outside stored window [{self.tau_min}, {self.tau_max}]")
        return self._get_spline()(tau)

    def __neg__(self) -> "Profile":
        return Profile(self.tau_min, self.spacing, -self.samples)

    def l1(self) -> float:
        return float(self.spacing * np.sum(np.abs(self.samples)))

    def lq(self, q: float) -> float:
        if np.isinf(q):
            return float(np.max(np.abs(self.samples)))
        return float((self.spacing * np.sum(np.abs(self.samples) ** q)) ** (1.0 / q))


def _window_profile(grid: RadialGrid, cos_coeffs, sin_coeffs, tau_min: float,
                    tau_max: float, oversample: int) -> Profile:
    """Sample a mixed mode series on an aligned tau window.

    The window grid has spacing h/oversample and its nodes are integer
    multiples of the spacing, so samples are exact FFT values of the periodic
    series (no interpolation in the construction itself).
    """
    if tau_max <= tau_min:
        raise ValueError("empty tau window")
    dt = grid.spacing / oversample
    n_s = 2 * grid.point_count * oversample
    period = periodic_series(grid, cos_coeffs, sin_coeffs, n_s)
    k_min = int(np.floor(tau_min / dt))
    k_max = int(np.ceil(tau_max / dt))
    idx = np.arange(k_min, k_max + 1) % n_s
    return Profile(k_min * dt, dt, period[idx])


def profile_sine(h: SpectralField, tau_min: float | None = None,
                 tau_max: float | None = None, oversample: int = 4) -> Profile:
    """W_s[uhat] for the field represented by h, on a tau window.

    Defaults to one full period [-R, R).
    """
    g = h.grid
    if tau_min is None:
        tau_min = -g.radius_max
    if tau_max is None:
        tau_max = g.radius_max
    return _window_profile(g, None, 0.5 * h.coefficients, tau_min, tau_max, oversample)


def profile_cosine(h: SpectralField, tau_min: float | None = None,
                   tau_max: float | None = None, oversample: int = 4) -> Profile:
    """W_c[uhat] for the field represented by h, on a tau window."""
    g = h.grid
    if tau_min is None:
        tau_min = -g.radius_max
    if tau_max is None:
        tau_max = g.radius_max
    return _window_profile(g, 0.5 * h.coefficients, None, tau_min, tau_max, oversample)


def _cone_window(grid: RadialGrid, horizon: float) -> tuple[float, float]:
    m = 4.0 * grid.spacing
    return -(horizon + grid.radius_max) - m, (horizon + grid.radius_max) + m


def in_out_profile_coeffs(data: WaveData) -> tuple[np.ndarray, np.ndarray]:
    """(cos, sin) coefficients of W_in; W_out is the negation.

    W_in[F] = W_s[fhat] - W_c[rho^{-1} ghat] for the free wave F with data
    (f, g); on mode coefficients that is sin-part c_f/2, cos-part -d_g/(2 rho).
    """
    cf, cg = data.coefficients()
    rho = data.grid.frequencies
    return -0.5 * cg.coefficients / rho, 0.5 * cf.coefficients


def in_out_decompose(data: WaveData, horizon: float,
                     oversample: int = 4) -> tuple[Profile, Profile]:
    """Incoming/outgoing profiles of the free wave of `data`.

    Covers tau in [-(T+R)-4h, (T+R)+4h] so that reconstruction over |t| <= T
    never extrapolates.  The two returned profiles satisfy w_in = -w_out
    pointwise.
    """
    a, b = in_out_profile_coeffs(data)
    lo, hi = _cone_window(data.grid, horizon)
    w_in = _window_profile(data.grid, a, b, lo, hi, oversample)
    return w_in, -w_in


def gradient_profiles(data: WaveData, horizon: float,
                      oversample: int = 4) -> tuple[Profile, Profile]:
    """Profiles entering the radial-derivative identity

        d_r F = -F/r + (1/r) (w_out_grad(t-r) + w_in_grad(t+r)).

    Both equal W_c[rho fhat] + W_s[ghat]; differentiating W_in and -W_out in
    tau forces the same series for the two directions.
    """
    cf, cg = data.coefficients()
    rho = data.grid.frequencies
    a = 0.5 * rho * cf.coefficients
    b = 0.5 * cg.coefficients
    lo, hi = _cone_window(data.grid, horizon)
    w_in_grad = _window_profile(data.grid, a, b, lo, hi, oversample)
    w_out_grad = Profile(w_in_grad.tau_min, w_in_grad.spacing,
                         w_in_grad.samples.copy())
    return w_in_grad, w_out_grad


def reconstruct(w_in: Profile, w_out: Profile, t: float, grid: RadialGrid) -> RadialField:
    """F(t, r) = (1/r) (w_in(t + r) + w_out(t - r)) on the grid nodes."""
    r = grid.nodes
    vals = (w_in.value(t + r) + w_out.value(t - r)) / r
    return RadialField(grid, vals)


# ---------------------------------------------------------------------------
# characteristic sampler: fast exact evaluation of free waves on lattices


class CharacteristicSampler:
    """Evaluate the free wave of `data` at lattice points (t, r_j).

    Times must be multiples of h/oversample.  Uses the characteristic form
    w(t, r) = A(r+t) + B(r-t) with A, B sampled once per period, so a batch of
    space-time values is two gathers instead of a transform per time.
    """

    def __init__(self, data: WaveData, oversample: int = 4):
        self.grid = data.grid
        self.oversample = int(oversample)
        cf, cg = data.coefficients()
        self.cf = cf.coefficients
        self.cg = cg.coefficients
        rho = self.grid.frequencies
        half_c = 0.5 * self.cf
        half_d = 0.5 * self.cg / rho
        self.n_s = 2 * self.grid.point_count * self.oversample
        # w(t,r) = (s(r+t)+s(r-t))/2 + (C(r-t)-C(r+t))/2 = A(r+t) + B(r-t)
        self.A = periodic_series(self.grid, -half_d, half_c, self.n_s)
        self.B = periodic_series(self.grid, half_d, half_c, self.n_s)
        self.dt = self.grid.spacing / self.oversample

    def time_index(self, t: float) -> int:
        k = round(t / self.dt)
        if abs(k * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not aligned to the lattice h/oversample")
        return int(k)

    def reduced_field(self, t_indices: np.ndarray, j_nodes: np.ndarray) -> np.ndarray:
        """w(t, r) for t = t_indices * (h/oversample), r = j_nodes * h.

        Returns an array of shape (len(t_indices), len(j_nodes)).
        """
        jk = (np.asarray(j_nodes, dtype=np.int64) * self.oversample)[None, :]
        a = np.asarray(t_indices, dtype=np.int64)[:, None]
        return (self.A[(jk + a) % self.n_s] + self.B[(jk - a) % self.n_s])

    def state(self, t: float) -> WaveState:
        """Full WaveState at time t via the exact mode rotation."""
        rho = self.grid.frequencies
        at, bt = rotate_pair(self.cf, self.cg, rho, t)
        return WaveState(
            t,
            inverse_transform(SpectralField(self.grid, at)),
            inverse_transform(SpectralField(self.grid, bt)),
        )


def spacetime_norm(data: WaveData, q: float, p: float, alpha: float,
                   t_max: float, t_min: float = 0.0,
                   points_per_unit_time: float = 64.0,
                   support_radius: float | None = None,
                   bulk_radius: float = 0.0,
                   oversample: int | None = None,
                   t_block: int = 128) -> float:
    """|| |x|^alpha W ||_{L^q_t L^p_x} of the free wave W of `data` on [t_min, t_max].

    The time grid has spacing h/oversample with oversample chosen to meet
    `points_per_unit_time`.  When `support_radius` is given, the spatial
    reduction at time t is restricted to |r - t| <= support_radius together
    with the fixed bulk r <= bulk_radius; for spatially concentrated data this
    is exact to the data's own tails and much faster than the full grid.
    """
    grid = data.grid
    h = grid.spacing
    if oversample is None:
        oversample = max(1, int(np.ceil(points_per_unit_time * h)))
    sampler = CharacteristicSampler(data, oversample=oversample)
    dt = sampler.dt
    k_min = int(np.ceil(t_min / dt - 1e-9))
    k_max = int(np.floor(t_max / dt + 1e-9))
    t_indices = np.arange(k_min, k_max + 1)
    n_j = grid.point_count - 1
    r = grid.nodes

    reduce_vals = np.empty(len(t_indices))
    exponent = None if np.isinf(p) else alpha * p + 2.0 - p
    for lo in range(0, len(t_indices), t_block):
        chunk = t_indices[lo : lo + t_block]
        if support_radius is None:
            j_sel = np.arange(1, n_j + 1)
        else:
            t_lo, t_hi = chunk[0] * dt, chunk[-1] * dt
            j_a = max(1, int((t_lo - support_radius) / h))
            j_b = min(n_j, int(np.ceil((t_hi + support_radius) / h)))
            j_bulk = min(n_j, int(np.ceil(bulk_radius / h)))
            if j_a <= j_bulk + 1:
                j_sel = np.arange(1, max(j_b, j_bulk) + 1)
            else:
                j_sel = np.concatenate([np.arange(1, j_bulk + 1),
                                        np.arange(j_a, j_b + 1)])
            if len(j_sel) == 0:
                reduce_vals[lo : lo + len(chunk)] = 0.0
                continue
        w = sampler.reduced_field(chunk, j_sel)
        rj = r[j_sel - 1]
        if np.isinf(p):
            vals = np.max(np.abs(w) * rj ** (alpha - 1.0), axis=1)
        else:
            dens = np.abs(w) ** p * rj**exponent
            vals = (4.0 * np.pi * h * np.sum(dens, axis=1)) ** (1.0 / p)
        reduce_vals[lo : lo + len(chunk)] = vals

    if np.isinf(q):
        return float(np.max(reduce_vals))
    return float(np.trapezoid(reduce_vals**q, dx=dt) ** (1.0 / q))
