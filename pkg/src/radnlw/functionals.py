"""Bootstrap functionals: energy, local energy, Morawetz term, cone flux,
smoothed interaction-flux terms, Y/Z norms, and identity residuals.

Sign and constant conventions worked out for the reduced field w = r v:

  * energy density (ball integrand, per 4 pi dr):
        (1/2)[(w_r - w/r)^2 + w_t^2] + (1/6) w^6 / r^4
  * Morawetz multiplier: v_r + v/r = w_r / r, so the momentum functional is
        P(t) = int v_t (v_r + v/r) dx = 4 pi int w_t w_r dr
    and the identity reads, for radial solutions of the forced equation,
        (2/3) iint v^6/|x| + 2 pi int v(t,0)^2 dt
          = P(a) - P(b) - iint N (v_r + v/r) dx dt,
    with N = (v+F)^5 - v^5 and iint N (v_r + v/r) dx = 4 pi iint (r N) w_r dr.
  * cone measure: d sigma = 4 pi (t - tau)^2 dt along |x| = t - tau.
  * S_K kernel K<K tau>^{-2} has mass pi; the discrete kernel uses exact
    arctan cell integrals so S_K w -> pi w as K -> infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .errors import RangeExceeded
from .linear import (
    Profile,
    WaveState,
    in_out_profile_coeffs,
    linear_solution,
    periodic_series,
    profile_lq_period_norm,
    rotate_pair,
    spacetime_norm,
)
from .nlw import Trajectory, nonlinearity
from .randomize import WaveData
from .spectral import (
    BandSpec,
    RadialField,
    apply_band,
    forward_transform,
    origin_slope,
    radial_quad,
    sobolev_norm,
    weighted_norm,
)

__all__ = [
    "NormParams",
    "FunctionalReport",
    "energy",
    "local_energy",
    "morawetz_term",
    "cone_flux",
    "smooth_weight",
    "weighted_potential",
    "interaction_flux_term",
    "y_norm",
    "z_norm",
    "morawetz_identity_residual",
    "energy_increment_residual",
    "interaction_flux_budget",
    "functional_report",
]


@dataclass(frozen=True)
class NormParams:
    """Parameters of the Y/Z/interaction-flux machinery."""

    delta: float = 0.125
    gamma: float = 1.0
    dyadic_range: tuple = (8, 16, 32, 64, 128)
    k_ladder: tuple = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)
    p_set: tuple = (2, 4, 24)
    z_window: float = 8.0
    points_per_unit_time: float = 64.0

    def __post_init__(self):
        if not 0.0 < self.delta <= 0.25:
            raise ValueError("delta must lie in (0, 1/4]")
        if tuple(self.p_set) != (2, 4, 24):
            raise ValueError("p_set is pinned to (2, 4, 24)")
        for n in tuple(self.dyadic_range) + tuple(self.k_ladder):
            if n < 1 or (int(n) & (int(n) - 1)) != 0:
                raise ValueError("dyadic_range and k_ladder must be dyadic")


@dataclass
class FunctionalReport:
    energy_sup: float
    morawetz: float
    interaction_flux_out: float
    interaction_flux_in: float
    y_norm: float
    z_norm: float
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "energy_sup": self.energy_sup,
            "morawetz": self.morawetz,
            "interaction_flux_out": self.interaction_flux_out,
            "interaction_flux_in": self.interaction_flux_in,
            "y_norm": self.y_norm,
            "z_norm": self.z_norm,
            "residuals": dict(self.residuals),
        }


# ---------------------------------------------------------------------------
# pointwise/stateful building blocks


def _w_r_nodes(state: WaveState) -> np.ndarray:
    """w_r at nodes j = 0..N via the cosine series of rho*c."""
    g = state.grid
    c = forward_transform(state.position).coefficients
    n_s = 2 * g.point_count
    vals = periodic_series(g, g.frequencies * c, None, n_s)
    return vals[: g.point_count + 1]


def energy(state: WaveState) -> float:
    """E[v] = int |grad v|^2/2 + v_t^2/2 + v^6/6 dx (gradient term spectral)."""
    cf = forward_transform(state.position)
    cg = forward_transform(state.velocity)
    quad = 0.5 * (sobolev_norm(cf, 1.0) ** 2 + sobolev_norm(cg, 0.0) ** 2)
    pot = weighted_norm(state.position, 0.0, 6.0) ** 6 / 6.0
    return quad + pot


def _energy_density(state: WaveState) -> np.ndarray:
    """Ball-integrand samples at j = 0..N: r^2 * (energy density) against 4 pi dr."""
    g = state.grid
    w = state.position.reduced
    wt = state.velocity.reduced
    w_r = _w_r_nodes(state)
    grad = np.zeros(g.point_count + 1)
    grad[1:-1] = (w_r[1:-1] - w / g.nodes) ** 2
    kin = np.zeros_like(grad)
    kin[1:-1] = wt**2
    pot = np.zeros_like(grad)
    pot[1:-1] = w**6 / g.nodes**4
    return 0.5 * grad + 0.5 * kin + pot / 6.0


def local_energy(state: WaveState, radius: float) -> float:
    """Energy over the ball |x| <= radius; nondecreasing in radius."""
    g = state.grid
    if not 0.0 <= radius <= g.radius_max + 1e-12:
        raise ValueError("radius must lie in [0, R]")
    dens = _energy_density(state)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * g.spacing)))
    r_all = g.spacing * np.arange(g.point_count + 1)
    return float(4.0 * np.pi * np.interp(radius, r_all, cum))


def _interval_slice(traj: Trajectory, interval):
    i0, i1 = traj.index_range(interval)
    return range(i0, i1 + 1)


def morawetz_term(traj: Trajectory, interval) -> float:
    """A_I = || |x|^{-1/6} v ||_{L^6_{t,x}(I)}^6 by snapshot trapezoid."""
    idx = list(_interval_slice(traj, interval))
    vals = np.array([weighted_norm(traj.states[i].position, -1.0 / 6.0, 6.0) ** 6
                     for i in idx])
    return float(np.trapezoid(vals, x=traj.times[idx]))


def cone_flux(traj: Trajectory, tau: float, interval) -> float:
    """(1/6) int_{|x| = t - tau, t in I} v^6 dsigma with the sphere measure."""
    idx = list(_interval_slice(traj, interval))
    g = traj.grid
    vals = np.empty(len(idx))
    for k, i in enumerate(idx):
        t = traj.times[i]
        radius = t - tau
        if not 0.0 < radius < g.radius_max:
            raise RangeExceeded(f"cone radius {radius} outside (0, R) at t = {t}")
        w = traj.states[i].position.reduced
        spline = CubicSpline(np.concatenate(([0.0], g.nodes)),
                             np.concatenate(([0.0], w)))
        v_cone = float(spline(radius)) / radius
        vals[k] = v_cone**6 * 4.0 * np.pi * radius**2 / 6.0
    return float(np.trapezoid(vals, x=traj.times[idx]))


# ---------------------------------------------------------------------------
# smoothed weights and cone-weighted potentials


def smooth_weight(w: Profile, K: int) -> Profile:
    """S_K w: convolution with the mass-pi kernel K <K tau>^{-2}.

    The kernel is integrated exactly over grid cells (arctan differences), so
    the discrete operator keeps the kernel mass at every K, including K far
    above the grid Nyquist.
    """
    if np.any(w.samples < -1e-12 * max(1.0, np.max(np.abs(w.samples)))):
        raise ValueError("smooth_weight expects a nonnegative weight")
    d = w.spacing
    n = len(w.samples)
    m = np.arange(-(n - 1), n)
    # exact kernel mass over each tau cell; sums to pi minus truncated tails
    cell = np.arctan(K * (m * d + 0.5 * d)) - np.arctan(K * (m * d - 0.5 * d))
    out = fftconvolve(w.samples, cell, mode="valid")  # length n via 2n-1 kernel
    return Profile(w.tau_min, d, np.maximum(out, 0.0))


def weighted_potential(traj: Trajectory, w: Profile, direction: str,
                       interval) -> float:
    """iint w(t -+ |x|) v^6 dx dt over the interval (out: t-|x|, in: t+|x|)."""
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    sign = -1.0 if direction == "out" else 1.0
    idx = list(_interval_slice(traj, interval))
    g = traj.grid
    r = g.nodes
    vals = np.empty(len(idx))
    for k, i in enumerate(idx):
        t = traj.times[i]
        args = t + sign * r
        wvals = w.value(args)
        dens = traj.states[i].position.reduced ** 6 / r**4
        vals[k] = 4.0 * np.pi * radial_quad(wvals * dens, g.spacing)
    return float(np.trapezoid(vals, x=traj.times[idx]))


# ---------------------------------------------------------------------------
# forcing decompositions shared by the flux term and the norms


def _band_pair(forcing: WaveData, band: BandSpec) -> WaveData:
    cf, cg = forcing.coefficients()
    return WaveData.from_coefficients(apply_band(cf, band), apply_band(cg, band))


def _grad_profile_coeffs(data: WaveData):
    """(cos, sin) coefficients of W_c[rho fhat] + W_s[ghat].

    This is simultaneously the gradient profile of the wave of `data` and the
    in-profile of |grad| times its companion wave; the out-profiles are
    negations, so squared weights coincide.
    """
    cf, cg = data.coefficients()
    rho = data.grid.frequencies
    return 0.5 * rho * cf.coefficients, 0.5 * cg.coefficients


def _profile_from_coeffs(grid, a, b, horizon, oversample=4) -> Profile:
    from .linear import _window_profile, _cone_window

    lo, hi = _cone_window(grid, horizon)
    return _window_profile(grid, a, b, lo, hi, oversample)


def interaction_flux_term(traj: Trajectory, forcing: WaveData,
                          params: NormParams, interval) -> tuple[float, float]:
    """Assemble (F_out, F_in): dyadic sums of sup_K smoothed-weight potentials
    plus the unsmoothed |W[F]|^2 term."""
    g = traj.grid
    horizon = float(traj.times[-1])
    delta = params.delta
    gamma = params.gamma
    k_cap = [K for K in params.k_ladder if K <= g.nyquist] or [1]
    totals = {"out": 0.0, "in": 0.0}

    for N in params.dyadic_range:
        data_n = _band_pair(forcing, BandSpec.dyadic(int(N)))
        a, b = _grad_profile_coeffs(data_n)
        if not (np.any(a) or np.any(b)):
            continue
        base = _profile_from_coeffs(g, a, b, horizon)
        w_sq = Profile(base.tau_min, base.spacing, base.samples**2)
        weight_n = float(N) ** (-1.0 / (6.0 * gamma) + 2.0 * delta) \
            + float(N) ** (-2.0 + 2.0 * delta)
        for direction in ("out", "in"):
            best = 0.0
            for K in k_cap:
                sk = smooth_weight(w_sq, int(K))
                best = max(best, weighted_potential(traj, sk, direction, interval))
            # companion-wave family and gradient-profile family coincide for
            # exact linear forcing; the definition counts them separately
            totals[direction] += weight_n * best * 2.0

    a_f, b_f = in_out_profile_coeffs(forcing)
    full = _profile_from_coeffs(g, a_f, b_f, horizon)
    full_sq = Profile(full.tau_min, full.spacing, full.samples**2)
    for direction in ("out", "in"):
        totals[direction] += weighted_potential(traj, full_sq, direction, interval)
    return totals["out"], totals["in"]


# ---------------------------------------------------------------------------
# Y and Z norms


def _companion_grad_data(data_n: WaveData) -> WaveData:
    """Data of |grad| Ftilde_N: (g_N, -|grad|^2 f_N)."""
    cf, cg = data_n.coefficients()
    rho = data_n.grid.frequencies
    from .spectral import SpectralField

    return WaveData.from_coefficients(
        SpectralField(data_n.grid, cg.coefficients),
        SpectralField(data_n.grid, -(rho**2) * cf.coefficients),
    )


def _grad_data(data_n: WaveData) -> WaveData:
    """Data of |grad| F_N."""
    cf, cg = data_n.coefficients()
    rho = data_n.grid.frequencies
    from .spectral import SpectralField

    return WaveData.from_coefficients(
        SpectralField(data_n.grid, rho * cf.coefficients),
        SpectralField(data_n.grid, rho * cg.coefficients),
    )


def _has_content(data: WaveData) -> bool:
    cf, cg = data.coefficients()
    return bool(np.any(cf.coefficients) or np.any(cg.coefficients))


def y_norm(forcing: WaveData, params: NormParams, interval) -> float:
    """The eight-summand divisible space-time norm of the forcing on I."""
    a, b = float(interval[0]), float(interval[1])
    delta = params.delta
    gamma = params.gamma
    exp_main = -0.75 + 1.0 / (24.0 * gamma)

    def st(data, q, p, alpha, ppu):
        return spacetime_norm(data, q, p, alpha, t_max=b, t_min=a,
                              points_per_unit_time=ppu)

    shell_terms = {1: [], 2: [], 3: [], 4: []}
    weights = {1: [], 2: [], 3: [], 4: []}
    for N in params.dyadic_range:
        data_n = _band_pair(forcing, BandSpec.dyadic(int(N)))
        if not _has_content(data_n):
            continue
        ppu = max(params.points_per_unit_time, 8.0 * N)
        grad_tilde = _companion_grad_data(data_n)
        grad_n = _grad_data(data_n)
        shell_terms[1].append(st(grad_tilde, 8.0 / 3.0, np.inf, 3.0 / 8.0, ppu))
        weights[1].append(float(N) ** (exp_main + delta))
        shell_terms[2].append(st(grad_n, 8.0 / (3.0 - 2.0 * delta), 2.0 / delta,
                                 (3.0 + 2.0 * delta) / 8.0, ppu))
        weights[2].append(float(N) ** (exp_main + 2.5 * delta))
        shell_terms[3].append(st(grad_n, 6.0, 6.0, -1.0 / 6.0, ppu))
        weights[3].append(float(N) ** (-1.0 + delta))
        shell_terms[4].append(st(grad_tilde, 12.0, 12.0, 2.0 / 3.0, ppu))
        weights[4].append(float(N) ** (-1.0 + delta))

    def ell(values, wts, q):
        if not values:
            return 0.0
        arr = np.array(values) * np.array(wts)
        return float(np.sum(arr**q) ** (1.0 / q))

    total = ell(shell_terms[1], weights[1], 8.0 / 3.0)
    total += ell(shell_terms[2], weights[2], 8.0 / (3.0 - 2.0 * delta))
    total += ell(shell_terms[3], weights[3], 6.0)
    total += ell(shell_terms[4], weights[4], 12.0)

    ppu = max(params.points_per_unit_time,
              8.0 * max(params.dyadic_range, default=1))
    total += st(forcing, 4.0, np.inf, 0.25, ppu)
    total += st(forcing, 5.0, 10.0, 0.0, ppu)
    total += st(forcing, 6.0, 6.0, -1.0 / 6.0, ppu)
    total += st(forcing, 12.0, 12.0, 2.0 / 3.0, ppu)
    return total


def z_norm(forcing: WaveData, params: NormParams) -> float:
    """Global profile/uniform norms of the forcing.

    Profile L^p_tau pieces are exact period norms of globally defined mode
    sums; the two uniform pieces are evaluated on the window [-T_Z, T_Z].
    """
    g = forcing.grid
    delta = params.delta
    gamma = params.gamma
    total = 0.0

    for N in params.dyadic_range:
        data_n = _band_pair(forcing, BandSpec.dyadic(int(N)))
        if not _has_content(data_n):
            continue
        wt = float(N) ** (-1.0 / (12.0 * gamma) + 2.0 * delta) \
            + float(N) ** (-1.0 + delta)
        a, b = _grad_profile_coeffs(data_n)
        for p in params.p_set:
            lp = profile_lq_period_norm(g, a, b, float(p))
            # in and out profiles have equal |.|; the companion-wave family
            # and the gradient family coincide: 2 (directions) x 2 (families)
            total += 4.0 * wt * lp

    a_f, b_f = in_out_profile_coeffs(forcing)
    for p in params.p_set:
        total += 2.0 * profile_lq_period_norm(g, a_f, b_f, float(p))

    tz = params.z_window
    ppu = max(params.points_per_unit_time,
              8.0 * max(params.dyadic_range, default=1))
    for N in params.dyadic_range:
        data_n = _band_pair(forcing, BandSpec.dyadic(int(N)))
        if not _has_content(data_n):
            continue
        total += float(N) ** delta * spacetime_norm(
            data_n, np.inf, np.inf, 0.5, t_max=tz, t_min=-tz,
            points_per_unit_time=max(params.points_per_unit_time, 8.0 * N))
    total += spacetime_norm(forcing, np.inf, 6.0, 0.0, t_max=tz, t_min=-tz,
                            points_per_unit_time=ppu)
    return total


# ---------------------------------------------------------------------------
# identity residuals


def _forcing_state(forcing: WaveData | None, t: float) -> WaveState | None:
    if forcing is None:
        return None
    return linear_solution(forcing, t)


def energy_increment_residual(traj: Trajectory, interval) -> dict:
    """|E(b) - E(a) + iint N d_t v| from the dt-resolution work accumulator."""
    i0, i1 = traj.index_range(interval)
    e_a = energy(traj.states[i0])
    e_b = energy(traj.states[i1])
    if traj.forcing_work is None:
        work = 0.0
    else:
        work = float(traj.forcing_work[i1] - traj.forcing_work[i0])
    residual = e_b - e_a + work
    return {
        "lhs": e_b - e_a,
        "rhs": -work,
        "residual": residual,
        "scale": max(e_a, 1.0),
    }


def morawetz_identity_residual(traj: Trajectory, interval) -> dict:
    """Residual of the radial Morawetz identity; returns both sides and terms."""
    idx = list(_interval_slice(traj, interval))
    g = traj.grid
    r = g.nodes
    times = traj.times[idx]

    pot_w = np.empty(len(idx))   # 4 pi int r v^6 dr (= iint v^6/|x| dx integrand)
    origin = np.empty(len(idx))  # v(t, 0)^2
    p_mom = np.empty(len(idx))   # P(t) = 4 pi int w_t w_r dr
    err_rate = np.empty(len(idx))

    for k, i in enumerate(idx):
        st = traj.states[i]
        w = st.position.reduced
        wt = st.velocity.reduced
        w_r = _w_r_nodes(st)
        v0 = origin_slope(w, g.spacing)
        vt0 = origin_slope(wt, g.spacing)
        pot_w[k] = 4.0 * np.pi * radial_quad(w**6 / r**5, g.spacing, d0=v0**6)
        origin[k] = v0 * v0
        # d/dr (w_t w_r) at the origin is v_t(0) v(0); the wall slope is 0
        p_mom[k] = 4.0 * np.pi * radial_quad(wt * w_r[1:-1], g.spacing,
                                             d0=vt0 * v0)
        if traj.forcing is None:
            err_rate[k] = 0.0
        else:
            fstate = _forcing_state(traj.forcing, traj.times[i])
            F = fstate.position
            f0 = origin_slope(F.reduced, g.spacing)
            n0 = (v0 + f0) ** 5 - v0**5
            rn = nonlinearity(st.position, F).values * r  # r * N
            err_rate[k] = 4.0 * np.pi * radial_quad(rn * w_r[1:-1], g.spacing,
                                                    d0=n0 * v0)

    lhs = (2.0 / 3.0) * np.trapezoid(pot_w, x=times) \
        + 2.0 * np.pi * np.trapezoid(origin, x=times)
    boundary = p_mom[0] - p_mom[-1]
    err = np.trapezoid(err_rate, x=times)
    rhs = boundary - err
    e_scale = max(energy(traj.states[idx[0]]), abs(lhs))
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "residual": float(lhs - rhs),
        "boundary": float(boundary),
        "nonlinear_term": float(err),
        "scale": float(e_scale),
    }


# ---------------------------------------------------------------------------
# interaction flux budget (proof-exact constants)


def interaction_flux_budget(traj: Trajectory, forcing: WaveData,
                            weight: Profile, direction: str, interval) -> dict:
    """Both sides of the cone-weighted potential bound with explicit constants.

    lhs = iint w(t -+ |x|) v^6;  budget = 6 [ 2 ||w||_1 E* +
    2 ||w||_1 ||F||_{L^inf L^6} (6 E*)^{5/6} + |iint W (d_t F) v^5| +
    |iint w(t -+ |x|) F v^5| + 10 ||w||_1 iint F^2 (|F|+|v|)^3 |v_t| ],
    where W is the running integral of w from the appropriate cone end and
    E* the energy sup on the interval.
    """
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    sign = -1.0 if direction == "out" else 1.0
    idx = list(_interval_slice(traj, interval))
    g = traj.grid
    r = g.nodes
    times = traj.times[idx]

    lhs = weighted_potential(traj, weight, direction, interval)
    w_l1 = weight.l1()
    cums = np.concatenate(([0.0], np.cumsum(
        0.5 * (weight.samples[1:] + weight.samples[:-1]) * weight.spacing)))
    if direction == "out":
        big_w = Profile(weight.tau_min, weight.spacing, cums)
    else:
        big_w = Profile(weight.tau_min, weight.spacing, cums[-1] - cums)

    e_sup = max(energy(traj.states[i]) for i in idx)
    f_l6 = 0.0
    t_mid = np.empty(len(idx))
    t_wf = np.empty(len(idx))
    t_lower = np.empty(len(idx))
    for k, i in enumerate(idx):
        st = traj.states[i]
        t = traj.times[i]
        fstate = linear_solution(forcing, t)
        F = fstate.position.values
        dtF = fstate.velocity.values
        f_l6 = max(f_l6, weighted_norm(fstate.position, 0.0, 6.0))
        v = st.position.values
        vt = st.velocity.values
        args = t + sign * r
        v5r2 = v**5 * r**2
        t_mid[k] = 4.0 * np.pi * radial_quad(
            big_w.value(args) * dtF * v5r2, g.spacing)
        t_wf[k] = 4.0 * np.pi * radial_quad(
            weight.value(args) * F * v5r2, g.spacing)
        t_lower[k] = 4.0 * np.pi * radial_quad(
            F**2 * (np.abs(F) + np.abs(v)) ** 3 * np.abs(vt) * r**2, g.spacing)

    term_energy = 2.0 * w_l1 * e_sup
    term_boundary = 2.0 * w_l1 * f_l6 * (6.0 * e_sup) ** (5.0 / 6.0)
    term_mid = abs(float(np.trapezoid(t_mid, x=times)))
    term_wf = abs(float(np.trapezoid(t_wf, x=times)))
    term_lower = 10.0 * w_l1 * float(np.trapezoid(t_lower, x=times))
    budget = 6.0 * (term_energy + term_boundary + term_mid + term_wf + term_lower)
    return {
        "lhs": float(lhs),
        "budget": float(budget),
        "margin": float(budget - lhs),
        "terms": {
            "energy": term_energy,
            "boundary": term_boundary,
            "main_dtF": term_mid,
            "main_wF": term_wf,
            "lower_order": term_lower,
        },
    }


# ---------------------------------------------------------------------------
# aggregate report


def functional_report(traj: Trajectory, forcing: WaveData | None,
                      params: NormParams, interval) -> FunctionalReport:
    idx = list(_interval_slice(traj, interval))
    e_sup = max(energy(traj.states[i]) for i in idx)
    mora = morawetz_term(traj, interval)
    if forcing is not None and _has_content(forcing):
        f_out, f_in = interaction_flux_term(traj, forcing, params, interval)
        y = y_norm(forcing, params, interval)
        z = z_norm(forcing, params)
    else:
        f_out = f_in = y = z = 0.0
    residuals = {"energy_increment": energy_increment_residual(traj, interval)["residual"],
                 "morawetz_identity": morawetz_identity_residual(traj, interval)["residual"]}
    return FunctionalReport(
        energy_sup=e_sup,
        morawetz=mora,
        interaction_flux_out=f_out,
        interaction_flux_in=f_in,
        y_norm=y,
        z_norm=z,
        residuals=residuals,
    )
