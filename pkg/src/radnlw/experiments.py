"""Monte Carlo exponent regressions, identity suites, bootstrap tracking,
and the scattering detector.

Regressions fit log2 of trial-averaged norms against log2 of the dyadic shell
frequency (or the band width delta).  A claim passes only by its stored
tolerance: |measured - predicted| <= tol for two-sided claims, decay at least
as strong as predicted - tol for one-sided upper bounds, and always
standard error <= tol/2.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleTriple, InsufficientTrials
from .functionals import (
    NormParams,
    energy,
    interaction_flux_term,
    morawetz_term,
    y_norm,
    z_norm,
)
from .linear import profile_lq_period_norm, rotate_pair, spacetime_norm
from .nlw import Trajectory, evolve
from .randomize import RandomizationParams, WaveData, shell_gaussians, shell_indices
from .spectral import (
    RadialGrid,
    SpectralField,
    forward_transform,
    sobolev_norm,
)

__all__ = [
    "McConfig",
    "RegressionReport",
    "BootstrapLedger",
    "mc_strichartz",
    "mc_profile_decay",
    "refined_strichartz_delta_sweep",
    "verify_identities",
    "bootstrap_track",
    "scattering_check",
    "shell_bump_coefficients",
]

MIN_SLOPE_TRIALS = 100


def worker_count(requested=None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("RADNLW_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int
    shell_ladder: tuple
    gamma: float
    q: float
    p: float
    alpha: float
    t_window: float
    sigma_set: tuple = (2, 4, 8, 16)
    radius_max: float = 64.0
    point_count: int = 8192
    support_radius: float | None = None
    bulk_radius: float = 16.0
    points_per_unit_factor: float = 4.0
    workers: int | None = None

    def __post_init__(self):
        ladder = tuple(self.shell_ladder)
        if len(ladder) < 2:
            raise ValueError("shell ladder needs at least two points")
        if np.log2(max(ladder) / min(ladder)) < 4 - 1e-12:
            raise ValueError("shell ladder must span at least 4 octaves")
        for n in ladder:
            if n < 1 or (int(n) & (int(n) - 1)) != 0:
                raise ValueError("shell ladder must be dyadic")

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.radius_max, self.point_count)


@dataclass
class RegressionReport:
    measured_slope: float
    stderr: float
    predicted_slope: float
    tolerance: float
    mode: str  # "two_sided" or "decay_at_least"
    per_shell: dict
    passed: bool = field(init=False)
    extras: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode == "two_sided":
            ok = abs(self.measured_slope - self.predicted_slope) <= self.tolerance
        elif self.mode == "decay_at_least":
            ok = self.measured_slope >= self.predicted_slope - self.tolerance
        else:
            raise ValueError(f"unknown regression mode {self.mode!r}")
        self.passed = bool(ok and self.stderr <= 0.5 * self.tolerance)

    def as_dict(self) -> dict:
        return {
            "measured_slope": self.measured_slope,
            "stderr": self.stderr,
            "predicted_slope": self.predicted_slope,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "passed": self.passed,
            "per_shell": {str(k): v for k, v in self.per_shell.items()},
            "extras": self.extras,
            "config": self.config,
        }


def fit_log2_slope(x, y, y_se=None):
    """Least-squares slope of y vs x with propagated standard error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xbar = x.mean()
    sxx = np.sum((x - xbar) ** 2)
    coef = (x - xbar) / sxx
    slope = float(np.sum(coef * y))
    if y_se is None:
        resid = y - (y.mean() + slope * (x - xbar))
        dof = max(len(x) - 2, 1)
        se = float(np.sqrt(np.sum(resid**2) / dof / sxx))
    else:
        se = float(np.sqrt(np.sum(coef**2 * np.asarray(y_se) ** 2)))
    return slope, se


def shell_bump_coefficients(grid: RadialGrid, n_shell: float) -> np.ndarray:
    """L^2-normalized smooth dyadic-shell data (the LP bump as envelope)."""
    from .spectral import BandSpec

    rho = grid.frequencies
    env = BandSpec.dyadic(int(n_shell)).symbol(rho)
    c = env.copy()
    norm = np.sqrt(2.0 * np.pi * grid.radius_max * np.sum(c**2))
    if norm == 0.0:
        raise ValueError(f"shell {n_shell} is empty on this grid")
    return c / norm


def _randomized_coeffs(base: np.ndarray, k_of_mode: np.ndarray,
                       params: RandomizationParams, trial: int) -> np.ndarray:
    gains = shell_gaussians(params, trial, 0)
    return base * gains[np.minimum(k_of_mode, params.shell_max - 1)]


def _strichartz_trial(args) -> float:
    (base, k_of_mode, rparams, trial, radius_max, point_count,
     q, p, alpha, t_window, ppu, support_radius, bulk_radius) = args
    grid = RadialGrid(radius_max, point_count)
    c = _randomized_coeffs(base, k_of_mode, rparams, trial)
    data = WaveData.from_coefficients(SpectralField(grid, c),
                                      SpectralField(grid, np.zeros_like(c)))
    return spacetime_norm(data, q, p, alpha, t_max=t_window,
                          points_per_unit_time=ppu,
                          support_radius=support_radius,
                          bulk_radius=bulk_radius)


def _map_trials(fn, arglist, workers: int):
    if workers <= 1 or len(arglist) < 4:
        return [fn(a) for a in arglist]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, arglist, chunksize=max(1, len(arglist) // (4 * workers))))


def mc_strichartz(cfg: McConfig, predicted_slope: float, tolerance: float = 0.1,
                  mode: str = "two_sided") -> RegressionReport:
    """Slope of E_omega || |x|^alpha W f_N^omega ||_{L^q_t L^p_x} against N.

    Shell data is the L^2-normalized smooth dyadic bump; each trial draws the
    annular Gaussians of the radial randomization and evaluates the space-time
    norm of the free wave cos(t|grad|) f^omega_N on [0, t_window].
    """
    if cfg.trials < MIN_SLOPE_TRIALS:
        raise InsufficientTrials(
            f"slope claims need >= {MIN_SLOPE_TRIALS} trials, got {cfg.trials}")
    grid = cfg.grid
    workers = worker_count(cfg.workers)

    per_shell = {}
    means, ses, all_samples = [], [], {}
    for n_shell in cfg.shell_ladder:
        base = shell_bump_coefficients(grid, n_shell)
        k_of_mode = shell_indices(grid, cfg.gamma)
        shell_top = int(np.ceil((2.0 * n_shell) ** (1.0 / cfg.gamma))) + 1
        rparams = RandomizationParams(gamma=cfg.gamma, shell_max=shell_top,
                                      seed=cfg.seed)
        ppu = max(64.0, cfg.points_per_unit_factor * n_shell)
        args = [(base, k_of_mode, rparams, t, cfg.radius_max, cfg.point_count,
                 cfg.q, cfg.p, cfg.alpha, cfg.t_window, ppu,
                 cfg.support_radius, cfg.bulk_radius)
                for t in range(cfg.trials)]
        samples = np.array(_map_trials(_strichartz_trial, args, workers))
        mean = samples.mean()
        se = samples.std(ddof=1) / np.sqrt(len(samples))
        per_shell[int(n_shell)] = {"mean": float(mean), "var": float(samples.var(ddof=1)),
                                   "count": int(len(samples))}
        means.append(mean)
        ses.append(se)
        all_samples[int(n_shell)] = samples

    x = np.log2(np.asarray(cfg.shell_ladder, dtype=float))
    y = np.log2(means)
    y_se = np.asarray(ses) / (np.asarray(means) * np.log(2.0))
    slope, se = fit_log2_slope(x, y, y_se)

    top = max(all_samples)
    moments = {}
    for sig in cfg.sigma_set:
        msig = float(np.mean(all_samples[top] ** sig) ** (1.0 / sig))
        moments[int(sig)] = msig / np.sqrt(sig)
    ratios = np.array(list(moments.values()))
    # the sqrt(sigma) law is an upper bound: growth above the envelope fails,
    # concentration below it (typical for many-shell data) passes
    base = moments[min(cfg.sigma_set)]
    moment_drift = float(ratios.max() / base) if base > 0 else np.inf

    return RegressionReport(
        measured_slope=slope, stderr=se, predicted_slope=predicted_slope,
        tolerance=tolerance, mode=mode, per_shell=per_shell,
        extras={"moment_ratio_by_sigma": moments, "moment_drift": moment_drift},
        config={"trials": cfg.trials, "seed": cfg.seed, "gamma": cfg.gamma,
                "ladder": list(cfg.shell_ladder), "q": cfg.q,
                "p": None if np.isinf(cfg.p) else cfg.p, "alpha": cfg.alpha,
                "t_window": cfg.t_window, "radius_max": cfg.radius_max,
                "point_count": cfg.point_count},
    )


def _profile_trial(args) -> float:
    base, k_of_mode, rparams, trial, radius_max, point_count, q = args
    grid = RadialGrid(radius_max, point_count)
    c = _randomized_coeffs(base, k_of_mode, rparams, trial)
    return profile_lq_period_norm(grid, None, 0.5 * c, q)


def mc_profile_decay(cfg: McConfig, predicted_slope: float,
                     tolerance: float = 0.1,
                     mode: str = "two_sided") -> RegressionReport:
    """Slope of E_omega || W_s[f_N^omega] ||_{L^q_tau} against N."""
    if cfg.trials < MIN_SLOPE_TRIALS:
        raise InsufficientTrials(
            f"slope claims need >= {MIN_SLOPE_TRIALS} trials, got {cfg.trials}")
    grid = cfg.grid
    workers = worker_count(cfg.workers)
    per_shell, means, ses = {}, [], []
    for n_shell in cfg.shell_ladder:
        base = shell_bump_coefficients(grid, n_shell)
        k_of_mode = shell_indices(grid, cfg.gamma)
        shell_top = int(np.ceil((2.0 * n_shell) ** (1.0 / cfg.gamma))) + 1
        rparams = RandomizationParams(gamma=cfg.gamma, shell_max=shell_top,
                                      seed=cfg.seed)
        args = [(base, k_of_mode, rparams, t, cfg.radius_max, cfg.point_count,
                 cfg.q) for t in range(cfg.trials)]
        samples = np.array(_map_trials(_profile_trial, args, workers))
        per_shell[int(n_shell)] = {"mean": float(samples.mean()),
                                   "var": float(samples.var(ddof=1)),
                                   "count": int(len(samples))}
        means.append(samples.mean())
        ses.append(samples.std(ddof=1) / np.sqrt(len(samples)))

    x = np.log2(np.asarray(cfg.shell_ladder, dtype=float))
    y = np.log2(means)
    y_se = np.asarray(ses) / (np.asarray(means) * np.log(2.0))
    slope, se = fit_log2_slope(x, y, y_se)
    return RegressionReport(
        measured_slope=slope, stderr=se, predicted_slope=predicted_slope,
        tolerance=tolerance, mode=mode, per_shell=per_shell,
        config={"trials": cfg.trials, "seed": cfg.seed, "gamma": cfg.gamma,
                "ladder": list(cfg.shell_ladder), "q": cfg.q,
                "norm": "profile_Lq_tau", "radius_max": cfg.radius_max,
                "point_count": cfg.point_count},
    )


# ---------------------------------------------------------------------------
# refined Strichartz delta sweep (deterministic)


def check_admissible(q: float, p: float, alpha: float):
    """Admissibility window of the weighted radial estimate in d = 3."""
    d = 3.0
    if np.isinf(q) and np.isinf(p):
        ok = 0.0 <= alpha <= (d - 1) / 2.0
    elif np.isinf(p):
        ok = (2.0 <= q) and (0.0 <= alpha < (d - 1) / 2.0 - 1.0 / q)
    elif np.isinf(q):
        ok = (2.0 <= p) and (-d / p < alpha <= (d - 1) * (0.5 - 1.0 / p))
    else:
        ok = (2.0 <= q) and (2.0 <= p) and \
            (-d / p < alpha < (d - 1) * (0.5 - 1.0 / p) - 1.0 / q)
    if not ok:
        raise InadmissibleTriple(f"(q, p, alpha) = ({q}, {p}, {alpha})")


def refined_strichartz_delta_sweep(q: float, p: float, alpha: float,
                                   delta_ladder=None,
                                   radius_max: float = 4096.0,
                                   point_count: int = 32768,
                                   band_base: float = 1.0,
                                   t_window: float = 2048.0,
                                   tolerance: float = 0.1,
                                   mode: str = "decay_at_least") -> RegressionReport:
    """Norm-vs-delta slope for flat-phase indicator bands uhat = chi_[a, a+delta a].

    Deterministic worst-case-flavoured data; predicted exponent
    1/2 - 1/min(p, q).
    """
    check_admissible(q, p, alpha)
    if delta_ladder is None:
        delta_ladder = tuple(2.0**-k for k in range(1, 7))
    grid = RadialGrid(radius_max, point_count)
    rho = grid.frequencies
    vals = []
    for delta in delta_ladder:
        band = (rho >= band_base) & (rho < band_base * (1.0 + delta))
        c = np.where(band, np.sqrt(2.0 * np.pi) * rho / grid.radius_max, 0.0)
        l2 = np.sqrt(2.0 * np.pi * grid.radius_max * np.sum(c**2))
        data = WaveData.from_coefficients(SpectralField(grid, c),
                                          SpectralField(grid, np.zeros_like(c)))
        coherence = 4.0 / (band_base * min(delta_ladder))
        norm = spacetime_norm(data, q, p, alpha, t_max=t_window,
                              points_per_unit_time=16.0,
                              support_radius=coherence,
                              bulk_radius=coherence)
        vals.append(norm / l2)

    slope, se = fit_log2_slope(np.log2(delta_ladder), np.log2(vals))
    predicted = 0.5 - 1.0 / min(p, q)
    return RegressionReport(
        measured_slope=slope, stderr=se, predicted_slope=predicted,
        tolerance=tolerance, mode=mode,
        per_shell={f"delta=2^-{k}": {"mean": float(v), "var": 0.0, "count": 1}
                   for k, v in enumerate(vals)},
        extras={"normalized_values": [float(v) for v in vals]},
        config={"q": q, "p": None if np.isinf(p) else p, "alpha": alpha,
                "delta_ladder": [float(d) for d in delta_ladder],
                "radius_max": radius_max, "point_count": point_count,
                "t_window": t_window},
    )


# ---------------------------------------------------------------------------
# identity suite for one scenario


IDENTITY_TOLERANCES = {
    "energy_drift": 1e-6,
    "energy_increment": 1e-4,
    "morawetz_identity": 1e-3,
    "flux_slack": 1e-5,
}


def verify_identities(scenario, tau_ladder=None, tolerances=None) -> dict:
    """Run one scenario and evaluate every identity/monotonicity check.

    Returns per-check dicts carrying value, tolerance, and pass flag; unforced
    scenarios additionally check energy conservation, forced ones the
    increment identity against the work accumulator.
    """
    from .functionals import (
        cone_flux,
        energy,
        energy_increment_residual,
        local_energy,
        morawetz_identity_residual,
    )

    tol = dict(IDENTITY_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    traj = evolve(scenario.init, scenario.forcing, scenario.solver)
    horizon = float(traj.times[-1])
    interval = (0.0, horizon)
    out = {}

    es = np.array([energy(s) for s in traj.states])
    scale = max(float(es[0]), 1.0)
    if scenario.forcing is None:
        drift = float(np.max(np.abs(es - es[0]))) / max(float(es[0]), 1e-300) \
            if es[0] > 0 else 0.0
        out["energy_drift"] = {"value": drift, "tolerance": tol["energy_drift"],
                               "passed": drift <= tol["energy_drift"]}

    inc = energy_increment_residual(traj, interval)
    rel = abs(inc["residual"]) / inc["scale"]
    out["energy_increment"] = {"value": rel, "tolerance": tol["energy_increment"],
                               "passed": rel <= tol["energy_increment"]}

    mor = morawetz_identity_residual(traj, interval)
    rel = abs(mor["residual"]) / mor["scale"] if mor["scale"] > 0 else 0.0
    out["morawetz_identity"] = {"value": rel,
                                "tolerance": tol["morawetz_identity"],
                                "passed": rel <= tol["morawetz_identity"]}

    if scenario.forcing is None:
        if tau_ladder is None:
            tau_ladder = np.linspace(-0.6 * scenario.grid.radius_max, -2.0, 16)
        i0, i1 = traj.index_range(interval)
        worst = -np.inf
        for tau in tau_ladder:
            fl = cone_flux(traj, tau, interval)
            ea = local_energy(traj.states[i0], traj.times[i0] - tau)
            eb = local_energy(traj.states[i1], traj.times[i1] - tau)
            worst = max(worst, (fl - (eb - ea)) / scale)
        out["flux_slack"] = {"value": float(worst),
                             "tolerance": tol["flux_slack"],
                             "passed": worst <= tol["flux_slack"]}
    out["all_passed"] = all(v["passed"] for k, v in out.items()
                            if isinstance(v, dict))
    return out


# ---------------------------------------------------------------------------
# bootstrap ledger


@dataclass
class BootstrapLedger:
    intervals: list
    energies: list
    morawetz: list
    flux_out: list
    flux_in: list
    y_norms: list
    z_norm: float
    ratios: list
    c_tilde: float
    y_refinement: dict

    def as_dict(self) -> dict:
        return {
            "intervals": [[float(a), float(b)] for a, b in self.intervals],
            "energies": self.energies,
            "morawetz": self.morawetz,
            "flux_out": self.flux_out,
            "flux_in": self.flux_in,
            "y_norms": self.y_norms,
            "z_norm": self.z_norm,
            "ratios": self.ratios,
            "c_tilde": self.c_tilde,
            "y_refinement": {str(k): v for k, v in self.y_refinement.items()},
        }


def bootstrap_track(traj: Trajectory, forcing: WaveData | None,
                    n_intervals: int, params: NormParams,
                    refinements=(1, 2, 4, 8)) -> BootstrapLedger:
    """Per-interval bootstrap quantities and the empirical chain constant.

    Reports (E_{j+1}+1)/(E_j+1) ratios, their max C~, and how the largest
    per-interval Y-norm shrinks under partition refinement.
    """
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    edges = np.linspace(t0, t1, n_intervals + 1)
    intervals = [(edges[j], edges[j + 1]) for j in range(n_intervals)]

    energies, moras, fo, fi, ys = [], [], [], [], []
    has_forcing = forcing is not None
    for iv in intervals:
        i0, i1 = traj.index_range(iv)
        energies.append(max(energy(traj.states[i]) for i in range(i0, i1 + 1)))
        moras.append(morawetz_term(traj, iv))
        if has_forcing:
            o, i_ = interaction_flux_term(traj, forcing, params, iv)
            fo.append(o)
            fi.append(i_)
            ys.append(y_norm(forcing, params, iv))
        else:
            fo.append(0.0)
            fi.append(0.0)
            ys.append(0.0)
    z = z_norm(forcing, params) if has_forcing else 0.0

    ratios = [(energies[j + 1] + 1.0) / (energies[j] + 1.0)
              for j in range(len(energies) - 1)]
    c_tilde = max(ratios) if ratios else 1.0

    y_refinement = {}
    for j_parts in refinements:
        e = np.linspace(t0, t1, j_parts + 1)
        if has_forcing:
            y_refinement[j_parts] = max(
                y_norm(forcing, params, (e[i], e[i + 1])) for i in range(j_parts))
        else:
            y_refinement[j_parts] = 0.0

    return BootstrapLedger(
        intervals=intervals,
        energies=[float(v) for v in energies],
        morawetz=[float(v) for v in moras],
        flux_out=[float(v) for v in fo],
        flux_in=[float(v) for v in fi],
        y_norms=[float(v) for v in ys],
        z_norm=float(z),
        ratios=[float(v) for v in ratios],
        c_tilde=float(c_tilde),
        y_refinement=y_refinement,
    )


# ---------------------------------------------------------------------------
# scattering detector


def scattering_check(traj: Trajectory, tail_fraction: float = 0.5) -> dict:
    """Cauchy property of free-propagator pullbacks over the trajectory tail.

    At each tail snapshot, (v, d_t v) is pulled back to t = 0 by the inverse
    free evolution; the report carries the Hdot^1 x L^2 decrements between
    consecutive checkpoints, whether the last four decrease monotonically,
    and the final decrement against E^{1/2}.
    """
    n = len(traj.states)
    start = int(np.floor(n * (1.0 - tail_fraction)))
    checkpoints = list(range(start, n))
    if len(checkpoints) < 16:
        raise ValueError("tail window must contain at least 16 snapshots")
    grid = traj.grid
    rho = grid.frequencies

    pulled = []
    for i in checkpoints:
        st = traj.states[i]
        cf = forward_transform(st.position).coefficients
        cg = forward_transform(st.velocity).coefficients
        a0, b0 = rotate_pair(cf, cg, rho, -float(traj.times[i]))
        pulled.append((a0, b0))

    decs = []
    for (a1, b1), (a2, b2) in zip(pulled[:-1], pulled[1:]):
        da = SpectralField(grid, a2 - a1)
        db = SpectralField(grid, b2 - b1)
        decs.append(np.sqrt(sobolev_norm(da, 1.0) ** 2 + sobolev_norm(db, 0.0) ** 2))

    e_scale = energy(traj.states[-1]) ** 0.5
    last4 = decs[-4:]
    monotone = all(last4[i + 1] <= last4[i] * (1.0 + 1e-9) for i in range(len(last4) - 1))
    return {
        "decrements": [float(d) for d in decs],
        "final_decrement": float(decs[-1]),
        "monotone_last4": bool(monotone),
        "energy_sqrt": float(e_scale),
        "checkpoint_times": [float(traj.times[i]) for i in checkpoints],
    }
