"""Acceptance criteria: one callable per criterion, each returning a typed
pass/fail result at its pinned tolerance.

The verify suite covers criteria 1-9 and 12-13 (identities, monotonicity,
budgets, bootstrap, scattering); the mc suite covers 10-11 (probabilistic
slope regressions and the delta sweep).  Canonical scenario trajectories are
built once and shared through a cache dict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .config import RunConfig, build_scenario, load_config
from .experiments import (
    McConfig,
    bootstrap_track,
    fit_log2_slope,
    mc_profile_decay,
    mc_strichartz,
    refined_strichartz_delta_sweep,
    scattering_check,
)
from .functionals import (
    cone_flux,
    energy,
    energy_increment_residual,
    interaction_flux_budget,
    local_energy,
    morawetz_identity_residual,
    _band_pair,
    _grad_profile_coeffs,
    _profile_from_coeffs,
)
from .linear import (
    Profile,
    gradient_profiles,
    in_out_decompose,
    in_out_profile_coeffs,
    linear_solution,
    periodic_series,
    reconstruct,
)
from .nlw import SolverParams, evolve
from .randomize import (
    RandomizationParams,
    WaveData,
    sample_randomization,
    shell_gaussians,
    shell_indices,
)
from .spectral import (
    BandSpec,
    RadialField,
    RadialGrid,
    SpectralField,
    apply_band,
    forward_transform,
    fourier_values,
    inverse_transform,
    sobolev_norm,
)

__all__ = ["CriterionResult", "run_verify_suite", "run_mc_suite",
           "VERIFY_CRITERIA", "MC_CRITERIA", "format_result"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "details": self.details,
        }


def format_result(res: CriterionResult) -> str:
    tag = "PASS" if res.passed else "FAIL"
    return (f"[{res.number:02d}] {res.name:<28s} {tag}  "
            f"value={res.value:.3e}  tol={res.tolerance:.3e}")


def _band_limited_data(grid: RadialGrid, rho_max: float, seed: int,
                       decay: float = 0.5) -> WaveData:
    rng = np.random.default_rng(seed)
    rho = grid.frequencies
    cf = rng.standard_normal(len(rho)) * np.exp(-decay * rho)
    cg = rng.standard_normal(len(rho)) * np.exp(-decay * rho)
    cf[rho > rho_max] = 0.0
    cg[rho > rho_max] = 0.0
    return WaveData.from_coefficients(SpectralField(grid, cf),
                                      SpectralField(grid, cg))


# ---------------------------------------------------------------------------
# scenario cache


def _scenario_cfg(cfg: RunConfig, name: str) -> RunConfig:
    raw = dict(cfg.raw)
    raw["scenario"] = name
    return RunConfig(raw)


def get_cached_trajectory(cache: dict, cfg: RunConfig, name: str):
    key = f"traj:{name}"
    if key not in cache:
        sc = build_scenario(_scenario_cfg(cfg, name))
        if bool(cfg.get("verify", "oracle", default=False)):
            sc.solver = SolverParams(
                dt=sc.solver.dt, horizon=sc.solver.horizon,
                blowup_threshold=sc.solver.blowup_threshold,
                report_stride=1, dealias=sc.solver.dealias)
        cache[key] = (evolve(sc.init, sc.forcing, sc.solver), sc)
    return cache[key]


# ---------------------------------------------------------------------------
# criteria 1-9, 12-13


def criterion_transform_fidelity(cfg: RunConfig, cache: dict) -> CriterionResult:
    grid = cfg.grid
    data = _band_limited_data(grid, rho_max=grid.nyquist / 4.0, seed=101, decay=0.1)
    u = data.position
    back = inverse_transform(forward_transform(u))
    rt = np.max(np.abs(back.values - u.values)) / np.max(np.abs(u.values))

    g = RadialGrid(20.0, 4096)
    ug = RadialField(g, np.exp(-(g.nodes**2)))
    uhat = fourier_values(forward_transform(ug))
    rho = g.frequencies
    sel = np.where(rho <= 10.0)[0]
    probe = sel[:: max(1, len(sel) // 80)]
    oracle = np.array([
        np.sqrt(2.0 / np.pi) / rho[m]
        * quad(lambda r, k=rho[m]: np.sin(r * k) * r * np.exp(-r * r),
               0.0, 20.0, limit=400)[0]
        for m in probe])
    peak = np.max(np.abs(oracle))
    sup_rel = np.max(np.abs(uhat[probe] - oracle)) / peak
    good = np.abs(oracle) > 1e-4 * peak
    pt_rel = np.max(np.abs(uhat[probe][good] - oracle[good]) / np.abs(oracle[good]))

    passed = rt < 1e-12 and sup_rel < 1e-8 and pt_rel < 1e-8
    return CriterionResult(1, "transform_fidelity", passed,
                           float(max(sup_rel, pt_rel)), 1e-8,
                           {"round_trip": float(rt), "round_trip_tol": 1e-12,
                            "gaussian_sup_rel": float(sup_rel),
                            "gaussian_pointwise_rel": float(pt_rel)})


def criterion_randomization_isometry(cfg: RunConfig, cache: dict) -> CriterionResult:
    grid = cfg.grid
    rparams = cfg.randomization_params
    data = _band_limited_data(grid, rho_max=min(100.0, rparams.shell_max ** rparams.gamma),
                              seed=102, decay=0.1)
    data = WaveData(data.position, RadialField.zero(grid))
    cf = forward_transform(data.position)
    base = sobolev_norm(cf, 0.0) ** 2

    k_of_mode = shell_indices(grid, rparams.gamma)
    shell_mass = np.zeros(rparams.shell_max)
    mass = 2.0 * np.pi * grid.radius_max * cf.coefficients**2
    np.add.at(shell_mass, np.minimum(k_of_mode, rparams.shell_max - 1), mass)

    trials = 10_000
    samples = np.empty(trials)
    for t in range(trials):
        g = shell_gaussians(rparams, t, 0)
        samples[t] = np.sum(shell_mass * g * g)
    mean, se = samples.mean(), samples.std(ddof=1) / np.sqrt(trials)
    dev_se = abs(mean - base) / se

    # the shell-mass reduction is exact for one trial against the full op
    direct = sobolev_norm(
        forward_transform(sample_randomization(data, rparams, 7).position), 0.0) ** 2
    g7 = shell_gaussians(rparams, 7, 0)
    shortcut = float(np.sum(shell_mass * g7 * g7))
    reduction_err = abs(direct - shortcut) / max(direct, 1.0)

    ident = sample_randomization(data, rparams, 0, gains=np.ones(rparams.shell_max))
    degen_err = np.max(np.abs(ident.position.values - data.position.values)) \
        / np.max(np.abs(data.position.values))

    band = BandSpec.annulus(5.0 ** rparams.gamma, 6.0 ** rparams.gamma)
    single = WaveData.from_coefficients(apply_band(cf, band),
                                        SpectralField.zero(grid))
    out = sample_randomization(single, rparams, 3)
    g5 = shell_gaussians(rparams, 3, 0)[5]
    single_err = np.max(np.abs(out.position.values - g5 * single.position.values)) \
        / max(np.max(np.abs(single.position.values)), 1e-300)

    passed = dev_se < 3.0 and degen_err < 1e-12 and single_err < 1e-12 \
        and reduction_err < 1e-9
    return CriterionResult(2, "randomization_isometry", passed, float(dev_se), 3.0,
                           {"mean": float(mean), "expected": float(base),
                            "stderr": float(se), "degenerate_err": float(degen_err),
                            "single_shell_err": float(single_err),
                            "reduction_err": float(reduction_err)})


def criterion_reconstruction(cfg: RunConfig, cache: dict) -> CriterionResult:
    grid = cfg.grid
    data = _band_limited_data(grid, rho_max=8.0, seed=103)
    w_in, w_out = in_out_decompose(data, horizon=6.0, oversample=4)
    worst = 0.0
    for t in (0.0, 1.0, 5.0):
        exact = linear_solution(data, t).position.values
        got = reconstruct(w_in, w_out, t, grid).values
        worst = max(worst, np.max(np.abs(got - exact)) / np.max(np.abs(exact)))
    return CriterionResult(3, "in_out_reconstruction", worst < 1e-8,
                           float(worst), 1e-8, {"times": [0.0, 1.0, 5.0]})


def criterion_gradient_profiles(cfg: RunConfig, cache: dict) -> CriterionResult:
    grid = cfg.grid
    data = _band_limited_data(grid, rho_max=8.0, seed=104)
    w_in_g, w_out_g = gradient_profiles(data, horizon=6.0, oversample=4)
    worst = 0.0
    for t in (1.0, 5.0):
        st = linear_solution(data, t)
        ct = forward_transform(st.position).coefficients
        n_s = 2 * grid.point_count
        w_r = periodic_series(grid, grid.frequencies * ct, None, n_s)[1 : grid.point_count]
        w = st.position.reduced
        dr_f = (w_r - w / grid.nodes) / grid.nodes
        recon = (-st.position.values / grid.nodes
                 + (w_out_g.value(t - grid.nodes) + w_in_g.value(t + grid.nodes))
                 / grid.nodes)
        worst = max(worst, np.max(np.abs(dr_f - recon)) / np.max(np.abs(dr_f)))
    return CriterionResult(4, "gradient_profile_identity", worst < 1e-6,
                           float(worst), 1e-6, {"times": [1.0, 5.0]})


def criterion_energy_conservation(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, _ = get_cached_trajectory(cache, cfg, "unforced_gaussian")
    es = np.array([energy(s) for s in traj.states])
    drift = float(np.max(np.abs(es - es[0])) / es[0])
    return CriterionResult(5, "energy_conservation", drift < 1e-6, drift, 1e-6,
                           {"initial_energy": float(es[0])})


def criterion_energy_increment(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, sc = get_cached_trajectory(cache, cfg, "forced_random")
    horizon = float(traj.times[-1])
    rep = energy_increment_residual(traj, (0.0, horizon))
    rel = abs(rep["residual"]) / rep["scale"]

    ladder = []
    h = sc.grid.spacing
    for div in (4, 8, 16):
        p = SolverParams(dt=h / div, horizon=2.0, report_stride=div)
        t2 = evolve(sc.init, sc.forcing, p)
        ladder.append(abs(energy_increment_residual(t2, (0.0, 2.0))["residual"]))
    slope, _ = fit_log2_slope(np.log2([1.0 / 4, 1.0 / 8, 1.0 / 16]),
                              np.log2(ladder))
    passed = rel < 1e-4 and abs(slope - 2.0) < 0.2
    return CriterionResult(6, "energy_increment_identity", passed, rel, 1e-4,
                           {"residual": rep["residual"], "scale": rep["scale"],
                            "dt_slope": float(slope), "slope_tol": 0.2,
                            "residual_ladder": [float(v) for v in ladder]})


def criterion_morawetz_identity(cfg: RunConfig, cache: dict) -> CriterionResult:
    worst = 0.0
    details = {}
    for name in ("unforced_gaussian", "forced_random"):
        traj, sc = get_cached_trajectory(cache, cfg, name)
        horizon = float(traj.times[-1])
        rep = morawetz_identity_residual(traj, (0.0, horizon))
        rel = abs(rep["residual"]) / rep["scale"]
        worst = max(worst, rel)
        # joint refinement: halving dt at fixed stride also halves the
        # snapshot spacing, so every O(dt^2) error channel shrinks together
        h = sc.grid.spacing
        fine = evolve(sc.init, sc.forcing,
                      SolverParams(dt=h / 8, horizon=2.0, report_stride=4))
        coarse = evolve(sc.init, sc.forcing,
                        SolverParams(dt=h / 4, horizon=2.0, report_stride=4))
        r_f = abs(morawetz_identity_residual(fine, (0.0, 2.0))["residual"])
        r_c = abs(morawetz_identity_residual(coarse, (0.0, 2.0))["residual"])
        converges = r_f <= max(0.6 * r_c, 1e-9 * rep["scale"])
        details[name] = {"relative_residual": float(rel),
                         "residual_coarse": float(r_c),
                         "residual_fine": float(r_f),
                         "converges": bool(converges)}
        if not converges:
            worst = max(worst, 1.0)
    return CriterionResult(7, "morawetz_identity", worst < 1e-3, worst, 1e-3,
                           details)


def criterion_flux_monotonicity(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, _ = get_cached_trajectory(cache, cfg, "unforced_gaussian")
    horizon = float(traj.times[-1])
    e0 = energy(traj.states[0])
    i0, i1 = traj.index_range((0.0, horizon))
    worst = -np.inf
    for tau in np.linspace(-40.0, -2.0, 16):
        fl = cone_flux(traj, tau, (0.0, horizon))
        ea = local_energy(traj.states[i0], traj.times[i0] - tau)
        eb = local_energy(traj.states[i1], traj.times[i1] - tau)
        worst = max(worst, (fl - (eb - ea)) / e0)
    return CriterionResult(8, "flux_monotonicity", worst < 1e-5, float(worst),
                           1e-5, {"tau_ladder": [-40.0, -2.0, 16],
                                  "energy": float(e0)})


def criterion_interaction_flux_budget(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, sc = get_cached_trajectory(cache, cfg, "forced_random")
    horizon = float(traj.times[-1])
    norms = sc.norms
    margins = {}
    worst = np.inf
    for n_shell in norms.dyadic_range:
        data_n = _band_pair(sc.forcing, BandSpec.dyadic(int(n_shell)))
        a, b = _grad_profile_coeffs(data_n)
        if not (np.any(a) or np.any(b)):
            continue
        prof = _profile_from_coeffs(sc.grid, a, b, horizon)
        w2 = Profile(prof.tau_min, prof.spacing, prof.samples**2)
        for direction in ("out", "in"):
            rep = interaction_flux_budget(traj, sc.forcing, w2, direction,
                                          (0.0, horizon))
            key = f"N={n_shell},{direction}"
            scale = max(rep["budget"], 1e-300)
            margins[key] = {"lhs": rep["lhs"], "budget": rep["budget"],
                            "margin": rep["margin"],
                            "margin_fraction": rep["margin"] / scale}
            worst = min(worst, rep["margin"])
    af, bf = in_out_profile_coeffs(sc.forcing)
    proff = _profile_from_coeffs(sc.grid, af, bf, horizon)
    wf = Profile(proff.tau_min, proff.spacing, proff.samples**2)
    for direction in ("out", "in"):
        rep = interaction_flux_budget(traj, sc.forcing, wf, direction,
                                      (0.0, horizon))
        margins[f"full,{direction}"] = {"lhs": rep["lhs"], "budget": rep["budget"],
                                        "margin": rep["margin"]}
        worst = min(worst, rep["margin"])

    # unforced scenario: zero forcing collapses the budget to the pure
    # flux-energy inequality, still a real check on the trajectory
    traj_u, sc_u = get_cached_trajectory(cache, cfg, "unforced_gaussian")
    horizon_u = float(traj_u.times[-1])
    taus = wf.tau_min + wf.spacing * np.arange(len(wf.samples))
    synth = Profile(wf.tau_min, wf.spacing, np.exp(-((taus / 8.0) ** 2)))
    for direction in ("out", "in"):
        rep = interaction_flux_budget(traj_u, WaveData.zero(sc_u.grid), synth,
                                      direction, (0.0, horizon_u))
        margins[f"unforced,{direction}"] = {"lhs": rep["lhs"],
                                            "budget": rep["budget"],
                                            "margin": rep["margin"]}
        worst = min(worst, rep["margin"])
    return CriterionResult(9, "interaction_flux_budget", worst >= 0.0,
                           float(worst), 0.0, margins)


def criterion_bootstrap_ledger(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, sc = get_cached_trajectory(cache, cfg, "forced_random")
    ledger = bootstrap_track(traj, sc.forcing, 8, sc.norms,
                             refinements=(1, 2, 4, 8))
    c_tilde = ledger.c_tilde
    ys = [ledger.y_refinement[j] for j in (1, 2, 4, 8)]
    monotone = all(ys[i + 1] <= ys[i] * (1 + 1e-12) for i in range(3))
    bounded = np.isfinite(c_tilde) and all(r <= c_tilde + 1e-12 for r in ledger.ratios)
    passed = bool(monotone and bounded)
    return CriterionResult(12, "bootstrap_ledger", passed, float(c_tilde),
                           float("inf"),
                           {"ratios": ledger.ratios, "c_tilde": c_tilde,
                            "y_refinement": {str(k): v for k, v in
                                             ledger.y_refinement.items()},
                            "energies": ledger.energies,
                            "y_monotone": monotone})


def criterion_scattering(cfg: RunConfig, cache: dict) -> CriterionResult:
    traj, _ = get_cached_trajectory(cache, cfg, "small_data")
    rep = scattering_check(traj, tail_fraction=0.25)
    bound = 1e-3 * rep["energy_sqrt"]
    passed = rep["monotone_last4"] and rep["final_decrement"] < bound
    return CriterionResult(13, "scattering_cauchy", passed,
                           float(rep["final_decrement"]), float(bound),
                           {"monotone_last4": rep["monotone_last4"],
                            "last_decrements": rep["decrements"][-4:]})


# ---------------------------------------------------------------------------
# criteria 10-11


def criterion_mc_strichartz(cfg: RunConfig, cache: dict) -> CriterionResult:
    mc = cfg.raw["mc"]
    trials = int(mc["trials"])
    ladder = tuple(mc["shell_ladder"])
    t_window = float(mc["t_window"])
    workers = mc.get("workers")
    seed = int(cfg.require("seed"))

    common = dict(trials=trials, shell_ladder=ladder, t_window=t_window,
                  radius_max=float(cfg.require("grid", "radius_max")),
                  point_count=int(cfg.require("grid", "point_count")),
                  support_radius=20.0, bulk_radius=16.0, workers=workers)
    rep_35 = mc_strichartz(
        McConfig(seed=seed, gamma=1.0, q=8.0 / 3.0, p=np.inf, alpha=3.0 / 8.0,
                 **common),
        predicted_slope=0.625)
    rep_36 = mc_strichartz(
        McConfig(seed=seed + 1, gamma=1.0, q=np.inf, p=6.0, alpha=0.0, **common),
        predicted_slope=2.0 / 3.0)

    profile_common = dict(trials=trials, shell_ladder=ladder, t_window=0.0,
                          q=4.0, p=np.inf, alpha=0.0,
                          radius_max=4096.0, point_count=2**19, workers=workers)
    rep_44a = mc_profile_decay(McConfig(seed=seed + 2, gamma=1.0, **profile_common),
                               predicted_slope=0.0)
    rep_44b = mc_profile_decay(McConfig(seed=seed + 3, gamma=0.5, **profile_common),
                               predicted_slope=-0.25)

    drift = rep_35.extras["moment_drift"]
    passed = (rep_35.passed and rep_36.passed and rep_44a.passed
              and rep_44b.passed and drift < 1.5)
    worst_dev = max(abs(rep_35.measured_slope - 0.625),
                    abs(rep_36.measured_slope - 2.0 / 3.0),
                    abs(rep_44a.measured_slope),
                    abs(rep_44b.measured_slope + 0.25))
    return CriterionResult(10, "probabilistic_strichartz", passed,
                           float(worst_dev), 0.1,
                           {"lemma_3_5": rep_35.as_dict(),
                            "lemma_3_6": rep_36.as_dict(),
                            "cor_4_4_gamma1": rep_44a.as_dict(),
                            "cor_4_4_gamma_half": rep_44b.as_dict(),
                            "moment_drift": drift, "moment_drift_tol": 1.5})


def criterion_delta_sweep(cfg: RunConfig, cache: dict) -> CriterionResult:
    rep_q4 = refined_strichartz_delta_sweep(4.0, np.inf, 0.25)
    pass_q4 = rep_q4.measured_slope >= 0.15
    rep_q2 = refined_strichartz_delta_sweep(2.0, np.inf, 0.25, mode="two_sided")
    pass_q2 = abs(rep_q2.measured_slope) < 0.1
    passed = bool(pass_q4 and pass_q2)
    return CriterionResult(11, "refined_strichartz_delta", passed,
                           float(rep_q4.measured_slope), 0.15,
                           {"q4": rep_q4.as_dict(), "q2": rep_q2.as_dict(),
                            "q2_abs_slope": abs(rep_q2.measured_slope),
                            "q2_tol": 0.1})


VERIFY_CRITERIA = [
    criterion_transform_fidelity,
    criterion_randomization_isometry,
    criterion_reconstruction,
    criterion_gradient_profiles,
    criterion_energy_conservation,
    criterion_energy_increment,
    criterion_morawetz_identity,
    criterion_flux_monotonicity,
    criterion_interaction_flux_budget,
    criterion_bootstrap_ledger,
    criterion_scattering,
]

MC_CRITERIA = [criterion_mc_strichartz, criterion_delta_sweep]


def run_verify_suite(cfg: RunConfig, cache: dict | None = None,
                     echo=print) -> list:
    cache = {} if cache is None else cache
    results = []
    for fn in VERIFY_CRITERIA:
        res = fn(cfg, cache)
        results.append(res)
        if echo:
            echo(format_result(res))
    return results


def run_mc_suite(cfg: RunConfig, cache: dict | None = None, echo=print) -> list:
    cache = {} if cache is None else cache
    results = []
    for fn in MC_CRITERIA:
        res = fn(cfg, cache)
        results.append(res)
        if echo:
            echo(format_result(res))
    return results
