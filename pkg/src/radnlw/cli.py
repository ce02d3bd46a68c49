"""Command-line orchestration.

Subcommands: randomize | evolve | decompose | functionals | mc | verify.
One YAML config drives everything; flags only override config keys
(--set a.b.c=value).  Outputs are written atomically into the configured
output directory; every report embeds the config and its hash, wall-clock
metadata lives only in the sidecar manifest.

Environment: RADNLW_WORKERS overrides the Monte Carlo worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import yaml

from . import io as rio
from .config import RunConfig, build_scenario, load_config
from .errors import ConfigError, RadnlwError
from .functionals import (
    energy,
    energy_increment_residual,
    functional_report,
    morawetz_identity_residual,
)
from .linear import in_out_decompose, in_out_profile_coeffs
from .nlw import evolve
from .randomize import sample_randomization, shell_indices, split_frequency
from .spectral import forward_transform, sobolev_norm, tail_mass_fraction, weighted_norm
from .verification import format_result, run_mc_suite, run_verify_suite

__all__ = ["main"]


def _apply_overrides(doc: dict, pairs: list) -> dict:
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key.path=value, got {pair!r}")
        key, raw_val = pair.split("=", 1)
        val = yaml.safe_load(raw_val)
        node = doc
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = val
    return doc


def _load(args) -> RunConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    else:
        doc = {}
    _apply_overrides(doc, args.set)
    if args.oracle:
        doc.setdefault("verify", {})["oracle"] = True
    return load_config(doc)


def _outdir(cfg: RunConfig) -> str:
    d = cfg.get("output_dir", default="runs/out")
    os.makedirs(d, exist_ok=True)
    return d


def cmd_randomize(cfg: RunConfig) -> int:
    sc = build_scenario(cfg)
    rparams = cfg.randomization_params
    out = _outdir(cfg)
    if sc.forcing is not None:
        low, high = sc.init, sc.forcing
    else:
        randomized = sample_randomization(sc.init, rparams,
                                          int(cfg.get("randomization", "trial",
                                                      default=0)))
        low, high = split_frequency(randomized, rparams.cutoff)
    rio.write_wavedata(os.path.join(out, "data_low.rnlwdat"), low)
    rio.write_wavedata(os.path.join(out, "data_high.rnlwdat"), high)

    k_of_mode = shell_indices(sc.grid, rparams.gamma)
    shell_norms = {}
    for data, tag in ((low, "low"), (high, "high")):
        cf, _ = data.coefficients()
        mass = 2.0 * np.pi * sc.grid.radius_max * cf.coefficients**2
        per_shell = np.zeros(rparams.shell_max)
        np.add.at(per_shell, np.minimum(k_of_mode, rparams.shell_max - 1), mass)
        nz = np.nonzero(per_shell)[0]
        shell_norms[tag] = {int(k): float(np.sqrt(per_shell[k])) for k in nz}
    rio.write_json_report(os.path.join(out, "randomize_summary.json"),
                          {"shell_l2_norms": shell_norms,
                           "total_l2_low": sobolev_norm(low.coefficients()[0], 0.0),
                           "total_l2_high": sobolev_norm(high.coefficients()[0], 0.0)},
                          cfg.raw)
    rio.write_manifest(out, ["data_low.rnlwdat", "data_high.rnlwdat",
                             "randomize_summary.json"], cfg.raw)
    return 0


def cmd_evolve(cfg: RunConfig) -> int:
    sc = build_scenario(cfg)
    traj = evolve(sc.init, sc.forcing, sc.solver)
    out = _outdir(cfg)
    rio.write_trajectory(os.path.join(out, "trajectory.rnlwtraj"), traj)
    cols = {
        "time": traj.times,
        "energy": [energy(s) for s in traj.states],
        "l6_norm": [weighted_norm(s.position, 0.0, 6.0) for s in traj.states],
        "tail_fraction": [tail_mass_fraction(s.position) for s in traj.states],
        "forcing_work": (traj.forcing_work if traj.forcing_work is not None
                         else np.zeros(len(traj.states))),
    }
    rio.write_timeseries_csv(os.path.join(out, "timeseries.csv"), cols)
    rio.write_manifest(out, ["trajectory.rnlwtraj", "timeseries.csv"], cfg.raw)
    return 0


def cmd_decompose(cfg: RunConfig) -> int:
    sc = build_scenario(cfg)
    data = sc.forcing if sc.forcing is not None else sc.init
    horizon = sc.solver.horizon
    w_in, w_out = in_out_decompose(data, horizon=horizon)
    out = _outdir(cfg)
    rio.write_timeseries_csv(os.path.join(out, "profiles.csv"),
                             {"tau": w_in.tau_grid, "w_in": w_in.samples,
                              "w_out": w_out.samples})
    a, b = in_out_profile_coeffs(data)
    rio.write_json_report(
        os.path.join(out, "decompose_summary.json"),
        {"tau_min": w_in.tau_min, "tau_max": w_in.tau_max,
         "spacing": w_in.spacing,
         "l2_tau": float(np.sqrt(np.trapezoid(w_in.samples**2,
                                              dx=w_in.spacing))),
         "data_l2": sobolev_norm(forward_transform(data.position), 0.0)},
        cfg.raw)
    rio.write_manifest(out, ["profiles.csv", "decompose_summary.json"], cfg.raw)
    return 0


def cmd_functionals(cfg: RunConfig, traj_path: str | None = None) -> int:
    sc = build_scenario(cfg)
    if traj_path:
        traj = rio.read_trajectory(traj_path)
        forcing = traj.forcing
    else:
        traj = evolve(sc.init, sc.forcing, sc.solver)
        forcing = sc.forcing
    out = _outdir(cfg)
    n_int = int(cfg.get("functionals", "intervals", default=4))
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    edges = np.linspace(t0, t1, n_int + 1)
    rows = []
    residual_docs = {}
    intervals = [(t0, t1)] + [(edges[j], edges[j + 1]) for j in range(n_int)]
    for iv in intervals:
        rep = functional_report(traj, forcing, sc.norms, iv)
        label = f"[{iv[0]:.6g},{iv[1]:.6g}]"
        for name, value in (("energy_sup", rep.energy_sup),
                            ("morawetz", rep.morawetz),
                            ("interaction_flux_out", rep.interaction_flux_out),
                            ("interaction_flux_in", rep.interaction_flux_in),
                            ("y_norm", rep.y_norm),
                            ("z_norm", rep.z_norm)):
            rows.append((iv[0], iv[1], name, value, None, None))
        for name, value in rep.residuals.items():
            tol = 1e-4 if name == "energy_increment" else 1e-3
            rows.append((iv[0], iv[1], f"residual:{name}", value, tol, None))
        doc = rep.as_dict()
        # identity reports carry both sides, not just the difference
        doc["identity_sides"] = {
            "energy_increment": energy_increment_residual(traj, iv),
            "morawetz_identity": morawetz_identity_residual(traj, iv),
        }
        residual_docs[label] = doc
    rio.write_functionals_csv(os.path.join(out, "functionals.csv"), rows)
    rio.write_json_report(os.path.join(out, "functionals.json"), residual_docs,
                          cfg.raw)
    rio.write_manifest(out, ["functionals.csv", "functionals.json"], cfg.raw)
    return 0


def cmd_mc(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    results = run_mc_suite(cfg)
    rio.write_json_report(os.path.join(out, "mc_report.json"),
                          {"criteria": [r.as_dict() for r in results]}, cfg.raw)
    rows = []
    for res in results:
        for sub_name, sub in res.details.items():
            if isinstance(sub, dict) and "per_shell" in sub:
                for shell, stats in sub["per_shell"].items():
                    rows.append((0.0, 0.0, f"{res.name}:{sub_name}:{shell}",
                                 stats["mean"], None, res.passed))
    rio.write_functionals_csv(os.path.join(out, "mc_per_shell.csv"), rows)
    rio.write_manifest(out, ["mc_report.json", "mc_per_shell.csv"], cfg.raw)
    return 0 if all(r.passed for r in results) else 1


def cmd_verify(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    results = run_verify_suite(cfg)
    rio.write_json_report(os.path.join(out, "verify_report.json"),
                          {"criteria": [r.as_dict() for r in results]}, cfg.raw)
    rio.write_manifest(out, ["verify_report.json"], cfg.raw)
    ok = all(r.passed for r in results)
    print("verify:", "ALL PASS" if ok else "FAILURES PRESENT")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="radnlw",
        description="Desk-scale lab for the radial energy-critical wave equation")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("randomize", "sample the annular randomization and write the split data"),
        ("evolve", "integrate the forced quintic wave equation"),
        ("decompose", "write in/out profiles of the scenario forcing"),
        ("functionals", "evaluate bootstrap functionals on a trajectory"),
        ("mc", "run the Monte Carlo slope criteria (10-11)"),
        ("verify", "run the identity/monotonicity criteria (1-9, 12-13)"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--set", action="append", metavar="KEY=VAL",
                       help="override a config key (repeatable)")
        p.add_argument("--oracle", action="store_true",
                       help="refined-resolution oracle mode")
        if name == "functionals":
            p.add_argument("--trajectory", help="existing trajectory container")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "randomize":
            return cmd_randomize(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "decompose":
            return cmd_decompose(cfg)
        if args.command == "functionals":
            return cmd_functionals(cfg, getattr(args, "trajectory", None))
        if args.command == "mc":
            return cmd_mc(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RadnlwError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
