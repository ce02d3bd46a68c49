"""Persistence: binary trajectory container, CSV time series, JSON reports.

Trajectory container layout (little-endian):

    bytes 0..7    magic  b"RNLWTRJ1"
    bytes 8..15   uint64 header length in bytes
    header        UTF-8 JSON: grid, solver params, stride, snapshot count,
                  whether forcing / work channels are present
    forcing       2 float64 arrays of length N_r - 1 (position, velocity
                  values), present iff header["has_forcing"]
    snapshots     per snapshot: float64 time, float64 work accumulator,
                  float64[N_r - 1] position values, float64[N_r - 1] velocity

All writes are atomic (temp file + rename).  JSON reports are deterministic
(sorted keys, no timestamps); wall-clock metadata lives in a sidecar manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
import time

import numpy as np

from .linear import WaveState
from .nlw import SolverParams, Trajectory
from .randomize import WaveData
from .spectral import RadialField, RadialGrid

__all__ = [
    "write_trajectory",
    "read_trajectory",
    "write_wavedata",
    "read_wavedata",
    "write_json_report",
    "write_functionals_csv",
    "write_timeseries_csv",
    "config_hash",
    "atomic_write_bytes",
    "write_manifest",
]

TRAJ_MAGIC = b"RNLWTRJ1"
DATA_MAGIC = b"RNLWDAT1"


def atomic_write_bytes(path: str, payload: bytes):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"),
                      default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_trajectory(path: str, traj: Trajectory):
    header = {
        "version": 1,
        "radius_max": traj.grid.radius_max,
        "point_count": traj.grid.point_count,
        "params": {
            "dt": traj.params.dt,
            "horizon": traj.params.horizon,
            "blowup_threshold": traj.params.blowup_threshold,
            "report_stride": traj.params.report_stride,
            "dealias": traj.params.dealias,
        },
        "snapshots": len(traj.states),
        "has_forcing": traj.forcing is not None,
        "has_work": traj.forcing_work is not None,
    }
    hblob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [TRAJ_MAGIC, struct.pack("<Q", len(hblob)), hblob]
    if traj.forcing is not None:
        parts.append(np.ascontiguousarray(traj.forcing.position.values).tobytes())
        parts.append(np.ascontiguousarray(traj.forcing.velocity.values).tobytes())
    works = traj.forcing_work if traj.forcing_work is not None \
        else np.zeros(len(traj.states))
    for i, st in enumerate(traj.states):
        parts.append(struct.pack("<dd", float(traj.times[i]), float(works[i])))
        parts.append(np.ascontiguousarray(st.position.values).tobytes())
        parts.append(np.ascontiguousarray(st.velocity.values).tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_trajectory(path: str) -> Trajectory:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != TRAJ_MAGIC:
        raise ValueError(f"{path} is not a trajectory container")
    (hlen,) = struct.unpack("<Q", blob[8:16])
    header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    grid = RadialGrid(header["radius_max"], header["point_count"])
    n = grid.point_count - 1
    params = SolverParams(**header["params"])
    off = 16 + hlen

    def take(count):
        nonlocal off
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).copy()
        off += 8 * count
        return arr

    forcing = None
    if header["has_forcing"]:
        fpos = take(n)
        fvel = take(n)
        forcing = WaveData(RadialField(grid, fpos), RadialField(grid, fvel))

    times, states, works = [], [], []
    for _ in range(header["snapshots"]):
        t, work = struct.unpack_from("<dd", blob, off)
        off += 16
        pos = take(n)
        vel = take(n)
        times.append(t)
        works.append(work)
        states.append(WaveState(t, RadialField(grid, pos), RadialField(grid, vel)))
    return Trajectory(
        grid=grid,
        times=np.array(times),
        states=states,
        params=params,
        forcing=forcing,
        forcing_work=np.array(works) if header["has_work"] else None,
    )


def write_wavedata(path: str, data: WaveData):
    header = {
        "version": 1,
        "radius_max": data.grid.radius_max,
        "point_count": data.grid.point_count,
    }
    hblob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [DATA_MAGIC, struct.pack("<Q", len(hblob)), hblob,
             np.ascontiguousarray(data.position.values).tobytes(),
             np.ascontiguousarray(data.velocity.values).tobytes()]
    atomic_write_bytes(path, b"".join(parts))


def read_wavedata(path: str) -> WaveData:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != DATA_MAGIC:
        raise ValueError(f"{path} is not a wave-data container")
    (hlen,) = struct.unpack("<Q", blob[8:16])
    header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    grid = RadialGrid(header["radius_max"], header["point_count"])
    n = grid.point_count - 1
    off = 16 + hlen
    pos = np.frombuffer(blob, dtype="<f8", count=n, offset=off).copy()
    vel = np.frombuffer(blob, dtype="<f8", count=n, offset=off + 8 * n).copy()
    return WaveData(RadialField(grid, pos), RadialField(grid, vel))


def write_json_report(path: str, payload: dict, config: dict):
    doc = {
        "config": config,
        "config_hash": config_hash(config),
        "report": payload,
    }
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2,
                                       default=float) + "\n")


def write_functionals_csv(path: str, rows: list):
    """Rows of (interval_a, interval_b, functional, value, tolerance, passed)."""
    lines = ["interval_a,interval_b,functional,value,tolerance,passed"]
    for a, b, name, value, tol, passed in rows:
        tol_s = "" if tol is None else f"{tol:.6e}"
        pass_s = "" if passed is None else str(bool(passed)).lower()
        lines.append(f"{a:.9g},{b:.9g},{name},{value:.12e},{tol_s},{pass_s}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_timeseries_csv(path: str, columns: dict):
    names = list(columns)
    n = len(columns[names[0]])
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(f"{columns[k][i]:.12e}" for k in names))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_manifest(out_dir: str, files: list, config: dict):
    """Sidecar carrying wall-clock metadata so main outputs stay byte-stable."""
    doc = {
        "created_unix": time.time(),
        "files": sorted(files),
        "config_hash": config_hash(config),
    }
    atomic_write_text(os.path.join(out_dir, "run_manifest.json"),
                      json.dumps(doc, sort_keys=True, indent=2) + "\n")
