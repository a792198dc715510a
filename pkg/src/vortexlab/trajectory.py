"""Trajectory containers, CSV persistence and event logs.

A trajectory is a time-indexed record of diagnostics shared by the PDE
integrators and the point-vortex ODE: snapshot times, per-snapshot vortex
readings, scalar series (energies, residuals) and an event log.  PDE and
ODE tracks use the same CSV schema (documented in docs/csv-schema.md) so
they can be compared column-for-column.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .diagnostics import VortexReading


class NumericalError(RuntimeError):
    """Raised on blowup or unrecoverable energy-balance violation.

    Carries the trajectory accumulated up to the last good snapshot in
    ``partial`` so callers can persist partial results.
    """

    def __init__(self, message: str, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass
class BubblingEvent:
    """A detected quantized drop: ω-ball mass jumps by ~4π·quanta."""

    t_lo: float
    t_hi: float
    vortex_index: int
    delta_omega: float
    quanta: int
    delta_energy: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BubblingEvent":
        return cls(**d)


# Fixed per-vortex column suffixes, in CSV order.
VORTEX_COLUMNS = ("x", "y", "degree", "jmass", "omass", "q")


@dataclass
class Trajectory:
    kind: str                       # "llg" | "gl" | "ode-llg" | "ode-gl"
    times: list[float] = field(default_factory=list)
    vortices: list[list[VortexReading]] = field(default_factory=list)
    series: dict[str, list[float]] = field(default_factory=dict)
    events: list[BubblingEvent] = field(default_factory=list)
    status: str = "completed"       # completed|collision|boundary|blowup
    meta: dict = field(default_factory=dict)

    def append(self, t: float, readings: list[VortexReading],
               scalars: dict[str, float] | None = None) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        scalars = scalars or {}
        self.times.append(float(t))
        self.vortices.append(readings)
        for key, val in scalars.items():
            self.series.setdefault(key, [math.nan] * (len(self.times) - 1))
            self.series[key].append(float(val))
        for key in self.series:
            if key not in scalars:
                self.series[key].append(math.nan)

    @property
    def n_vortices(self) -> int:
        return max((len(v) for v in self.vortices), default=0)

    def tracks(self) -> np.ndarray:
        """Identity-matched positions, shape (T, N, 2), NaN where lost.

        Vortex identity is assigned by nearest neighbor against the previous
        snapshot's matched positions, starting from the t = 0 ordering.
        """
        T, N = len(self.times), self.n_vortices
        out = np.full((T, N, 2), np.nan)
        if T == 0 or N == 0:
            return out
        prev = [None] * N
        for k, r in enumerate(self.vortices[0][:N]):
            out[0, k] = r.position
            prev[k] = np.asarray(r.position)
        for it in range(1, T):
            readings = list(self.vortices[it])
            taken = set()
            for k in range(N):
                if prev[k] is None or not readings:
                    continue
                dists = [np.linalg.norm(np.asarray(r.position) - prev[k])
                         if j not in taken else np.inf
                         for j, r in enumerate(readings)]
                j = int(np.argmin(dists))
                if np.isfinite(dists[j]):
                    taken.add(j)
                    out[it, k] = readings[j].position
                    prev[k] = np.asarray(readings[j].position)
            # unmatched new readings become fresh identities if a slot is free
            for j, r in enumerate(readings):
                if j in taken:
                    continue
                for k in range(N):
                    if np.isnan(out[it, k, 0]) and prev[k] is None:
                        out[it, k] = r.position
                        prev[k] = np.asarray(r.position)
                        break
        return out

    def tracked_readings(self) -> list[list[VortexReading | None]]:
        """Per-identity readings aligned with :meth:`tracks` (None = lost)."""
        T, N = len(self.times), self.n_vortices
        pos = self.tracks()
        aligned: list[list[VortexReading | None]] = []
        for it in range(T):
            row: list[VortexReading | None] = [None] * N
            for r in self.vortices[it]:
                d = np.linalg.norm(pos[it] - np.asarray(r.position), axis=-1)
                k = int(np.nanargmin(np.where(np.isnan(d), np.inf, d))) \
                    if np.isfinite(d).any() else -1
                if k >= 0 and d[k] < 1e-12:
                    row[k] = r
            aligned.append(row)
        return aligned


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------

def _columns(traj: Trajectory) -> list[str]:
    cols = ["time"] + sorted(traj.series)
    for k in range(traj.n_vortices):
        cols += [f"v{k}_{s}" for s in VORTEX_COLUMNS]
    return cols


def save_trajectory(traj: Trajectory, path) -> None:
    """Write `path` (CSV) plus a `<path stem>.meta.json` sidecar.

    The sidecar holds kind, status, events and free-form metadata; the CSV
    holds only numeric columns so downstream tools can stream it.
    """
    path = Path(path)
    cols = _columns(traj)
    aligned = traj.tracked_readings()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for it, t in enumerate(traj.times):
            row = [repr(t)]
            for key in sorted(traj.series):
                row.append(repr(traj.series[key][it]))
            for r in aligned[it]:
                if r is None:
                    row += ["nan"] * len(VORTEX_COLUMNS)
                else:
                    row += [repr(float(r.position[0])), repr(float(r.position[1])),
                            repr(float(r.degree)), repr(float(r.jacobian_mass)),
                            repr(float(r.vorticity_mass)), repr(float(r.q_hat))]
            w.writerow(row)
    sidecar = path.with_name(path.stem + ".meta.json")
    with open(sidecar, "w") as fh:
        json.dump({"kind": traj.kind, "status": traj.status,
                   "events": [e.to_dict() for e in traj.events],
                   "meta": traj.meta, "columns": cols}, fh, indent=2)
        fh.write("\n")


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    sidecar = path.with_name(path.stem + ".meta.json")
    kind, status, events, meta = "unknown", "completed", [], {}
    if sidecar.exists():
        with open(sidecar) as fh:
            side = json.load(fh)
        kind = side.get("kind", kind)
        status = side.get("status", status)
        events = [BubblingEvent.from_dict(e) for e in side.get("events", [])]
        meta = side.get("meta", {})
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty trajectory file: {path}")
    header = rows[0]
    if "time" not in header:
        raise ValueError(f"trajectory CSV missing required column: time")
    idx = {name: i for i, name in enumerate(header)}
    nv = 0
    while f"v{nv}_x" in idx:
        nv += 1
    series_keys = [c for c in header
                   if c != "time" and not c.startswith("v")]
    traj = Trajectory(kind=kind, status=status, events=events, meta=meta)
    for row in rows[1:]:
        t = float(row[idx["time"]])
        readings = []
        for k in range(nv):
            x = float(row[idx[f"v{k}_x"]])
            if math.isnan(x):
                continue
            readings.append(VortexReading(
                position=(x, float(row[idx[f"v{k}_y"]])),
                degree=int(float(row[idx[f"v{k}_degree"]])),
                jacobian_mass=float(row[idx[f"v{k}_jmass"]]),
                vorticity_mass=float(row[idx[f"v{k}_omass"]]),
                q_hat=float(row[idx[f"v{k}_q"]]),
                window_radius=math.nan, merged=False))
        traj.append(t, readings,
                    {key: float(row[idx[key]]) for key in series_keys})
    return traj
