"""Experiment orchestration: scenarios, eps-sweeps, PDE-vs-ODE comparison.

A scenario bundles a vortex configuration, an eps list with matching grid
sizes, and run parameters.  Running it seeds the field, integrates the
PDE, tracks the vortices, integrates the matching point-vortex ODE from
the same initial positions (with charge jumps fed from the bubbling
detector for the director dynamics) and reports per-eps sup-distances
between the tracks.  The headline check is a trend: the sup-distance
should shrink as eps decreases, with or without injected excess energy.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .grid import make_grid, BoundaryKind
from .fields import VortexSet, save_field
from .seeding import (seed_vortex_field, seed_gl_field, seed_bubble_field,
                      inject_phase_perturbation)
from .renorm import RenormalizedEnergyModel, symmetric_disk_model
from .llg import LLGConfig, llg_run, detect_bubbling
from .glmixed import GLConfig, gl_run
from .motion import OdeState, ode_integrate, QJump
from .trajectory import (Trajectory, NumericalError, save_trajectory,
                         load_trajectory)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid scenario or run configuration."""


@dataclass
class Scenario:
    name: str
    kind: str                            # "llg" | "gl"
    domain: str = "disk"
    bc: str = "dirichlet"
    vortices: list[dict] = field(default_factory=list)
    eps_list: list[float] = field(default_factory=list)
    grid_sizes: list[int] = field(default_factory=list)
    alpha0: float = 1.0
    t_end: float = 0.25
    scheme: str | None = None            # default: imex (gl), rk4 (llg)
    snapshot_dt: float = 0.01
    boundary_data: str = "symmetric"     # symmetric | adapted
    seed_profile: str = "cap"            # cap | minimizer | bubble
    perturbation: dict | None = None     # {"target_excess": float, "wavenumber": int}
    ode_tol: float = 1e-9
    out_dir: str = "runs"

    def __post_init__(self):
        if self.kind not in ("llg", "gl"):
            raise ConfigError(f"kind must be 'llg' or 'gl', got {self.kind!r}")
        if not self.eps_list:
            raise ConfigError("eps_list must not be empty")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        if len(self.grid_sizes) != len(self.eps_list):
            raise ConfigError("grid_sizes must match eps_list")
        for eps, n in zip(self.eps_list, self.grid_sizes):
            h = (2.0 if self.domain == "disk" else 1.0) / (n - 1)
            if h > eps / 4 + 1e-12:
                raise ConfigError(
                    f"grid {n} does not resolve eps = {eps:g}: h = {h:g} "
                    f"> eps/4 = {eps / 4:g}")
        if not self.vortices:
            raise ConfigError("scenario needs at least one vortex")
        if self.seed_profile == "bubble" and self.kind != "llg":
            raise ConfigError("bubble seeding applies to the llg kind only")

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path) as fh:
            data = json.load(fh)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported scenario schema v{version}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self, path) -> None:
        data = {"schema_version": SCHEMA_VERSION, **asdict(self)}
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")

    def renorm_model(self) -> RenormalizedEnergyModel:
        if self.domain == "disk" and self.boundary_data == "symmetric":
            return symmetric_disk_model(self.bc)
        return RenormalizedEnergyModel(domain=self.domain,
                                       bc=BoundaryKind(self.bc))


@dataclass
class ComparisonReport:
    scenario: str
    kind: str
    per_eps: list[dict] = field(default_factory=list)
    monotone: bool | None = None
    event_alignment: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def finalize(self) -> None:
        dists = [e["sup_distance"] for e in self.per_eps
                 if e.get("sup_distance") is not None]
        self.monotone = (len(dists) == len(self.per_eps) > 1
                         and all(b < a for a, b in zip(dists, dists[1:])))

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")


def compare_tracks(pde: Trajectory, ode: Trajectory) -> dict:
    """Sup/L2 time-distance between matched vortex tracks.

    ODE positions are linearly interpolated onto the PDE snapshot times
    over the overlapping interval.  Identities pair by nearest neighbor at
    t = 0; a crossing within twice the closest approach is flagged.
    """
    tp = np.asarray(pde.times)
    to = np.asarray(ode.times)
    t1 = min(tp[-1], to[-1])
    sel = tp <= t1 + 1e-12
    tpo = tp[sel]
    p = pde.tracks()[sel]
    o = ode.tracks()
    if p.shape[1] == 0 or o.shape[1] == 0:
        return {"sup_distance": None, "l2_distance": None,
                "overlap_end": float(t1), "identity_swap": False,
                "n_pde": p.shape[1], "n_ode": o.shape[1]}
    oi = np.stack([np.stack([np.interp(tpo, to, o[:, k, c])
                             for c in (0, 1)], -1)
                   for k in range(o.shape[1])], 1)
    # match identities at t = 0
    used = set()
    pairs = []
    for kp in range(p.shape[1]):
        if np.isnan(p[0, kp]).any():
            continue
        cand = [(np.linalg.norm(p[0, kp] - oi[0, ko]), ko)
                for ko in range(oi.shape[1]) if ko not in used]
        if not cand:
            continue
        _, ko = min(cand)
        used.add(ko)
        pairs.append((kp, ko))
    dists = []
    for kp, ko in pairs:
        d = np.linalg.norm(p[:, kp] - oi[:, ko], axis=-1)
        dists.append(d)
    dmat = np.array(dists)
    swap = False
    if len(pairs) > 1:
        closest = np.inf
        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                sep = np.linalg.norm(p[:, pairs[i][0]] - p[:, pairs[j][0]],
                                     axis=-1)
                closest = min(closest, np.nanmin(sep))
        swap = bool(np.nanmax(dmat) > 0.5 * closest)
    finite = dmat[np.isfinite(dmat)]
    sup = float(finite.max()) if finite.size else None
    l2 = None
    if finite.size and len(tpo) > 1:
        l2 = float(np.sqrt(np.trapezoid(np.nan_to_num(dmat ** 2).sum(0),
                                        tpo) / max(tpo[-1], 1e-300)))
    return {"sup_distance": sup, "l2_distance": l2,
            "overlap_end": float(t1), "identity_swap": swap,
            "n_pde": p.shape[1], "n_ode": o.shape[1]}


def _build_initial(sc: Scenario, grid, eps: float):
    v = VortexSet.from_lists([w["a"] for w in sc.vortices],
                             [w["d"] for w in sc.vortices],
                             [w.get("polarity", 1) * w["d"] / 2
                              for w in sc.vortices])
    gv = None
    if sc.domain == "disk" and sc.boundary_data == "symmetric":
        gv = VortexSet.from_lists([(0.0, 0.0)],
                                  [int(round(sum(v.degrees)))  or 1])
    if sc.kind == "gl":
        f = seed_gl_field(grid, v, eps, g_vortices=gv)
    elif sc.seed_profile == "bubble":
        f = seed_bubble_field(grid, v, eps, g_vortices=gv)
    else:
        pol = [w.get("polarity", 1) for w in sc.vortices]
        f = seed_vortex_field(grid, v, eps, polarity=pol,
                              profile=sc.seed_profile, g_vortices=gv)
    amplitude = None
    if sc.perturbation:
        amplitude = inject_phase_perturbation(
            f, float(sc.perturbation["target_excess"]),
            wavenumber=int(sc.perturbation.get("wavenumber", 5)), eps=eps)
    return f, v, amplitude


def run_leg(sc: Scenario, index: int, out_base: str | Path) -> dict:
    """Run one eps of a scenario; returns the per-eps report entry."""
    eps = sc.eps_list[index]
    n = sc.grid_sizes[index]
    leg_dir = Path(out_base) / f"eps-{index}"
    leg_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(n, n, sc.domain, sc.bc)
    f0, v, amplitude = _build_initial(sc, grid, eps)
    save_field(f0, leg_dir / "initial.fld", time=0.0, epsilon=eps)
    scheme = sc.scheme or ("imex" if sc.kind == "gl" else "explicit-ll-rk4")
    model = sc.renorm_model()
    if sc.kind == "gl":
        cfg = GLConfig(eps=eps, alpha0=sc.alpha0, t_end=sc.t_end,
                       bc=sc.bc, scheme=scheme, renorm_model=model)
        cfg.snapshot_stride = max(1, int(round(
            sc.snapshot_dt / cfg.resolve_dt(grid.h))))
        pde = gl_run(cfg, f0)
    else:
        cfg = LLGConfig(eps=eps, alpha0=sc.alpha0, t_end=sc.t_end,
                        bc=sc.bc, scheme=scheme, renorm_model=model)
        cfg.snapshot_stride = max(1, int(round(
            sc.snapshot_dt / cfg.resolve_dt(grid.h))))
        pde = llg_run(cfg, f0)
        pde.events = detect_bubbling(pde)
    save_trajectory(pde, leg_dir / "pde.csv")
    jumps = [QJump(time=0.5 * (e.t_lo + e.t_hi), vortex_index=e.vortex_index,
                   new_q=_jumped_q(pde, e)) for e in pde.events]
    q0 = [w.get("polarity", 1) * w["d"] / 2 for w in sc.vortices]
    if sc.seed_profile == "bubble":
        q0 = [w["d"] / 2 + 1 for w in sc.vortices]
    s0 = OdeState(a=[w["a"] for w in sc.vortices],
                  d=[w["d"] for w in sc.vortices], q=q0,
                  alpha0=sc.alpha0, model=model, kind=sc.kind)
    ode = ode_integrate(s0, min(sc.t_end, pde.times[-1]), tol=sc.ode_tol,
                        q_jumps=jumps if sc.kind == "llg" else None)
    save_trajectory(ode, leg_dir / "ode.csv")
    entry = {"eps": eps, "grid": n, "status": pde.status,
             "perturbation_amplitude": amplitude,
             "events": [e.to_dict() for e in pde.events],
             **compare_tracks(pde, ode)}
    with open(leg_dir / "leg.json", "w") as fh:
        json.dump(entry, fh, indent=2)
        fh.write("\n")
    return entry


def _jumped_q(pde: Trajectory, event) -> float:
    """Charge after an event: the tracked q_hat just past the jump."""
    for t, readings in zip(pde.times, pde.tracked_readings()):
        if t >= event.t_hi and readings[event.vortex_index] is not None:
            return float(readings[event.vortex_index].q_hat)
    return float("nan")


def _run_leg_entry(args):
    sc_dict, index, out_base = args
    sc = Scenario(**sc_dict)
    return index, run_leg(sc, index, out_base)


def run_scenario(sc: Scenario, threads: int = 1,
                 out_dir: str | Path | None = None) -> ComparisonReport:
    """Run all eps legs (optionally in parallel) and aggregate the report."""
    out_base = Path(out_dir if out_dir is not None else sc.out_dir) / sc.name
    out_base.mkdir(parents=True, exist_ok=True)
    sc.to_json(out_base / "scenario.json")
    report = ComparisonReport(scenario=sc.name, kind=sc.kind)
    results: dict[int, dict] = {}
    indices = list(range(len(sc.eps_list)))
    if threads > 1 and len(indices) > 1:
        jobs = [(asdict(sc), i, str(out_base)) for i in indices]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for i, entry in pool.map(_run_leg_entry, jobs):
                results[i] = entry
    else:
        for i in indices:
            try:
                results[i] = run_leg(sc, i, out_base)
            except (NumericalError, RuntimeError, ValueError) as exc:
                report.failures.append({"eps": sc.eps_list[i],
                                        "error": str(exc)})
    for i in indices:
        if i in results:
            report.per_eps.append(results[i])
    for entry in report.per_eps:
        for ev in entry.get("events", []):
            report.event_alignment.append(
                {"eps": entry["eps"], "pde_event": ev, "ode_jump": True})
    report.finalize()
    report.to_json(out_base / "report.json")
    return report
