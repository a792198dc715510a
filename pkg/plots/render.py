#!/usr/bin/env python3
"""Offline figure generation from persisted trajectory CSVs and sweep reports.

Usage: python plots/render.py --spec fig.json

The spec is a JSON object:
    kind     one of trajectory-overlay | energy-series |
             eps-sweep-distance | residual-refinement
    out      output image path (extension selects the format)
    title    optional figure title
    and per-kind input paths (see KINDS below).

This tool only reads persisted outputs (CSV time series, JSON reports); it
never recomputes physics.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


class SchemaError(ValueError):
    """Input file does not conform to the documented schema."""


def _read_csv(path, required):
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise SchemaError(f"{path}: file not found")
    except Exception as exc:
        raise SchemaError(f"{path}: unreadable CSV ({exc})")
    for col in required:
        if col not in df.columns:
            raise SchemaError(f"{path}: missing required column `{col}`")
    return df


def _track_columns(df, path):
    ks = []
    k = 0
    while f"v{k}_x" in df.columns:
        if f"v{k}_y" not in df.columns:
            raise SchemaError(f"{path}: missing required column `v{k}_y`")
        ks.append(k)
        k += 1
    if not ks:
        raise SchemaError(f"{path}: missing required column `v0_x`")
    return ks


def _events(csv_path):
    sidecar = Path(str(csv_path)[: -len(Path(csv_path).suffix)] + ".meta.json")
    if not sidecar.exists():
        return []
    with open(sidecar) as fh:
        return json.load(fh).get("events", [])


def plot_trajectory_overlay(spec, ax):
    pde = _read_csv(spec["pde"], ["time"])
    ode = _read_csv(spec["ode"], ["time"])
    theta = np.linspace(0, 2 * math.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="0.6", lw=1.0,
            label="domain boundary")
    for k in _track_columns(pde, spec["pde"]):
        ax.plot(pde[f"v{k}_x"], pde[f"v{k}_y"], "-", lw=1.8,
                label=f"PDE vortex {k}")
    for k in _track_columns(ode, spec["ode"]):
        ax.plot(ode[f"v{k}_x"], ode[f"v{k}_y"], "--", lw=1.4,
                label=f"ODE vortex {k}")
    for ev in _events(spec["pde"]):
        t_mid = 0.5 * (ev["t_lo"] + ev["t_hi"])
        k = ev["vortex_index"]
        x = np.interp(t_mid, pde["time"], pde[f"v{k}_x"])
        y = np.interp(t_mid, pde["time"], pde[f"v{k}_y"])
        ax.plot([x], [y], "r*", ms=14, label="event")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(fontsize=7, loc="best")


def plot_energy_series(spec, ax):
    df = _read_csv(spec["csv"], ["time"])
    cols = spec.get("columns") or [c for c in
                                   ("total_energy", "variational_energy",
                                    "excess_energy", "dissipated_energy")
                                   if c in df.columns]
    if not cols:
        raise SchemaError(f"{spec['csv']}: missing required column "
                          "`total_energy` (no energy series present)")
    for c in cols:
        if c not in df.columns:
            raise SchemaError(f"{spec['csv']}: missing required column `{c}`")
        ax.plot(df["time"], df[c], label=c)
    ax.set_xlabel("time")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8)


def plot_eps_sweep_distance(spec, ax):
    with open(spec["report"]) as fh:
        report = json.load(fh)
    entries = report.get("per_eps")
    if not entries:
        raise SchemaError(f"{spec['report']}: missing required key `per_eps`")
    eps, dist = [], []
    for e in entries:
        if "eps" not in e:
            raise SchemaError(f"{spec['report']}: per_eps entry missing `eps`")
        if e.get("sup_distance") is None:
            continue
        eps.append(e["eps"])
        dist.append(e["sup_distance"])
    if not dist:
        raise SchemaError(f"{spec['report']}: no entries carry `sup_distance`")
    ax.loglog(eps, dist, "o-")
    ax.invert_xaxis()
    ax.set_xlabel("eps")
    ax.set_ylabel("sup-time track distance")
    ax.grid(True, which="both", alpha=0.3)


def plot_residual_refinement(spec, ax):
    rows = spec.get("series")
    if not rows:
        raise SchemaError("spec: missing required key `series` "
                          "(list of {label, h, residual})")
    for entry in rows:
        for key in ("label", "h", "residual"):
            if key not in entry:
                raise SchemaError(f"spec: series entry missing `{key}`")
        ax.loglog(entry["h"], entry["residual"], "o-", label=entry["label"])
    ax.invert_xaxis()
    ax.set_xlabel("h")
    ax.set_ylabel("L1 residual")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)


KINDS = {
    "trajectory-overlay": plot_trajectory_overlay,
    "energy-series": plot_energy_series,
    "eps-sweep-distance": plot_eps_sweep_distance,
    "residual-refinement": plot_residual_refinement,
}


def render(spec: dict) -> Path:
    kind = spec.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"spec: unknown kind {kind!r}; expected one of "
                          f"{sorted(KINDS)}")
    out = spec.get("out")
    if not out:
        raise SchemaError("spec: missing required key `out`")
    fig, ax = plt.subplots(figsize=spec.get("figsize", (5.0, 4.0)))
    KINDS[kind](spec, ax)
    if spec.get("title"):
        ax.set_title(spec["title"])
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out, dpi=spec.get("dpi", 150))
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--spec", required=True, help="figure spec JSON path")
    args = ap.parse_args(argv)
    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
