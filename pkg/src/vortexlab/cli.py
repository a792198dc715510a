"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 partial results (some sweep legs failed but a report was produced).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


@click.group()
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker processes for sweep legs.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (overrides scenario/out defaults).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed recorded in run metadata (runs are deterministic).")
@click.pass_context
def main(ctx, threads, out_dir, seed):
    """Vortex-dynamics laboratory: PDE runs, limiting ODEs, comparison."""
    ctx.ensure_object(dict)
    ctx.obj.update(threads=threads, out_dir=out_dir, seed=seed)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _outdir(ctx, default="runs"):
    out = Path(ctx.obj.get("out_dir") or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_field(data, kind):
    from .grid import make_grid
    from .fields import VortexSet
    from .seeding import (seed_vortex_field, seed_gl_field,
                          inject_phase_perturbation)

    gspec = data.get("grid", {})
    grid = make_grid(gspec.get("n", 129), gspec.get("n", 129),
                     gspec.get("domain", "disk"),
                     data.get("bc", "dirichlet"))
    vort = data.get("vortices", [])
    if not vort:
        raise ValueError("config needs a non-empty 'vortices' list")
    v = VortexSet.from_lists([w["a"] for w in vort],
                             [w["d"] for w in vort])
    gv = None
    if data.get("boundary_data", "symmetric") == "symmetric" \
            and gspec.get("domain", "disk") == "disk":
        gv = VortexSet.from_lists([(0.0, 0.0)],
                                  [int(round(sum(v.degrees))) or 1])
    eps = data["eps"]
    if kind == "gl":
        f = seed_gl_field(grid, v, eps, g_vortices=gv)
    else:
        pol = [w.get("polarity", 1) for w in vort]
        f = seed_vortex_field(grid, v, eps, polarity=pol,
                              profile=data.get("profile", "cap"),
                              g_vortices=gv)
    pert = data.get("perturbation")
    if pert:
        inject_phase_perturbation(f, float(pert["target_excess"]),
                                  wavenumber=int(pert.get("wavenumber", 5)),
                                  eps=eps)
    return f


def _simulate(ctx, config_path, kind):
    from .llg import LLGConfig, llg_run, detect_bubbling
    from .glmixed import GLConfig, gl_run
    from .trajectory import NumericalError, save_trajectory
    from .fields import save_field

    data = _load_json(config_path)
    out = _outdir(ctx)
    try:
        f0 = _build_field(data, kind)
        cls = GLConfig if kind == "gl" else LLGConfig
        allowed = {"eps", "alpha0", "t_end", "dt", "bc", "scheme",
                   "snapshot_stride", "r_min", "r_bdry"}
        kwargs = {k: v for k, v in data.items() if k in allowed}
        cfg = cls(**kwargs)
    except (ValueError, KeyError, TypeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    save_field(f0, out / "initial.fld", time=0.0, epsilon=cfg.eps)
    try:
        traj = (gl_run if kind == "gl" else llg_run)(cfg, f0)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        if exc.partial is not None:
            save_trajectory(exc.partial, out / "trajectory.csv")
        sys.exit(EXIT_NUMERICAL)
    if kind == "llg":
        traj.events = detect_bubbling(traj)
    save_trajectory(traj, out / "trajectory.csv")
    click.echo(f"wrote {out / 'trajectory.csv'} (status: {traj.status})")


@main.command("simulate-llg")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def simulate_llg(ctx, config_path):
    """Integrate the director dynamics from a JSON run config."""
    _simulate(ctx, config_path, "llg")


@main.command("simulate-gl")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def simulate_gl(ctx, config_path):
    """Integrate the complex Ginzburg-Landau dynamics from a JSON config."""
    _simulate(ctx, config_path, "gl")


@main.command()
@click.option("--kind", type=click.Choice(["llg", "gl"]), required=True)
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def ode(ctx, kind, config_path):
    """Integrate the limiting point-vortex ODE."""
    from .motion import OdeState, ode_integrate, QJump
    from .renorm import RenormalizedEnergyModel, symmetric_disk_model
    from .grid import BoundaryKind
    from .trajectory import save_trajectory

    data = _load_json(config_path)
    out = _outdir(ctx)
    try:
        if data.get("domain", "disk") == "disk" \
                and data.get("boundary_data", "symmetric") == "symmetric":
            model = symmetric_disk_model(data.get("bc", "dirichlet"))
        else:
            model = RenormalizedEnergyModel(
                domain=data.get("domain", "disk"),
                bc=BoundaryKind(data.get("bc", "dirichlet")))
        vort = data["vortices"]
        s0 = OdeState(a=[w["a"] for w in vort], d=[w["d"] for w in vort],
                      q=[w.get("q", w["d"] / 2) for w in vort],
                      alpha0=data["alpha0"], model=model, kind=kind)
        jumps = [QJump(**j) for j in data.get("q_jumps", [])]
        traj = ode_integrate(s0, data["t_end"],
                             tol=data.get("tol", 1e-9),
                             q_jumps=jumps or None)
    except (ValueError, KeyError, TypeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except RuntimeError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    save_trajectory(traj, out / "ode.csv")
    click.echo(f"wrote {out / 'ode.csv'} (status: {traj.status})")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def renorm(ctx, config_path):
    """Evaluate the renormalized energy and its gradient for a configuration."""
    from .fields import VortexSet
    from .renorm import (RenormalizedEnergyModel, symmetric_disk_model,
                         renormalized_energy, grad_W)
    from .grid import BoundaryKind

    data = _load_json(config_path)
    try:
        vort = data["vortices"]
        v = VortexSet.from_lists([w["a"] for w in vort],
                                 [w["d"] for w in vort])
        if data.get("domain", "free-plane") == "disk" \
                and data.get("boundary_data", "symmetric") == "symmetric":
            model = symmetric_disk_model(data.get("bc", "dirichlet"),
                                         method=data.get("method", "auto"))
        else:
            model = RenormalizedEnergyModel(
                domain=data.get("domain", "free-plane"),
                bc=BoundaryKind(data.get("bc", "dirichlet")),
                method=data.get("method", "auto"),
                n=data.get("n", 257))
        W = renormalized_energy(v, model)
        gw = grad_W(v, model)
    except (ValueError, KeyError, TypeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    result = {"W": W, "grad_W": gw.tolist(),
              "method": model.resolve_method(v)}
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("pde_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("ode_csv", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def compare(ctx, pde_csv, ode_csv):
    """Compare a PDE trajectory CSV against an ODE trajectory CSV."""
    from .trajectory import load_trajectory
    from .harness import compare_tracks

    try:
        pde = load_trajectory(pde_csv)
        od = load_trajectory(ode_csv)
    except (OSError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(json.dumps(compare_tracks(pde, od), indent=2))


@main.group()
def scenario():
    """Bundled and user-supplied experiment scenarios."""


def _bundled_dir() -> Path:
    return Path(__file__).parent / "scenarios"


@scenario.command("list")
def scenario_list():
    """List bundled scenario files."""
    for p in sorted(_bundled_dir().glob("*.json")):
        with open(p) as fh:
            data = json.load(fh)
        click.echo(f"{p.stem}: {data.get('kind')} on {data.get('domain')}, "
                   f"eps:{data.get('eps_list')}")


@scenario.command("run")
@click.argument("name_or_path")
@click.pass_context
def scenario_run(ctx, name_or_path):
    """Run a scenario by bundled name or JSON path."""
    from .harness import Scenario, ConfigError, run_scenario
    from .trajectory import NumericalError

    path = Path(name_or_path)
    if not path.exists():
        path = _bundled_dir() / f"{name_or_path}.json"
    if not path.exists():
        click.echo(f"config error: no scenario {name_or_path!r}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        sc = Scenario.from_json(path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        report = run_scenario(sc, threads=ctx.obj["threads"],
                              out_dir=ctx.obj.get("out_dir"))
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    click.echo(json.dumps({"scenario": report.scenario,
                           "monotone": report.monotone,
                           "per_eps": [{k: e.get(k) for k in
                                        ("eps", "sup_distance", "status")}
                                       for e in report.per_eps],
                           "failures": report.failures}, indent=2))
    if report.failures:
        sys.exit(EXIT_PARTIAL)


if __name__ == "__main__":
    main()
