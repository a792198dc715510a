"""Shared time-stepping chassis for the PDE integrators.

Both evolution models (3-vector director dynamics and complex
Ginzburg-Landau dynamics) drive the same loop: advance `stride` steps,
record diagnostics, accumulate the dissipation integral, enforce the
energy-balance guard with automatic dt reduction, and stop on collision
or boundary escape.  Only the single-step kernel and the diagnostics
callback differ between models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid2D
from .diagnostics import VortexReading
from .trajectory import Trajectory, NumericalError

MAX_DT_REDUCTIONS = 5
BALANCE_RTOL = 1e-6


@dataclass
class RunHooks:
    """Model-specific callbacks consumed by :func:`run_loop`.

    step(state, t, dt) -> (new_state, dissipation_increment): one accepted
    time step; the increment approximates alpha * integral |d state/dt|^2
    over the step (zero allowed for diagnostic modes).

    diagnostics(state, t) -> (vortex readings, scalar dict); the scalar dict
    must include `energy_key` when the balance guard is active.

    on_dt_change(dt): rebuild any dt-dependent factorization.
    """

    step: Callable[[np.ndarray, float, float], tuple[np.ndarray, float]]
    diagnostics: Callable[[np.ndarray, float], tuple[list[VortexReading], dict]]
    on_dt_change: Callable[[float], None] | None = None
    check_balance: bool = True
    energy_key: str = "variational_energy"


def rk4_step(rhs: Callable[[np.ndarray, float], np.ndarray],
             project: Callable[[np.ndarray], np.ndarray] | None,
             weight: float):
    """Build a classical RK4 step kernel with per-stage projection.

    `weight` converts a squared stage norm into the grid integral
    (typically alpha * h^2); the returned kernel accumulates the
    dissipation integral by Simpson's rule over the stages.
    """

    def do(y, t, dt):
        p = project if project is not None else (lambda z: z)
        k1 = rhs(y, t)
        k2 = rhs(p(y + 0.5 * dt * k1), t + 0.5 * dt)
        k3 = rhs(p(y + 0.5 * dt * k2), t + 0.5 * dt)
        k4 = rhs(p(y + dt * k3), t + dt)
        ynew = p(y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        sq = (np.abs(k1) ** 2 + 2 * np.abs(k2) ** 2
              + 2 * np.abs(k3) ** 2 + np.abs(k4) ** 2)
        diss = weight * dt / 6.0 * float(sq.sum())
        return ynew, diss

    return do


def _stop_reason(readings: list[VortexReading], grid: Grid2D,
                 r_min: float, r_bdry: float) -> str | None:
    pos = [np.asarray(r.position) for r in readings]
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if np.linalg.norm(pos[i] - pos[j]) < r_min:
                return "collision"
    for p in pos:
        if grid.dist_to_boundary(p) < r_bdry:
            return "boundary"
    return None


def run_loop(state: np.ndarray, grid: Grid2D, t_end: float, dt: float,
             stride: int, hooks: RunHooks, traj: Trajectory,
             r_min: float, r_bdry: float) -> np.ndarray:
    """Advance `state` to t_end, filling `traj` in place.

    Snapshots every `stride` steps and at t_end.  On a balance violation
    (recorded energy increasing by more than BALANCE_RTOL relative between
    snapshots minus the dissipated amount already accounted for) the stride
    is redone from the previous snapshot at half the step size; after
    MAX_DT_REDUCTIONS the run aborts with the partial trajectory attached.
    """
    t = 0.0
    dissipated = 0.0
    readings, scal = hooks.diagnostics(state, t)
    scal["dissipated_energy"] = dissipated
    traj.append(t, readings, scal)
    e_prev = scal.get(hooks.energy_key, np.nan)
    reductions = 0
    while t < t_end - 1e-12 * max(1.0, t_end):
        n_sub = min(stride, max(1, int(np.ceil((t_end - t) / dt - 1e-9))))
        saved, saved_t, saved_diss = state.copy(), t, dissipated
        ok = True
        for _ in range(n_sub):
            step_dt = min(dt, t_end - t)
            state, inc = hooks.step(state, t, step_dt)
            dissipated += inc
            t += step_dt
        if not np.isfinite(state).all():
            traj.status = "blowup"
            raise NumericalError(
                f"non-finite state at t ~ {t:.6g}; last good snapshot at "
                f"t = {saved_t:.6g}", partial=traj)
        readings, scal = hooks.diagnostics(state, t)
        e_now = scal.get(hooks.energy_key, np.nan)
        if (hooks.check_balance and np.isfinite(e_prev) and np.isfinite(e_now)
                and e_now > e_prev + BALANCE_RTOL * abs(e_prev)):
            ok = False
        if not ok:
            reductions += 1
            if reductions > MAX_DT_REDUCTIONS:
                traj.status = "blowup"
                raise NumericalError(
                    f"energy balance violated after {MAX_DT_REDUCTIONS} dt "
                    f"reductions (t = {saved_t:.6g})", partial=traj)
            state, t, dissipated = saved, saved_t, saved_diss
            dt *= 0.5
            stride *= 2
            if hooks.on_dt_change is not None:
                hooks.on_dt_change(dt)
            continue
        scal["dissipated_energy"] = dissipated
        traj.append(t, readings, scal)
        e_prev = e_now
        reason = _stop_reason(readings, grid, r_min, r_bdry)
        if reason is not None:
            traj.status = reason
            break
    traj.meta["dt_final"] = dt
    return state
