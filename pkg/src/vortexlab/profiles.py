"""Radial vortex-core profiles and the 1D core-energy minimization oracle."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

C_CORE = 3.0           # core radius multiplier for the cap profile
PROFILE_NODES = 10_000


def cap_angle(r: np.ndarray, eps: float) -> np.ndarray:
    """Polar angle theta(r) of the cap profile: 0 at the center, pi/2 for
    r >= 2*C_CORE*eps, cosine-blended monotone ramp in between."""
    t = np.clip(np.asarray(r, dtype=float) / (2 * C_CORE * eps), 0.0, 1.0)
    return (np.pi / 2) * 0.5 * (1.0 - np.cos(np.pi * t))


def cap_m3(r: np.ndarray, eps: float) -> np.ndarray:
    """cos(theta(r)): 1 at the center, 0 outside the core."""
    return np.cos(cap_angle(r, eps))


def gl_cap_modulus(r: np.ndarray, eps: float) -> np.ndarray:
    """Smooth Ginzburg-Landau core modulus: 0 at the center, ~1 for r >> eps."""
    return np.tanh(np.asarray(r, dtype=float) / (np.sqrt(2.0) * eps))


# ---------------------------------------------------------------------------
# 1D radial minimizers on [0, 1]
#
# LLG:  E[theta] = pi * int (theta'^2 + sin^2(theta)/r^2 + cos^2(theta)/eps^2) r dr
#       theta(0) = 0, theta(1) = pi/2
# GL:   E[f] = pi * int (f'^2 + f^2/r^2 + (1 - f^2)^2 / (2 eps^2)) r dr
#       f(0) = 0, f(1) = 1
#
# gamma_num(eps) = E_min - pi log(1/eps); the finite-eps core-energy constant
# of a unit-disk vortex with symmetric boundary data, computed rather than
# assumed.
# ---------------------------------------------------------------------------

def _radial_grid(n: int):
    r = np.linspace(0.0, 1.0, n + 1)
    return r, r[1] - r[0]


def _llg_energy_and_grad(theta_in: np.ndarray, r: np.ndarray, dr: float,
                         eps: float):
    th = np.concatenate(([0.0], theta_in, [np.pi / 2]))
    rmid = 0.5 * (r[1:] + r[:-1])
    dth = np.diff(th) / dr
    grad_term = dth**2 * rmid
    rs = np.where(r > 0, r, np.inf)
    sin_term = np.sin(th) ** 2 / rs * 1.0
    cos_term = np.cos(th) ** 2 * r / eps**2
    E = np.pi * (grad_term.sum() * dr
                 + np.sum(sin_term) * dr + np.sum(cos_term) * dr)
    # gradient wrt interior nodes
    g = np.zeros_like(th)
    gm = dth * rmid  # d/d(dth) of 0.5*sum...
    g[1:] += 2 * gm
    g[:-1] -= 2 * gm
    g += 2 * np.sin(th) * np.cos(th) / rs * dr
    g += -2 * np.cos(th) * np.sin(th) * r / eps**2 * dr
    g *= np.pi
    return E, g[1:-1]


def _gl_energy_and_grad(f_in: np.ndarray, r: np.ndarray, dr: float, eps: float):
    f = np.concatenate(([0.0], f_in, [1.0]))
    rmid = 0.5 * (r[1:] + r[:-1])
    df = np.diff(f) / dr
    rs = np.where(r > 0, r, np.inf)
    E = np.pi * (np.sum(df**2 * rmid) * dr
                 + np.sum(f**2 / rs) * dr
                 + np.sum((1 - f**2) ** 2 * r) * dr / (2 * eps**2))
    g = np.zeros_like(f)
    gm = df * rmid
    g[1:] += 2 * gm
    g[:-1] -= 2 * gm
    g += 2 * f / rs * dr
    g += -2 * (1 - f**2) * f * r * 2 / (2 * eps**2) * dr
    g *= np.pi
    return E, g[1:-1]


def _minimize_profile(kind: str, eps: float, n: int):
    r, dr = _radial_grid(n)
    if kind == "llg":
        theta0 = np.minimum(r / (2 * eps), 1.0) * np.pi / 2
        fun = lambda x: _llg_energy_and_grad(x, r, dr, eps)
        x0 = theta0[1:-1]
        lo, hi = 0.0, np.pi / 2
    else:
        f0 = np.tanh(r / (np.sqrt(2) * eps))
        f0 = f0 / f0[-1]
        fun = lambda x: _gl_energy_and_grad(x, r, dr, eps)
        x0 = f0[1:-1]
        lo, hi = 0.0, 1.0
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   bounds=[(lo, hi)] * len(x0),
                   options={"maxiter": 2000, "ftol": 1e-14, "gtol": 1e-10})
    profile = np.concatenate(([lo if kind == "gl" else 0.0], res.x,
                              [hi if kind == "gl" else np.pi / 2]))
    return r, profile, float(res.fun)


@lru_cache(maxsize=64)
def core_energy_constant(kind: str, eps: float, n: int = PROFILE_NODES) -> float:
    """gamma_num(eps): minimal radial core energy minus pi log(1/eps)."""
    _, _, E = _minimize_profile(kind, eps, n)
    return E - np.pi * np.log(1.0 / eps)


@lru_cache(maxsize=64)
def minimizing_profile(kind: str, eps: float, n: int = PROFILE_NODES):
    """Radial minimizer: (r nodes, theta(r)) for LLG or (r, f(r)) for GL."""
    r, prof, _ = _minimize_profile(kind, eps, n)
    return r, prof
