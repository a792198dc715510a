"""Field containers, vortex bookkeeping, and snapshot persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import BoundaryKind, Grid2D, make_grid

DEGENERATE_TOL = 1e-8


@dataclass
class DirectorField:
    """S^2-valued magnetization on grid nodes; m has shape (nx, ny, 3)."""

    grid: Grid2D
    m: np.ndarray

    def copy(self) -> "DirectorField":
        return DirectorField(self.grid, self.m.copy())

    @property
    def planar(self) -> np.ndarray:
        """m1 + i m2 as a complex array."""
        return self.m[..., 0] + 1j * self.m[..., 1]

    @property
    def m3(self) -> np.ndarray:
        return self.m[..., 2]


@dataclass
class ComplexField:
    """Complex order parameter on grid nodes; u has shape (nx, ny)."""

    grid: Grid2D
    u: np.ndarray

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.u.copy())


@dataclass(frozen=True)
class Vortex:
    a: tuple[float, float]
    d: int
    q: float

    def __post_init__(self):
        if self.d not in (-1, 1):
            raise ValueError(f"degree must be +-1, got {self.d}")
        if abs(2 * self.q - round(2 * self.q)) > 1e-9 or round(2 * self.q) % 2 == 0:
            raise ValueError(f"gyro-coefficient must be a half-integer, got {self.q}")


@dataclass
class VortexSet:
    entries: list[Vortex] = field(default_factory=list)

    @classmethod
    def from_lists(cls, positions, degrees, q=None) -> "VortexSet":
        if q is None:
            q = [d / 2 for d in degrees]
        return cls([Vortex(tuple(map(float, a)), int(d), float(qq))
                    for a, d, qq in zip(positions, degrees, q)])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def positions(self) -> np.ndarray:
        return np.array([v.a for v in self.entries], dtype=float)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([v.d for v in self.entries], dtype=int)

    @property
    def q(self) -> np.ndarray:
        return np.array([v.q for v in self.entries], dtype=float)


def rho(v: VortexSet, grid: Grid2D) -> float:
    """Minimal measure of intervortex and vortex-boundary distance."""
    if len(v) == 0:
        raise ValueError("empty vortex set")
    pos = v.positions
    dist_bnd = min(grid.dist_to_boundary(p) for p in pos)
    if len(v) == 1:
        return dist_bnd
    dmat = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(dmat, np.inf)
    return min(0.5 * dmat.min(), dist_bnd)


@dataclass(frozen=True)
class EpsilonSchedule:
    """Core size eps with the matched damping alpha_eps = alpha0 / log(1/eps)."""

    eps: float
    alpha0: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.5:
            raise ValueError(f"eps must lie in (0, 1/2], got {self.eps}")

    @property
    def alpha_eps(self) -> float:
        return self.alpha0 / np.log(1.0 / self.eps)


def project_unit(f: DirectorField) -> DirectorField:
    """Normalize every node vector to the unit sphere (idempotent)."""
    norms = np.linalg.norm(f.m, axis=-1)
    bad = (norms < DEGENERATE_TOL) & f.grid.mask
    if bad.any():
        raise ValueError(f"degenerate director at {int(bad.sum())} node(s)")
    safe = np.where(norms > 0, norms, 1.0)
    f.m = f.m / safe[..., None]
    return f


# ---------------------------------------------------------------------------
# Snapshot format: raw little-endian float64, row-major, components
# interleaved, plus a JSON sidecar.  Extensions `.fld` / `.fld.json`.
# ---------------------------------------------------------------------------

def save_field(f: DirectorField | ComplexField, path, time: float = 0.0,
               epsilon: float | None = None) -> None:
    path = Path(path)
    g = f.grid
    if isinstance(f, DirectorField):
        data = f.m
        components = ["m1", "m2", "m3"]
    else:
        data = np.stack([f.u.real, f.u.imag], axis=-1)
        components = ["re", "im"]
    arr = np.ascontiguousarray(data, dtype="<f8")
    arr.tofile(path)
    sidecar = {
        "nx": g.nx, "ny": g.ny, "h": g.h,
        "origin": list(g.origin),
        "domain": g.domain.value, "bc": g.bc.value,
        "components": components,
        "time": time, "epsilon": epsilon,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_field(path) -> DirectorField | ComplexField:
    path = Path(path)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    grid = make_grid(meta["nx"], meta["ny"], meta["domain"], meta["bc"])
    ncomp = len(meta["components"])
    arr = np.fromfile(path, dtype="<f8").reshape(meta["nx"], meta["ny"], ncomp)
    if meta["components"] == ["re", "im"]:
        return ComplexField(grid, arr[..., 0] + 1j * arr[..., 1])
    return DirectorField(grid, arr)


def apply_dirichlet(f: DirectorField | ComplexField, g_boundary: np.ndarray) -> None:
    """Pin boundary node values; g_boundary is complex (nx, ny) boundary data."""
    bnd = f.grid.boundary
    if isinstance(f, ComplexField):
        f.u[bnd] = g_boundary[bnd]
    else:
        f.m[bnd, 0] = g_boundary[bnd].real
        f.m[bnd, 1] = g_boundary[bnd].imag
        f.m[bnd, 2] = 0.0
