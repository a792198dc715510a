"""Rectangular lattice with an embedded domain mask and discrete operators.

Array convention: all node arrays have shape (nx, ny) with ``values[i, j]``
living at ``x = origin + (i*h, j*h)`` ('ij' indexing, x first).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Domain(str, Enum):
    RECTANGLE = "rectangle"
    DISK = "disk"


class BoundaryKind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


MIN_NODES = 16


@dataclass
class Grid2D:
    """Uniform tensor grid; the unit disk is realized as a mask on [-1,1]^2."""

    nx: int
    ny: int
    h: float
    origin: tuple[float, float]
    domain: Domain
    bc: BoundaryKind
    mask: np.ndarray = field(repr=False)          # nodes inside the domain
    boundary: np.ndarray = field(repr=False)      # domain nodes on the edge
    interior: np.ndarray = field(repr=False)      # mask & ~boundary

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + self.h * np.arange(self.nx)
        y = self.origin[1] + self.h * np.arange(self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def dist_to_boundary(self, p) -> float:
        """Distance from an interior point to the continuum domain boundary."""
        px, py = float(p[0]), float(p[1])
        if self.domain is Domain.DISK:
            return 1.0 - np.hypot(px, py)
        x0, y0 = self.origin
        x1 = x0 + self.h * (self.nx - 1)
        y1 = y0 + self.h * (self.ny - 1)
        return min(px - x0, x1 - px, py - y0, y1 - py)

    def contains(self, p, margin: float = 0.0) -> bool:
        return self.dist_to_boundary(p) > margin


def make_grid(nx: int, ny: int, domain: Domain | str = Domain.RECTANGLE,
              bc: BoundaryKind | str = BoundaryKind.NEUMANN) -> Grid2D:
    """Build a grid; rectangle is [0,1] x [0,(ny-1)h], disk is |x| <= 1."""
    domain = Domain(domain)
    bc = BoundaryKind(bc)
    if nx < MIN_NODES or ny < MIN_NODES:
        raise ValueError(f"grid too coarse: need nx, ny >= {MIN_NODES}, got {nx}x{ny}")
    if domain is Domain.DISK:
        if nx != ny:
            raise ValueError("disk domain requires nx == ny")
        h = 2.0 / (nx - 1)
        origin = (-1.0, -1.0)
    else:
        h = 1.0 / (nx - 1)
        origin = (0.0, 0.0)

    if domain is Domain.DISK:
        x = origin[0] + h * np.arange(nx)
        y = origin[1] + h * np.arange(ny)
        X, Y = np.meshgrid(x, y, indexing="ij")
        mask = X * X + Y * Y <= 1.0 + 1e-14
    else:
        mask = np.ones((nx, ny), dtype=bool)

    boundary = _boundary_nodes(mask)
    interior = mask & ~boundary
    return Grid2D(nx=nx, ny=ny, h=h, origin=origin, domain=domain, bc=bc,
                  mask=mask, boundary=boundary, interior=interior)


def _boundary_nodes(mask: np.ndarray) -> np.ndarray:
    """Mask nodes with a 4-neighbor outside the mask or on the array edge."""
    out = ~mask
    nb_out = np.zeros_like(mask)
    nb_out[1:, :] |= out[:-1, :]
    nb_out[:-1, :] |= out[1:, :]
    nb_out[:, 1:] |= out[:, :-1]
    nb_out[:, :-1] |= out[:, 1:]
    edge = np.zeros_like(mask)
    edge[0, :] = edge[-1, :] = True
    edge[:, 0] = edge[:, -1] = True
    return mask & (nb_out | edge)


# ---------------------------------------------------------------------------
# Discrete differential operators (mask-aware)
#
# Central differences at nodes with both neighbors in the mask, one-sided
# second order where only one side is available, first order as a last resort.
# Values outside the mask are never read.
# ---------------------------------------------------------------------------

def _shift(a: np.ndarray, d: int, axis: int) -> np.ndarray:
    """Shift with edge replication; replicated entries are masked off later."""
    out = np.roll(a, d, axis=axis)
    if axis == 0:
        if d > 0:
            out[:d, ...] = a[:1, ...]
        elif d < 0:
            out[d:, ...] = a[-1:, ...]
    else:
        if d > 0:
            out[:, :d, ...] = a[:, :1, ...]
        elif d < 0:
            out[:, d:, ...] = a[:, -1:, ...]
    return out


def _shift_mask(m: np.ndarray, d: int, axis: int) -> np.ndarray:
    """Shift a boolean mask, filling with False beyond the array edge."""
    out = np.roll(m, d, axis=axis)
    if axis == 0:
        if d > 0:
            out[:d, :] = False
        elif d < 0:
            out[d:, :] = False
    else:
        if d > 0:
            out[:, :d] = False
        elif d < 0:
            out[:, d:] = False
    return out


def deriv(values: np.ndarray, grid: Grid2D, axis: int) -> np.ndarray:
    """Mask-aware partial derivative along axis (0 -> x, 1 -> y)."""
    m = grid.mask
    h = grid.h
    vp1 = _shift(values, -1, axis)   # value at node + 1
    vm1 = _shift(values, +1, axis)
    vp2 = _shift(values, -2, axis)
    vm2 = _shift(values, +2, axis)
    mp1 = _shift_mask(m, -1, axis)
    mm1 = _shift_mask(m, +1, axis)
    mp2 = _shift_mask(m, -2, axis)
    mm2 = _shift_mask(m, +2, axis)

    if values.ndim > 2:
        expand = (...,) + (None,) * (values.ndim - 2)
        mp1e, mm1e, mp2e, mm2e = (a[expand] for a in (mp1, mm1, mp2, mm2))
    else:
        mp1e, mm1e, mp2e, mm2e = mp1, mm1, mp2, mm2

    central = (vp1 - vm1) / (2 * h)
    fwd2 = (-3 * values + 4 * vp1 - vp2) / (2 * h)
    fwd1 = (vp1 - values) / h
    bwd2 = (3 * values - 4 * vm1 + vm2) / (2 * h)
    bwd1 = (values - vm1) / h

    d = np.where(mp1e & mm1e, central,
                 np.where(mp1e, np.where(mp2e, fwd2, fwd1),
                          np.where(mm1e, np.where(mm2e, bwd2, bwd1), 0.0)))
    if values.ndim > 2:
        d = np.where(m[expand], d, 0.0)
    else:
        d = np.where(m, d, 0.0)
    return d


def gradient(values: np.ndarray, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    return deriv(values, grid, 0), deriv(values, grid, 1)


def divergence(vx: np.ndarray, vy: np.ndarray, grid: Grid2D) -> np.ndarray:
    return deriv(vx, grid, 0) + deriv(vy, grid, 1)


def curl(vx: np.ndarray, vy: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Scalar curl of a planar vector field."""
    return deriv(vy, grid, 0) - deriv(vx, grid, 1)


def laplacian(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    """5-point Laplacian on interior nodes, zero on boundary/outside nodes.

    With the Neumann descriptor, missing neighbors on rectangle edges are
    mirrored (second order for the homogeneous flux condition); for the
    jagged disk boundary the missing neighbor value equals the center, which
    is the first-order zero-flux closure. With Dirichlet, boundary node
    values are part of the data and only interior values are produced.
    """
    m = grid.mask
    h2 = grid.h * grid.h
    if values.ndim > 2:
        expand = (...,) + (None,) * (values.ndim - 2)
        mm = m[expand]
    else:
        expand = None
        mm = m

    total = np.zeros_like(values)
    count = np.zeros(m.shape, dtype=np.int64)
    for axis in (0, 1):
        for d in (-1, +1):
            nb_mask = _shift(m, -d, axis)
            nb_val = _shift(values, -d, axis)
            w = nb_mask if expand is None else nb_mask[expand]
            total = total + np.where(w, nb_val, 0.0)
            count = count + nb_mask
    if grid.bc is BoundaryKind.NEUMANN:
        # missing neighbors mirror the center value: (nbr - c) contribution 0
        cnt = count if expand is None else count[expand]
        lap = (total - cnt * values) / h2
        return np.where(mm, lap, 0.0)
    lap = (total - 4 * values) / h2
    if expand is None:
        return np.where(grid.interior, lap, 0.0)
    return np.where(grid.interior[expand], lap, 0.0)


def ball_weights(grid: Grid2D, center, r: float) -> np.ndarray:
    """Quadrature weights (cell fractions) for the ball B_r(center).

    Cells fully inside get weight 1, a one-cell-wide rim gets the linear cut
    fraction, outside gets 0. The ball must be contained in the domain.
    """
    cx, cy = float(center[0]), float(center[1])
    if grid.dist_to_boundary((cx, cy)) < r:
        raise ValueError("ball not contained in domain")
    X, Y = grid.coords()
    dist = np.hypot(X - cx, Y - cy)
    return np.clip((r - dist) / grid.h + 0.5, 0.0, 1.0) * grid.mask
