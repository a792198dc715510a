"""Sparse Laplace/Poisson solves on masked grids."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid2D

CG_TOL = 1e-12


class SolverError(RuntimeError):
    pass


def _index_map(node_mask: np.ndarray) -> np.ndarray:
    idx = -np.ones(node_mask.shape, dtype=np.int64)
    idx[node_mask] = np.arange(int(node_mask.sum()))
    return idx


def laplace_matrix(grid: Grid2D, unknown: np.ndarray):
    """Assemble the 5-point -Laplacian over `unknown` nodes.

    Returns (A, couplings) where couplings maps boundary-node contributions:
    a list of (row, (i, j), weight) for neighbors outside `unknown` but
    inside the grid mask (their value enters the right-hand side).
    """
    h2 = grid.h * grid.h
    idx = _index_map(unknown)
    n = int(unknown.sum())
    rows, cols, vals = [], [], []
    bc_rows, bc_nodes, bc_w = [], [], []
    ii, jj = np.nonzero(unknown)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        inside = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
        r = idx[ii, jj]
        nic = np.clip(ni, 0, grid.nx - 1)
        njc = np.clip(nj, 0, grid.ny - 1)
        is_unknown = inside & (idx[nic, njc] >= 0)
        in_mask = inside & grid.mask[nic, njc]
        rows.append(r[is_unknown])
        cols.append(idx[nic[is_unknown], njc[is_unknown]])
        vals.append(np.full(int(is_unknown.sum()), -1.0 / h2))
        fixed = in_mask & ~is_unknown
        bc_rows.extend(r[fixed].tolist())
        bc_nodes.extend(zip(nic[fixed].tolist(), njc[fixed].tolist()))
        bc_w.extend([1.0 / h2] * int(fixed.sum()))
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(np.full(n, 4.0 / h2))
    A = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return A, idx, list(zip(bc_rows, bc_nodes, bc_w))


def solve_laplace_dirichlet(grid: Grid2D, boundary_values: np.ndarray,
                            rhs: np.ndarray | None = None) -> np.ndarray:
    """Solve -lap(theta) = rhs on interior nodes with given boundary values."""
    unknown = grid.interior
    A, idx, couplings = laplace_matrix(grid, unknown)
    n = A.shape[0]
    b = np.zeros(n)
    if rhs is not None:
        b += rhs[unknown]
    for row, (i, j), w in couplings:
        b[row] += w * boundary_values[i, j]
    x = _cg(A, b)
    out = np.array(boundary_values, dtype=float, copy=True)
    out[~grid.mask] = 0.0
    out[unknown] = x
    return out


def solve_laplace_neumann(grid: Grid2D, flux: dict[tuple[int, int, int, int], float],
                          rhs: np.ndarray | None = None) -> np.ndarray:
    """Solve -lap(theta) = rhs on all mask nodes with prescribed normal flux.

    `flux` maps (i, j, di, dj) -> outward normal derivative d(theta)/d(nu) on
    the missing face of mask node (i, j) in direction (di, dj).  The solution
    is pinned to zero mean; the flux data must be (approximately) compatible.
    """
    unknown = grid.mask
    h2 = grid.h * grid.h
    idx = _index_map(unknown)
    n = int(unknown.sum())
    rows, cols, vals = [], [], []
    b = np.zeros(n)
    if rhs is not None:
        b += rhs[unknown]
    ii, jj = np.nonzero(unknown)
    diag = np.zeros(n)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        inside = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
        nic = np.clip(ni, 0, grid.nx - 1)
        njc = np.clip(nj, 0, grid.ny - 1)
        nb_in = inside & unknown[nic, njc]
        r = idx[ii, jj]
        rows.append(r[nb_in])
        cols.append(idx[nic[nb_in], njc[nb_in]])
        vals.append(np.full(int(nb_in.sum()), -1.0 / h2))
        diag[r[nb_in]] += 1.0 / h2
        # missing faces: flux boundary condition enters the rhs
        miss = np.nonzero(~nb_in)[0]
        for k in miss:
            g = flux.get((int(ii[k]), int(jj[k]), di, dj), 0.0)
            b[r[k]] += g / grid.h
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    b -= b.mean()  # project out the incompatible component
    x = _cg(A, b, singular=True)
    x -= x.mean()
    out = np.zeros(grid.mask.shape)
    out[unknown] = x
    return out


def _cg(A, b, singular: bool = False) -> np.ndarray:
    d = A.diagonal()
    M = spla.LinearOperator(A.shape, matvec=lambda v: v / d)
    x, info = spla.cg(A, b, rtol=CG_TOL, atol=0.0, maxiter=20000, M=M)
    if info != 0:
        if singular:
            # deflated CG on a singular system can stall at roundoff level
            res = np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300)
            if res < 1e-8:
                return x
        raise SolverError(f"CG failed to converge (info={info})")
    return x


def laplacian_matrix(grid: Grid2D, unknown: np.ndarray | None = None):
    """Sparse replica of :func:`vortexlab.grid.laplacian` on `unknown` nodes.

    Returns (L, idx, fixed): `L` is csr of shape (n, n) such that
    ``L @ values[unknown] + sum(fixed contributions) == laplacian(values)``
    at the unknown nodes.  `fixed` lists (row, (i, j), weight) couplings to
    mask nodes outside `unknown` (Dirichlet data).  Neumann grids use the
    neighbor-count diagonal (mirror closure), matching the stencil sweep.

    Default unknowns: interior nodes for Dirichlet, all mask nodes for
    Neumann.
    """
    from .grid import BoundaryKind

    if unknown is None:
        unknown = grid.interior if grid.bc is BoundaryKind.DIRICHLET else grid.mask
    h2 = grid.h * grid.h
    idx = _index_map(unknown)
    n = int(unknown.sum())
    ii, jj = np.nonzero(unknown)
    rows, cols, vals = [], [], []
    fixed: list[tuple[int, tuple[int, int], float]] = []
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        inside = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
        nic = np.clip(ni, 0, grid.nx - 1)
        njc = np.clip(nj, 0, grid.ny - 1)
        in_mask = inside & grid.mask[nic, njc]
        is_unknown = in_mask & (idx[nic, njc] >= 0)
        r = idx[ii, jj]
        rows.append(r[is_unknown])
        cols.append(idx[nic[is_unknown], njc[is_unknown]])
        vals.append(np.full(int(is_unknown.sum()), 1.0 / h2))
        ext = in_mask & ~is_unknown
        for rr, ei, ej in zip(r[ext].tolist(), nic[ext].tolist(), njc[ext].tolist()):
            fixed.append((rr, (ei, ej), 1.0 / h2))
    # neighbor count per row (for the Neumann mirror diagonal)
    cnt = np.zeros(n, dtype=np.int64)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        inside = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
        nic = np.clip(ni, 0, grid.nx - 1)
        njc = np.clip(nj, 0, grid.ny - 1)
        cnt += (inside & grid.mask[nic, njc]).astype(np.int64)
    diag = -cnt / h2 if grid.bc is BoundaryKind.NEUMANN else np.full(n, -4.0 / h2)
    rows.append(idx[ii, jj])
    cols.append(idx[ii, jj])
    vals.append(diag.astype(float))
    L = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return L, idx, fixed


def directional_matrix(grid: Grid2D, unknown: np.ndarray, axis: int):
    """1D second-difference along `axis` over `unknown` nodes.

    Returns (D, fixed) with D csr and fixed a list of (row, (i, j), weight)
    couplings to mask nodes outside `unknown`, so that the full directional
    second difference is ``D @ values[unknown] + fixed contributions``.
    Neumann grids mirror missing neighbors (zero contribution).  Splitting
    the 5-point Laplacian: laplacian = directional(0) + directional(1).
    """
    from .grid import BoundaryKind

    h2 = grid.h * grid.h
    idx = _index_map(unknown)
    n = int(unknown.sum())
    ii, jj = np.nonzero(unknown)
    rows, cols, vals = [], [], []
    fixed: list[tuple[int, tuple[int, int], float]] = []
    cnt = np.zeros(n, dtype=np.int64)
    for d in (-1, 1):
        ni = ii + (d if axis == 0 else 0)
        nj = jj + (d if axis == 1 else 0)
        inside = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
        nic = np.clip(ni, 0, grid.nx - 1)
        njc = np.clip(nj, 0, grid.ny - 1)
        in_mask = inside & grid.mask[nic, njc]
        is_unk = in_mask & (idx[nic, njc] >= 0)
        r = idx[ii, jj]
        rows.append(r[is_unk])
        cols.append(idx[nic[is_unk], njc[is_unk]])
        vals.append(np.full(int(is_unk.sum()), 1.0 / h2))
        ext = in_mask & ~is_unk
        for rr, ei, ej in zip(r[ext].tolist(), nic[ext].tolist(),
                              njc[ext].tolist()):
            fixed.append((rr, (ei, ej), 1.0 / h2))
        cnt += in_mask
    diag = -cnt / h2 if grid.bc is BoundaryKind.NEUMANN \
        else np.full(n, -2.0 / h2)
    rows.append(idx[ii, jj])
    cols.append(idx[ii, jj])
    vals.append(diag.astype(float))
    D = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return D, fixed
