"""Canonical harmonic map, renormalized energy, and related identities.

Sign conventions: R^2 is identified with C, with i acting as rotation by +90
degrees.  The pair sum in W runs over ordered pairs (each unordered pair
counts twice); this matches the closed-form gradient below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, DirectorField, VortexSet, rho
from .grid import BoundaryKind, Domain, Grid2D, deriv, make_grid
from .solvers import solve_laplace_dirichlet, solve_laplace_neumann


# ---------------------------------------------------------------------------
# Canonical harmonic map
# ---------------------------------------------------------------------------

def product_phase(grid: Grid2D, v: VortexSet) -> np.ndarray:
    """Unit-modulus product of ((x-a_n)/|x-a_n|)^{d_n} as a complex array."""
    X, Y = grid.coords()
    psi = np.zeros((grid.nx, grid.ny))
    for vx in v:
        psi += vx.d * np.arctan2(Y - vx.a[1], X - vx.a[0])
    return np.exp(1j * psi)


def product_current(v: VortexSet, X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Supercurrent of the bare product map: sum_n d_n (x-a_n)^perp/|x-a_n|^2."""
    jx = np.zeros_like(np.asarray(X, dtype=float))
    jy = np.zeros_like(jx)
    for vx in v:
        dx = X - vx.a[0]
        dy = Y - vx.a[1]
        r2 = dx * dx + dy * dy
        r2 = np.where(r2 > 0, r2, np.inf)
        jx += vx.d * (-dy) / r2
        jy += vx.d * dx / r2
    return jx, jy


def boundary_loop(grid: Grid2D) -> list[tuple[int, int]]:
    """Boundary nodes ordered around the domain contour."""
    nodes = list(zip(*np.nonzero(grid.boundary)))
    if grid.domain is Domain.DISK:
        X, Y = grid.coords()
        nodes.sort(key=lambda ij: np.arctan2(Y[ij], X[ij]))
        return nodes
    nx, ny = grid.nx, grid.ny
    loop = [(i, 0) for i in range(nx)]
    loop += [(nx - 1, j) for j in range(1, ny)]
    loop += [(i, ny - 1) for i in range(nx - 2, -1, -1)]
    loop += [(0, j) for j in range(ny - 2, 0, -1)]
    return loop


def _unwrap_on_loop(values: np.ndarray, loop) -> np.ndarray:
    """Continuous branch of a phase defined on the ordered boundary loop."""
    raw = np.array([values[ij] for ij in loop])
    return np.unwrap(raw)


def dirichlet_data(grid: Grid2D, g_vortices: VortexSet) -> np.ndarray:
    """Boundary map g: the canonical product phase restricted to the boundary."""
    return product_phase(grid, g_vortices)


def canonical_map(grid: Grid2D, v: VortexSet,
                  bc: BoundaryKind | str | None = None,
                  g: np.ndarray | None = None,
                  g_vortices: VortexSet | None = None) -> ComplexField:
    """Unit-modulus field with prescribed vortex singularities.

    Dirichlet: returns e^{i theta} * prod((x-a_n)/|x-a_n|)^{d_n} with theta the
    discrete harmonic function matching the boundary map g (default: the
    product phase of `g_vortices`, default v itself, on the boundary nodes).
    Neumann: theta solves the Laplace problem with normal flux cancelling the
    normal component of the bare product current.
    """
    bc = BoundaryKind(bc) if bc is not None else grid.bc
    if rho(v, grid) <= 4 * grid.h:
        raise ValueError("vortices closer than 4h to each other or the boundary")
    P = product_phase(grid, v)
    if bc is BoundaryKind.DIRICHLET:
        if g is None:
            g = dirichlet_data(grid, g_vortices if g_vortices is not None else v)
        loop = boundary_loop(grid)
        diff = g * np.conj(P)
        beta = _unwrap_on_loop(np.angle(diff), loop)
        theta_bnd = np.zeros((grid.nx, grid.ny))
        for (ij, val) in zip(loop, beta):
            theta_bnd[ij] = val
        theta = solve_laplace_dirichlet(grid, theta_bnd)
    else:
        X, Y = grid.coords()
        flux = {}
        ii, jj = np.nonzero(grid.boundary)
        for i, j in zip(ii.tolist(), jj.tolist()):
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ni, nj = i + di, j + dj
                outside = not (0 <= ni < grid.nx and 0 <= nj < grid.ny) \
                    or not grid.mask[ni, nj]
                if not outside:
                    continue
                fx = X[i, j] + 0.5 * di * grid.h
                fy = Y[i, j] + 0.5 * dj * grid.h
                jx, jy = product_current(v, np.array(fx), np.array(fy))
                flux[(i, j, di, dj)] = -(float(jx) * di + float(jy) * dj)
        theta = solve_laplace_neumann(grid, flux)
    u = np.exp(1j * theta) * P
    u[~grid.mask] = 1.0
    return ComplexField(grid, u)


# ---------------------------------------------------------------------------
# Renormalized energy
# ---------------------------------------------------------------------------

@dataclass
class RenormalizedEnergyModel:
    """How to evaluate W(a, d): domain, boundary condition, and method.

    method 'auto' uses the closed form where one is available (free plane;
    unit disk with a single vortex and rotationally symmetric boundary data)
    and the lattice limit-formula evaluation otherwise.  `g_vortices` fixes
    the Dirichlet boundary map independently of the evaluated positions.
    """

    domain: str = "free-plane"           # free-plane | disk | rectangle
    bc: BoundaryKind = BoundaryKind.DIRICHLET
    method: str = "auto"                 # auto | closed-form | numeric-limit
    n: int = 257                         # lattice size for the numeric path
    g_vortices: VortexSet | None = None

    def resolve_method(self, v: VortexSet) -> str:
        if self.method != "auto":
            return self.method
        if self.domain == "free-plane":
            return "closed-form"
        if self.domain == "disk" and len(v) == 1 and self._symmetric_g():
            return "closed-form"
        return "numeric-limit"

    def _symmetric_g(self) -> bool:
        if self.bc is BoundaryKind.NEUMANN:
            return True
        if self.g_vortices is None:
            return False
        gv = self.g_vortices
        return len(gv) == 1 and np.hypot(*gv.entries[0].a) < 1e-12


def symmetric_disk_model(bc: BoundaryKind | str = BoundaryKind.DIRICHLET,
                         **kwargs) -> RenormalizedEnergyModel:
    """Unit-disk model with rotationally symmetric boundary data.

    The Dirichlet map is pinned to the degree-one phase of a centered
    vortex, for which the single-vortex closed form W = -pi log(1 - |a|^2)
    applies regardless of the evaluated position.
    """
    bc = BoundaryKind(bc)
    gv = VortexSet.from_lists([(0.0, 0.0)], [1])
    return RenormalizedEnergyModel(domain="disk", bc=bc, g_vortices=gv,
                                   **kwargs)


def _pair_term(v: VortexSet) -> float:
    pos = v.positions
    deg = v.degrees
    W = 0.0
    for n in range(len(v)):
        for m in range(len(v)):
            if m == n:
                continue
            r = np.linalg.norm(pos[m] - pos[n])
            if r == 0:
                raise ValueError("coincident vortices")
            W -= np.pi * deg[m] * deg[n] * np.log(r)
    return W


def renormalized_energy(v: VortexSet, model: RenormalizedEnergyModel) -> float:
    method = model.resolve_method(v)
    if method == "closed-form":
        if model.domain == "free-plane":
            return _pair_term(v)
        # unit disk, single vortex, symmetric boundary data
        a2 = float(np.hypot(*v.entries[0].a)) ** 2
        if a2 >= 1.0:
            raise ValueError("vortex outside the unit disk")
        sign = 1.0 if model.bc is BoundaryKind.DIRICHLET else -1.0
        return -sign * np.pi * np.log1p(-a2)
    return _numeric_limit_W(v, model)


def _numeric_limit_W(v: VortexSet, model: RenormalizedEnergyModel) -> float:
    grid = make_grid(model.n, model.n,
                     Domain.DISK if model.domain == "disk" else Domain.RECTANGLE,
                     model.bc)
    mstar = canonical_map(grid, v, model.bc, g_vortices=model.g_vortices)
    ux = deriv(mstar.u, grid, 0)
    uy = deriv(mstar.u, grid, 1)
    e = 0.5 * (np.abs(ux) ** 2 + np.abs(uy) ** 2)
    X, Y = grid.coords()
    h = grid.h
    N = len(v)
    dmin = np.full((grid.nx, grid.ny), np.inf)
    for vx in v:
        dmin = np.minimum(dmin, np.hypot(X - vx.a[0], Y - vx.a[1]))
    levels = [8 * h, 16 * h, 32 * h]
    W_rho = []
    for rr in levels:
        w = np.clip((dmin - rr) / h + 0.5, 0.0, 1.0) * grid.interior
        E = float((e * w).sum() * h * h)
        W_rho.append(E - N * np.pi * np.log(1.0 / rr))
    # leading excluded-ball error is O(rho^2): Richardson on the two finest
    return (4.0 * W_rho[0] - W_rho[1]) / 3.0


def grad_W(v: VortexSet, model: RenormalizedEnergyModel,
           fd_step: float = 1e-3) -> np.ndarray:
    """Gradient dW/da_n, shape (N, 2)."""
    method = model.resolve_method(v)
    if method == "closed-form":
        if model.domain == "free-plane":
            pos = v.positions
            deg = v.degrees
            out = np.zeros_like(pos)
            for n in range(len(v)):
                for m in range(len(v)):
                    if m == n:
                        continue
                    diff = pos[n] - pos[m]
                    out[n] -= 2 * np.pi * deg[n] * deg[m] * diff / (diff @ diff)
            return out
        a = np.asarray(v.entries[0].a, dtype=float)
        a2 = float(a @ a)
        sign = 1.0 if model.bc is BoundaryKind.DIRICHLET else -1.0
        return (sign * 2 * np.pi * a / (1.0 - a2))[None, :]
    return _fd_grad(v, model, fd_step)


def _fd_grad(v: VortexSet, model: RenormalizedEnergyModel, delta: float) -> np.ndarray:
    out = np.zeros((len(v), 2))
    base = [list(vx.a) for vx in v.entries]
    for n in range(len(v)):
        for k in range(2):
            for s, sign in ((+delta, 1.0), (-delta, -1.0)):
                pos = [list(p) for p in base]
                pos[n][k] += s
                vv = VortexSet.from_lists(pos, v.degrees, v.q)
                out[n, k] += sign * renormalized_energy(vv, model)
            out[n, k] /= 2 * delta
    return out


# ---------------------------------------------------------------------------
# Stress-energy tensor and the test-function identity
# ---------------------------------------------------------------------------

def stress_energy(f: ComplexField | DirectorField) -> np.ndarray:
    """Per-node 2x2 tensor sum_c d_i f_c d_j f_c, shape (nx, ny, 2, 2)."""
    grid = f.grid
    if isinstance(f, ComplexField):
        comps = [f.u.real, f.u.imag]
    else:
        comps = [f.m[..., k] for k in range(3)]
    T = np.zeros((grid.nx, grid.ny, 2, 2))
    for c in comps:
        dx = deriv(c, grid, 0)
        dy = deriv(c, grid, 1)
        T[..., 0, 0] += dx * dx
        T[..., 0, 1] += dx * dy
        T[..., 1, 0] += dy * dx
        T[..., 1, 1] += dy * dy
    return T


@dataclass
class FlatTestFunction:
    """One patch (c . x + b) * bump(|x - x0|): affine inside radius r1, zero
    beyond r2.  A test function is a sum of such patches; each vortex ball
    B_{r0}(a_n) must lie either in a patch's flat core or outside its support,
    so the perp-Hessian of the total vanishes near every vortex.
    """

    c: tuple[float, float]
    x0: tuple[float, float] = (0.0, 0.0)
    r1: float = 1.0
    r2: float = 2.0
    b: float = 0.0
    r0: float = 0.1

    def bump(self, r: np.ndarray) -> np.ndarray:
        t = np.clip((r - self.r1) / (self.r2 - self.r1), 0.0, 1.0)
        return 0.5 * (1.0 + np.cos(np.pi * t))

    def __call__(self, X, Y) -> np.ndarray:
        r = np.hypot(X - self.x0[0], Y - self.x0[1])
        lin = self.c[0] * X + self.c[1] * Y + self.b
        return lin * self.bump(r)

    def grad_perp_at(self, p) -> np.ndarray:
        r = np.hypot(p[0] - self.x0[0], p[1] - self.x0[1])
        if r + self.r0 <= self.r1:
            return np.array([-self.c[1], self.c[0]])
        if r - self.r0 >= self.r2:
            return np.array([0.0, 0.0])
        raise ValueError(
            "perp-Hessian of the test function does not vanish on "
            f"B_{self.r0}({tuple(p)})")

    def check_flat(self, v: VortexSet) -> None:
        for vx in v:
            self.grad_perp_at(vx.a)


@dataclass
class CompositeTestFunction:
    """Sum of flat patches; the smooth bump expansion of the test function."""

    patches: list

    @property
    def r0(self) -> float:
        return max(p.r0 for p in self.patches)

    def __call__(self, X, Y) -> np.ndarray:
        out = self.patches[0](X, Y)
        for p in self.patches[1:]:
            out = out + p(X, Y)
        return out

    def grad_perp_at(self, p) -> np.ndarray:
        return sum(patch.grad_perp_at(p) for patch in self.patches)

    def check_flat(self, v: VortexSet) -> None:
        for patch in self.patches:
            patch.check_flat(v)

    def bbox_pad(self):
        xs = [p.x0[0] for p in self.patches]
        ys = [p.x0[1] for p in self.patches]
        r = max(p.r2 for p in self.patches)
        return (min(xs), max(xs), min(ys), max(ys), r * 1.02)


def renorm_identity_residual(phi, v: VortexSet,
                             model: RenormalizedEnergyModel,
                             n_quad: int = 801) -> dict:
    """Residual of the force identity
    pi sum_n perp-grad(phi)(a_n) . dW/da_n = -int perp-Hess(phi) : (dm* x dm*).

    Returns lhs, rhs, residual, and the lhs scale used for normalization.
    """
    if isinstance(phi, FlatTestFunction):
        phi = CompositeTestFunction([phi])
    phi.check_flat(v)
    gw = grad_W(v, model)
    # the pair-sum normalization of W already carries the factor pi, so the
    # force side is the plain sum of perp-gradient projections
    lhs = 0.0
    for n, vx in enumerate(v):
        lhs += float(phi.grad_perp_at(vx.a) @ gw[n])

    if model.domain == "free-plane":
        xmin, xmax, ymin, ymax, pad = phi.bbox_pad()
        x = np.linspace(xmin - pad, xmax + pad, n_quad)
        ny = max(n_quad, int(round((ymax - ymin + 2 * pad) / (x[1] - x[0]))) + 1)
        y = np.linspace(ymin - pad, ymax + pad, ny)
        X, Y = np.meshgrid(x, y, indexing="ij")
        hx, hy = x[1] - x[0], y[1] - y[0]
        jx, jy = product_current(v, X, Y)
        Txx, Txy, Tyy = jx * jx, jx * jy, jy * jy
        phi_v = phi(X, Y)
        mask = np.ones_like(phi_v, dtype=bool)
    else:
        grid = make_grid(model.n, model.n,
                         Domain.DISK if model.domain == "disk" else Domain.RECTANGLE,
                         model.bc)
        hx = hy = grid.h
        X, Y = grid.coords()
        mstar = canonical_map(grid, v, model.bc, g_vortices=model.g_vortices)
        T = stress_energy(mstar)
        Txx, Txy, Tyy = T[..., 0, 0], T[..., 0, 1], T[..., 1, 1]
        phi_v = phi(X, Y)
        mask = grid.interior

    # perp-Hessian entries via finite differences of phi on the quad grid
    def d(a, axis):
        return np.gradient(a, hx if axis == 0 else hy, axis=axis, edge_order=2)

    phix, phiy = d(phi_v, 0), d(phi_v, 1)
    H = {
        ("x", "x"): d(phix, 0), ("x", "y"): d(phix, 1),
        ("y", "x"): d(phiy, 0), ("y", "y"): d(phiy, 1),
    }
    # (perp-Hess)_{1j} = -d_y d_j phi ; (perp-Hess)_{2j} = d_x d_j phi
    integrand = (-H[("y", "x")] * Txx - H[("y", "y")] * Txy
                 + H[("x", "x")] * Txy + H[("x", "y")] * Tyy)
    # the integrand vanishes near the cores by flatness; mask the balls anyway
    excl = np.ones_like(integrand, dtype=bool)
    for vx in v:
        excl &= np.hypot(X - vx.a[0], Y - vx.a[1]) > phi.r0
    rhs = -float((integrand * excl * mask).sum() * hx * hy)
    scale = max(abs(lhs), np.pi * float(np.abs(gw).max()), 1e-12)
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs), "scale": scale}
