"""Construction of vortex initial data with prescribed degree and polarity."""

from __future__ import annotations

import numpy as np

from .fields import ComplexField, DirectorField, VortexSet, Vortex, rho
from .grid import BoundaryKind, Grid2D
from .profiles import C_CORE, cap_m3, gl_cap_modulus, minimizing_profile
from .renorm import canonical_map, dirichlet_data


def _check_resolved(grid: Grid2D, v: VortexSet, eps: float,
                    core_radius: float | None = None) -> None:
    """Reject configurations whose cores overlap or touch the boundary.

    `core_radius` defaults to the polar-cap extent 2 C_CORE eps; the
    complex-order-parameter cores are exponentially localized at scale eps
    and pass a looser margin (4 eps).
    """
    if eps > 0.5:
        raise ValueError(f"eps must be <= 1/2, got {eps}")
    if core_radius is None:
        core_radius = 2 * eps * C_CORE
    if rho(v, grid) <= 2 * core_radius:
        raise ValueError("vortices unresolvable at this eps: cores overlap "
                         "or touch the boundary")


def _interp_profile(kind: str, eps: float, r: np.ndarray) -> np.ndarray:
    rr, prof = minimizing_profile(kind, eps)
    return np.interp(np.clip(r, 0.0, 1.0), rr, prof)


def seed_vortex_field(grid: Grid2D, v: VortexSet, eps: float,
                      polarity: list[int] | np.ndarray,
                      profile: str = "cap",
                      g_vortices: VortexSet | None = None) -> DirectorField:
    """S^2 vortex data: polar cap of the requested polarity at each core,
    planar canonical-map phase in the far field.

    profile 'cap' uses the cosine-blend ramp that ends exactly at 2*C_CORE*eps;
    'minimizer' interpolates the 1D radial core minimizer (single vortex,
    best used centered in the disk).
    """
    _check_resolved(grid, v, eps)
    polarity = np.asarray(polarity, dtype=int)
    if polarity.shape != (len(v),) or not np.all(np.abs(polarity) == 1):
        raise ValueError("polarity must give +-1 per vortex")
    X, Y = grid.coords()
    m3 = np.zeros((grid.nx, grid.ny))
    for p, vx in zip(polarity, v):
        r = np.hypot(X - vx.a[0], Y - vx.a[1])
        if profile == "minimizer":
            theta = _interp_profile("llg", eps, r)
            m3 += p * np.cos(theta)
        else:
            m3 += p * cap_m3(r, eps)
    phase = canonical_map(grid, v, grid.bc, g_vortices=g_vortices)
    amp = np.sqrt(np.clip(1.0 - m3 * m3, 0.0, None))
    planar = amp * phase.u
    m = np.stack([planar.real, planar.imag, m3], axis=-1)
    m[~grid.mask] = (1.0, 0.0, 0.0)
    f = DirectorField(grid, m)
    if grid.bc is BoundaryKind.DIRICHLET:
        g = dirichlet_data(grid, g_vortices if g_vortices is not None else v)
        bnd = grid.boundary
        f.m[bnd, 0] = g[bnd].real
        f.m[bnd, 1] = g[bnd].imag
        f.m[bnd, 2] = 0.0
    return f


def seed_gl_field(grid: Grid2D, v: VortexSet, eps: float,
                  profile: str = "cap",
                  g_vortices: VortexSet | None = None) -> ComplexField:
    """Complex vortex data: radial core modulus times the canonical map."""
    _check_resolved(grid, v, eps, core_radius=4 * eps)
    X, Y = grid.coords()
    modulus = np.ones((grid.nx, grid.ny))
    for vx in v:
        r = np.hypot(X - vx.a[0], Y - vx.a[1])
        if profile == "minimizer":
            modulus *= _interp_profile("gl", eps, r)
        else:
            modulus *= gl_cap_modulus(r, eps)
    phase = canonical_map(grid, v, grid.bc, g_vortices=g_vortices)
    u = modulus * phase.u
    u[~grid.mask] = 1.0
    f = ComplexField(grid, u)
    if grid.bc is BoundaryKind.DIRICHLET:
        g = dirichlet_data(grid, g_vortices if g_vortices is not None else v)
        f.u[grid.boundary] = g[grid.boundary]
    return f


def seed_bubble_field(grid: Grid2D, v: VortexSet, eps: float,
                      bubble_radius: float | None = None,
                      g_vortices: VortexSet | None = None) -> DirectorField:
    """Single vortex carrying an embedded unit bubble (q = d/2 + 1).

    Inside r1 = bubble_radius/2 the planar phase winds twice while the polar
    angle sweeps 0 -> pi (vorticity 8 pi); between r1 and the bubble radius it
    winds once while the angle returns pi -> pi/2 (vorticity -2 pi).  Total
    ball vorticity 6 pi = 2 pi d + 4 pi, a known bubbling trigger: the inner
    sphere cover is unstable and collapses under the damped flow.
    """
    if len(v) != 1:
        raise ValueError("bubble seed supports a single vortex")
    vx = v.entries[0]
    if vx.d != 1:
        raise ValueError("bubble seed requires degree +1")
    if bubble_radius is None:
        # 6 eps (not tighter) so the double-winding inner sweep stays
        # resolved and the seeded ball vorticity lands near 6 pi on grids
        # with h ~ eps/4.
        bubble_radius = 6 * eps
    r1 = bubble_radius / 2
    if rho(v, grid) <= 2 * bubble_radius:
        raise ValueError("bubble unresolvable: too close to the boundary")

    X, Y = grid.coords()
    dx, dy = X - vx.a[0], Y - vx.a[1]
    r = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)

    # polar angle: 0 -> pi on [0, r1], pi -> pi/2 on [r1, rb], cosine blends
    t_in = np.clip(r / r1, 0.0, 1.0)
    theta_in = np.pi * 0.5 * (1.0 - np.cos(np.pi * t_in))
    t_out = np.clip((r - r1) / (bubble_radius - r1), 0.0, 1.0)
    theta_out = np.pi - (np.pi / 2) * 0.5 * (1.0 - np.cos(np.pi * t_out))
    theta = np.where(r <= r1, theta_in, theta_out)
    m3 = np.cos(theta)

    phase_far = canonical_map(grid, v, grid.bc, g_vortices=g_vortices)
    inner = r < r1
    psi = np.where(inner, 2.0 * phi, np.angle(phase_far.u))
    amp = np.sqrt(np.clip(1.0 - m3 * m3, 0.0, None))
    planar = amp * np.exp(1j * psi)
    m = np.stack([planar.real, planar.imag, m3], axis=-1)
    m[~grid.mask] = (1.0, 0.0, 0.0)
    f = DirectorField(grid, m)
    if grid.bc is BoundaryKind.DIRICHLET:
        g = dirichlet_data(grid, g_vortices if g_vortices is not None else v)
        bnd = grid.boundary
        f.m[bnd, 0] = g[bnd].real
        f.m[bnd, 1] = g[bnd].imag
        f.m[bnd, 2] = 0.0
    return f


def inject_phase_perturbation(f: ComplexField | DirectorField, target_energy: float,
                              eps: float, wavenumber: int = 3,
                              tol: float = 0.02) -> float:
    """Multiply the planar phase by exp(i A chi) with chi a fixed-wavenumber
    smooth modulation, A set by bisection so the energy surplus hits
    `target_energy`.  Returns the amplitude used.  Vortex-free, so Jacobian
    masses are unchanged.
    """
    from .diagnostics import total_energy

    grid = f.grid
    X, Y = grid.coords()
    Lx = grid.h * (grid.nx - 1)
    x0, y0 = grid.origin
    chi = (np.sin(wavenumber * np.pi * (X - x0) / Lx)
           * np.sin(wavenumber * np.pi * (Y - y0) / Lx))
    if grid.bc is BoundaryKind.DIRICHLET:
        chi = chi * (~grid.boundary)
    E0 = total_energy(f, eps)

    def surplus(A: float) -> float:
        g = f.copy()
        _apply_phase(g, A * chi)
        return total_energy(g, eps) - E0

    lo, hi = 0.0, 0.1
    while surplus(hi) < target_energy:
        hi *= 2
        if hi > 1e3:
            raise RuntimeError("perturbation amplitude diverged")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        s = surplus(mid)
        if abs(s - target_energy) <= tol * target_energy:
            lo = hi = mid
            break
        if s < target_energy:
            lo = mid
        else:
            hi = mid
    A = 0.5 * (lo + hi)
    _apply_phase(f, A * chi)
    return A


def _apply_phase(f: ComplexField | DirectorField, angle: np.ndarray) -> None:
    rot = np.exp(1j * angle)
    if isinstance(f, ComplexField):
        f.u *= rot
    else:
        planar = (f.m[..., 0] + 1j * f.m[..., 1]) * rot
        f.m[..., 0] = planar.real
        f.m[..., 1] = planar.imag
