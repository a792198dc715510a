import numpy as np
import pytest

from vortexlab import (ComplexField, GLConfig, VortexSet,
                       conservation_residuals, gl_run, make_grid,
                       seed_gl_field, symmetric_disk_model)
from vortexlab.glmixed import gl_rhs


def test_rhs_zero_field_zero():
    g = make_grid(33, 33, "rectangle", "neumann")
    u = ComplexField(g, np.zeros((g.nx, g.ny), complex))
    out = gl_rhs(u, eps=0.1, alpha_eps=0.5)
    assert np.abs(out).max() == 0.0


def test_rhs_undamped_real_front_rotates():
    # alpha = 0: (i) du/dt = ... so du/dt is -i * (real operator) of a real
    # field, i.e. purely imaginary
    g = make_grid(65, 65, "rectangle", "neumann")
    X, Y = g.coords()
    u = ComplexField(g, np.tanh(X - 0.5).astype(complex))
    out = gl_rhs(u, eps=0.1, alpha_eps=0.0)
    assert np.abs(out.real).max() < 1e-14


def test_conservation_residuals_equilibrium():
    g = make_grid(65, 65, "rectangle", "neumann")
    u = ComplexField(g, np.ones((g.nx, g.ny), complex))
    r = conservation_residuals(u, u, dt=1e-3, eps=0.1, alpha_eps=0.5)
    assert max(r) <= 1e-12


@pytest.fixture(scope="module")
def pair_run():
    eps = 0.08
    g = make_grid(97, 97, "disk", "dirichlet")
    v = VortexSet.from_lists([(0.3, 0.0)], [1])
    u = seed_gl_field(g, v, eps,
                      g_vortices=VortexSet.from_lists([(0.0, 0.0)], [1]))
    cfg = GLConfig(eps=eps, alpha0=1.0, t_end=0.05, bc="dirichlet",
                   scheme="imex", snapshot_stride=4,
                   record_conservation=True,
                   renorm_model=symmetric_disk_model())
    return gl_run(cfg, u)


def test_gl_energy_decreases(pair_run):
    E = np.asarray(pair_run.series["variational_energy"])
    assert np.all(np.diff(E) <= 1e-9 * abs(E[0]))


def test_gl_modulus_bounded(pair_run):
    # the ADI splitting is not maximum-principle exact; allow a small
    # overshoot of the continuum bound |u| <= 1
    assert np.asarray(pair_run.series["modulus_max"]).max() <= 1.0 + 5e-3


def test_gl_vortex_moves_inward(pair_run):
    tr = pair_run.tracks()
    r0 = np.linalg.norm(tr[0, 0])
    r1 = np.linalg.norm(tr[-1, 0])
    assert r1 < r0


def test_gl_conservation_residuals_refine():
    # at fixed eps the residuals are dominated by spatial discretization
    # error, so each must shrink under h -> h/2
    eps, alpha = 0.1, 0.5
    gv = VortexSet.from_lists([(0.0, 0.0)], [1])
    v = VortexSet.from_lists([(0.1, 0.0)], [1])
    res = []
    for n in (97, 193):
        g = make_grid(n, n, "disk", "dirichlet")
        u = seed_gl_field(g, v, eps, g_vortices=gv)
        dt = 1e-6
        un = ComplexField(g, u.u + dt * gl_rhs(u, eps, alpha))
        res.append(conservation_residuals(u, un, dt, eps, alpha))
    for coarse, fine in zip(*res):
        assert fine < 0.8 * coarse


def test_imex_matches_rk4_endpoint():
    eps = 0.08
    g = make_grid(97, 97, "disk", "dirichlet")
    v = VortexSet.from_lists([(0.3, 0.0)], [1])
    gv = VortexSet.from_lists([(0.0, 0.0)], [1])
    ends = []
    for scheme in ("imex", "rk4"):
        u = seed_gl_field(g, v, eps, g_vortices=gv)
        cfg = GLConfig(eps=eps, alpha0=1.0, t_end=0.05, bc="dirichlet",
                       scheme=scheme, snapshot_stride=50,
                       renorm_model=symmetric_disk_model())
        ends.append(gl_run(cfg, u).tracks()[-1, 0])
    assert np.linalg.norm(ends[0] - ends[1]) < 2.0 / 96
