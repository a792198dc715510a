import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortexlab import (DirectorField, ComplexField, VortexSet, make_grid,
                       project_unit, winding_number, renormalized_energy,
                       grad_W)
from vortexlab.diagnostics import planar_jacobian
from vortexlab.renorm import RenormalizedEnergyModel


GRID = make_grid(65, 65, "rectangle", "neumann")
DISK = make_grid(65, 65, "disk", "dirichlet")


@st.composite
def unit_directors(draw):
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 31)))
    m = rng.standard_normal((GRID.nx, GRID.ny, 3))
    m += np.array([2.0, 0.0, 0.0])        # bias away from the origin
    return DirectorField(GRID, m.copy())


@given(unit_directors())
@settings(max_examples=20, deadline=None)
def test_project_unit_idempotent_and_unit(f):
    p = project_unit(f)
    norms = np.linalg.norm(p.m, axis=-1)
    assert np.abs(norms[GRID.mask] - 1.0).max() < 1e-12
    q = project_unit(DirectorField(GRID, p.m.copy()))
    assert np.abs(q.m - p.m).max() < 1e-14


@given(st.integers(-3, 3), st.floats(0.05, 0.45))
@settings(max_examples=20, deadline=None)
def test_winding_number_integer_and_additive(k, r):
    X, Y = DISK.coords()
    phase = k * np.arctan2(Y, X)
    u = ComplexField(DISK, np.exp(1j * phase))
    assert winding_number(u, (0.0, 0.0), r) == k


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.3, 1.5))
@settings(max_examples=25, deadline=None)
def test_free_plane_w_translation_invariant(cx, cy, sep):
    model = RenormalizedEnergyModel(domain="free-plane")
    v0 = VortexSet.from_lists([(sep / 2, 0.0), (-sep / 2, 0.0)], [1, -1])
    v1 = VortexSet.from_lists([(sep / 2 + cx, cy), (-sep / 2 + cx, cy)],
                              [1, -1])
    w0 = renormalized_energy(v0, model)
    w1 = renormalized_energy(v1, model)
    assert w1 == pytest.approx(w0, rel=1e-12, abs=1e-12)


@given(st.floats(0.3, 1.5))
@settings(max_examples=15, deadline=None)
def test_free_plane_forces_antisymmetric(sep):
    model = RenormalizedEnergyModel(domain="free-plane")
    v = VortexSet.from_lists([(sep / 2, 0.0), (-sep / 2, 0.0)], [1, 1])
    g = grad_W(v, model)
    # equal-degree pair: forces are opposite by symmetry
    assert np.allclose(g[0], -g[1], atol=1e-10)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=15, deadline=None)
def test_smooth_phase_jacobian_telescopes(seed):
    rng = np.random.default_rng(seed)
    X, Y = GRID.coords()
    phase = sum(rng.normal(scale=0.5) * f
                for f in (np.sin(2 * X), np.cos(Y), X * Y, np.sin(X + Y)))
    u = ComplexField(GRID, np.exp(1j * phase))
    J = planar_jacobian(u)
    assert abs(J.values.sum() * GRID.h ** 2) < 1e-9


@given(st.lists(st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)),
                min_size=1, max_size=3, unique=True))
@settings(max_examples=15, deadline=None)
def test_trajectory_roundtrip_property(tmp_path_factory, positions):
    from vortexlab import Trajectory, save_trajectory, load_trajectory
    from vortexlab.diagnostics import VortexReading
    t = Trajectory(kind="gl")
    for k in range(3):
        t.append(0.1 * k,
                 [VortexReading(position=(x + 0.001 * k, y), degree=1,
                                jacobian_mass=np.pi, vorticity_mass=0.0,
                                q_hat=0.5, window_radius=0.1)
                  for x, y in positions],
                 {"total_energy": float(k)})
    d = tmp_path_factory.mktemp("traj")
    save_trajectory(t, d / "t.csv")
    t2 = load_trajectory(d / "t.csv")
    assert np.allclose(t2.tracks(), t.tracks(), equal_nan=True)
