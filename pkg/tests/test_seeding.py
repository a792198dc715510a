import numpy as np
import pytest

from vortexlab import (VortexSet, inject_phase_perturbation, locate_vortices,
                       make_grid, seed_gl_field, seed_vortex_field,
                       total_energy, vorticity, planar_jacobian, ball_mass,
                       winding_number)


@pytest.fixture(scope="module")
def disk257():
    return make_grid(257, 257, "disk", "dirichlet")


def test_quantization_polarity_plus(disk257):
    eps = 0.02
    v = VortexSet.from_lists([(0.0, 0.0)], [1])
    m = seed_vortex_field(disk257, v, eps, polarity=[1])
    assert ball_mass(planar_jacobian(m), (0, 0), 0.3) == pytest.approx(np.pi, rel=0.01)
    assert ball_mass(vorticity(m), (0, 0), 0.3) == pytest.approx(2 * np.pi, rel=0.02)
    assert winding_number(m, (0, 0), 0.3) == 1


def test_quantization_polarity_minus(disk257):
    eps = 0.02
    v = VortexSet.from_lists([(0.0, 0.0)], [1], [-0.5])
    m = seed_vortex_field(disk257, v, eps, polarity=[-1])
    assert ball_mass(vorticity(m), (0, 0), 0.3) == pytest.approx(-2 * np.pi, rel=0.02)
    assert winding_number(m, (0, 0), 0.3) == 1


def test_seed_unit_norm(disk257):
    v = VortexSet.from_lists([(0.3, 0.0)], [1])
    m = seed_vortex_field(disk257, v, 0.02, polarity=[1])
    norms = np.linalg.norm(m.m[disk257.mask], axis=-1)
    assert np.abs(norms - 1.0).max() <= 1e-12


def test_unresolvable_seed_errors(disk257):
    v = VortexSet.from_lists([(0.05, 0.0), (-0.05, 0.0)], [1, -1])
    with pytest.raises(ValueError):
        seed_vortex_field(disk257, v, 0.05, polarity=[1, 1])


def test_gl_winding_and_pair(disk257):
    eps = 0.02
    u1 = seed_gl_field(disk257, VortexSet.from_lists([(0.0, 0.0)], [1]), eps)
    assert winding_number(u1, (0, 0), 0.3) == 1
    v2 = VortexSet.from_lists([(0.4, 0.0), (-0.4, 0.0)], [1, -1])
    u2 = seed_gl_field(disk257, v2, eps)
    J = planar_jacobian(u2)
    total = (J.values[disk257.mask]).sum() * disk257.h ** 2
    assert abs(total) <= 0.02 * np.pi
    assert ball_mass(J, (0.4, 0.0), 0.2) == pytest.approx(np.pi, rel=0.01)
    assert ball_mass(J, (-0.4, 0.0), 0.2) == pytest.approx(-np.pi, rel=0.01)


def test_excess_perturbation_preserves_masses(disk257):
    eps = 0.02
    v = VortexSet.from_lists([(0.0, 0.0)], [1])
    u = seed_gl_field(disk257, v, eps)
    e0 = total_energy(u, eps)
    m0 = ball_mass(planar_jacobian(u), (0, 0), 0.3)
    inject_phase_perturbation(u, 1.0, eps=eps, wavenumber=5)
    e1 = total_energy(u, eps)
    m1 = ball_mass(planar_jacobian(u), (0, 0), 0.3)
    assert e1 - e0 == pytest.approx(1.0, rel=0.1)
    assert m1 == pytest.approx(m0, rel=0.02)


def test_locate_recovers_seeds(disk257):
    eps = 0.02
    v = VortexSet.from_lists([(0.3, 0.0)], [1])
    m = seed_vortex_field(disk257, v, eps, polarity=[1])
    r = locate_vortices(m, eps=eps)
    assert len(r) == 1
    assert np.hypot(r[0].position[0] - 0.3, r[0].position[1]) <= 2 * disk257.h
    assert r[0].degree == 1

    v2 = VortexSet.from_lists([(0.4, 0.0), (-0.4, 0.0)], [1, -1])
    u = seed_gl_field(disk257, v2, eps)
    rr = sorted(locate_vortices(u, eps=eps), key=lambda x: x.position[0])
    assert [x.degree for x in rr] == [-1, 1]


def test_locate_empty_on_vortex_free(disk257):
    X, Y = disk257.coords()
    from vortexlab import ComplexField
    u = ComplexField(disk257, np.exp(1j * (X + Y)))
    assert locate_vortices(u, eps=0.02) == []
