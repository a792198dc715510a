import numpy as np
import pytest

from vortexlab import (OdeState, QJump, energy_decay_check, ode_integrate,
                       ode_rhs, symmetric_disk_model)
from vortexlab.renorm import RenormalizedEnergyModel


def free_plane():
    return RenormalizedEnergyModel(domain="free-plane")


def dipole(r, alpha0=0.0, kind="gl"):
    return OdeState(a=[(r / 2, 0.0), (-r / 2, 0.0)], d=[1, -1],
                    q=[0.5, -0.5], alpha0=alpha0, model=free_plane(),
                    kind=kind)


def test_dipole_translation_speed():
    r = 0.8
    v = ode_rhs(dipole(r))
    # undamped +/- pair translates at speed 1/r perpendicular to the axis
    speed = np.linalg.norm(v[0])
    assert speed == pytest.approx(1.0 / r, rel=1e-6)
    assert np.allclose(v[0], v[1], atol=1e-12)
    assert abs(v[0][0]) < 1e-12


def test_llg_gl_rhs_coincide_when_charges_match():
    # gyro coefficients: llg 4 pi q, gl 2 pi d -> equal when q = d/2
    common = dict(a=[(0.3, 0.2), (-0.4, 0.1)], d=[1, -1], alpha0=0.7,
                  model=free_plane())
    gl = OdeState(q=[0.5, -0.5], kind="gl", **common)
    llg = OdeState(q=[0.5, -0.5], kind="llg", **common)
    assert np.array_equal(ode_rhs(gl), ode_rhs(llg))


def test_gyro_sign_flip_reverses_rotation():
    model = symmetric_disk_model()
    base = dict(a=[(0.3, 0.0)], d=[1], alpha0=0.0, model=model, kind="llg")
    vp = ode_rhs(OdeState(q=[0.5], **base))
    vm = ode_rhs(OdeState(q=[-0.5], **base))
    assert np.allclose(vp, -vm, atol=1e-14)
    # azimuthal motion only when undamped
    assert abs(vp[0][0]) < 1e-12 and abs(vp[0][1]) > 0


def test_centered_symmetric_vortex_is_stationary():
    s = OdeState(a=[(0.0, 0.0)], d=[1], q=[0.5], alpha0=1.0,
                 model=symmetric_disk_model(), kind="llg")
    assert np.abs(ode_rhs(s)).max() < 1e-12


def test_undamped_conserves_w():
    s = OdeState(a=[(0.5, 0.0), (-0.5, 0.0)], d=[1, 1], q=[0.5, 0.5],
                 alpha0=0.0, model=free_plane(), kind="gl")
    traj = ode_integrate(s, 1.0, tol=1e-11)
    w = np.asarray(traj.series["w_value"])
    assert np.abs(w - w[0]).max() <= 1e-8 * max(1.0, abs(w[0]))


def test_damped_energy_decay_identity():
    s = OdeState(a=[(0.35, 0.1)], d=[1], q=[0.5], alpha0=1.0,
                 model=symmetric_disk_model(), kind="gl")
    traj = ode_integrate(s, 0.3, tol=1e-11)
    assert energy_decay_check(traj) <= 1e-5


def test_collision_stops_with_status():
    s = OdeState(a=[(0.05, 0.0), (-0.05, 0.0)], d=[1, -1], q=[0.5, -0.5],
                 alpha0=1.0, model=free_plane(), kind="gl", r_min=0.02)
    traj = ode_integrate(s, 10.0, tol=1e-9)
    assert traj.status == "collision"
    assert traj.times[-1] < 10.0


def test_q_jump_changes_velocity_not_position():
    model = symmetric_disk_model()
    s = OdeState(a=[(0.35, 0.0)], d=[1], q=[1.5], alpha0=1.0,
                 model=model, kind="llg")
    t_jump = 0.05
    traj = ode_integrate(s, 0.1, tol=1e-10,
                         q_jumps=[QJump(time=t_jump, vortex_index=0, new_q=0.5)])
    tracks = traj.tracks()
    times = np.asarray(traj.times)
    # position is continuous across the jump
    k = np.searchsorted(times, t_jump)
    gap = np.linalg.norm(tracks[k] - tracks[k - 1])
    assert gap < 0.05
    # final q reflects the jump
    assert traj.vortices[-1][0].q_hat == pytest.approx(0.5)


def test_tolerance_refinement_converges():
    s = OdeState(a=[(0.35, 0.0)], d=[1], q=[0.5], alpha0=1.0,
                 model=symmetric_disk_model(), kind="gl")
    ends = []
    for tol in (1e-5, 1e-7, 1e-9):
        traj = ode_integrate(s, 0.3, tol=tol)
        ends.append(traj.tracks()[-1, 0])
    e1 = np.linalg.norm(ends[0] - ends[2])
    e2 = np.linalg.norm(ends[1] - ends[2])
    assert e2 < e1
