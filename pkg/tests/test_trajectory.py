import numpy as np
import pytest

from vortexlab import (BubblingEvent, Trajectory, load_trajectory,
                       save_trajectory)
from vortexlab.diagnostics import VortexReading
from vortexlab.harness import compare_tracks


def reading(x, y, d=1, q=0.5):
    return VortexReading(position=(x, y), degree=d, jacobian_mass=np.pi * d,
                         vorticity_mass=4 * np.pi * q, q_hat=q,
                         window_radius=0.1)


def make_traj(kind="gl", n=5):
    t = Trajectory(kind=kind)
    for k in range(n):
        tt = 0.1 * k
        t.append(tt, [reading(0.3 + 0.01 * k, 0.01 * k)],
                 {"total_energy": 1.0 - 0.1 * k})
    return t


def test_append_requires_increasing_time():
    t = make_traj()
    with pytest.raises(ValueError):
        t.append(0.1, [reading(0, 0)])


def test_roundtrip(tmp_path):
    t = make_traj()
    t.events.append(BubblingEvent(t_lo=0.1, t_hi=0.2, vortex_index=0,
                                  delta_omega=-4 * np.pi, quanta=-1,
                                  delta_energy=-7.0))
    t.meta["eps"] = 0.05
    save_trajectory(t, tmp_path / "t.csv")
    t2 = load_trajectory(tmp_path / "t.csv")
    assert t2.kind == t.kind
    assert np.allclose(t2.times, t.times)
    assert np.allclose(t2.tracks(), t.tracks())
    assert np.allclose(t2.series["total_energy"], t.series["total_energy"])
    assert len(t2.events) == 1 and t2.events[0].quanta == -1
    assert t2.meta["eps"] == 0.05


def test_load_missing_time_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="time"):
        load_trajectory(p)


def test_tracks_identity_matching():
    t = Trajectory(kind="gl")
    # two vortices that swap list order between snapshots
    t.append(0.0, [reading(0.5, 0.0), reading(-0.5, 0.0, d=-1, q=-0.5)])
    t.append(0.1, [reading(-0.5, 0.01, d=-1, q=-0.5), reading(0.5, 0.01)])
    tr = t.tracks()
    assert tr.shape == (2, 2, 2)
    assert tr[1, 0, 0] == pytest.approx(0.5)
    assert tr[1, 1, 0] == pytest.approx(-0.5)


def test_lost_vortex_padded_nan():
    t = Trajectory(kind="llg")
    t.append(0.0, [reading(0.3, 0.0), reading(-0.3, 0.0, d=-1, q=-0.5)])
    t.append(0.1, [reading(0.31, 0.0)])
    tr = t.tracks()
    assert np.isnan(tr[1, 1]).all()
    assert not np.isnan(tr[1, 0]).any()


def test_compare_identical_tracks_zero():
    t = make_traj()
    out = compare_tracks(t, t)
    assert out["sup_distance"] == 0.0
    assert out["l2_distance"] == 0.0
    assert not out["identity_swap"]
