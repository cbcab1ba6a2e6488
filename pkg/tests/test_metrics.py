import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearteleop.errors import EmptyTrajectory, NoPairs, ValidationError
from wearteleop.metrics import Trajectory, evaluate, mae, pair_trajectories, read_trajectory, rmse, table_report, write_trajectory


def traj(t, pos=None):
    t = np.asarray(t)
    return Trajectory(t, np.zeros((len(t), 3)) if pos is None else pos)


def test_identical_grids_all_paired():
    t = np.arange(0, 100000, 20000)
    p = pair_trajectories(traj(t), traj(t), 2000)
    assert len(p) == len(t) and p.unpaired == 0


def test_offset_beyond_tolerance_pairs_nothing():
    t = np.arange(0, 100000, 20000)
    p = pair_trajectories(traj(t), traj(t + 2001), 2000)
    assert len(p) == 0 and p.unpaired == len(t)
    with pytest.raises(NoPairs):
        rmse(p, "X")
    with pytest.raises(NoPairs):
        mae(p, "X")


def test_50hz_against_1000hz_all_paired():
    p = pair_trajectories(traj(np.arange(0, 10**6, 20000)), traj(np.arange(0, 10**6 + 1, 1000) + 300), 500)
    assert p.unpaired == 0 and len(p) == 50


def test_empty_trajectory():
    with pytest.raises(EmptyTrajectory):
        pair_trajectories(traj([]), traj([0]))


def test_strictly_increasing_timestamps():
    with pytest.raises(ValidationError):
        traj([0, 0])


def test_rmse_mae_examples():
    t = [0, 1]
    a = traj(t, np.zeros((2, 3)))
    b = traj(t, np.array([[0.01, 0, 0], [-0.03, 0, 0]]))
    p = pair_trajectories(a, b)
    assert rmse(p, "X") == pytest.approx(0.02236, abs=1e-5)
    assert mae(p, "X") == pytest.approx(0.02, abs=1e-15)
    assert rmse(p, "Y") == 0.0
    c = traj(t, np.array([[0, 0, 0.5], [0, 0, 0.5]]))
    assert rmse(pair_trajectories(a, c), 2) == pytest.approx(0.5)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_metric_properties(seed, shift):
    r = np.random.default_rng(seed)
    t = np.arange(40) * 20000
    a = Trajectory(t, r.normal(size=(40, 3)))
    b = Trajectory(t + r.integers(-500, 500, size=40), r.normal(size=(40, 3)))
    ab = evaluate(a, b)
    ba = evaluate(b, a)
    moved = evaluate(a.translated(shift), b.translated(shift))
    for ax in "XYZ":
        assert ab.rmse[ax] >= ab.mae[ax] >= 0
        assert ab.rmse[ax] == pytest.approx(ba.rmse[ax], rel=1e-12)
        assert moved.rmse[ax] == pytest.approx(ab.rmse[ax], rel=1e-9)
        assert moved.mae[ax] == pytest.approx(ab.mae[ax], rel=1e-9)


def test_skip_and_report_layout():
    t = np.arange(10) * 1000
    a = Trajectory(t, np.zeros((10, 3)))
    b = Trajectory(t, np.vstack([np.ones((5, 3)), np.zeros((5, 3))]))
    assert evaluate(a, b, skip_us=5000).rmse["X"] == 0.0
    table = table_report({"square": evaluate(a, b)})
    assert set(table) == {"square"} and set(table["square"]) == {"X", "Y", "Z"}
    assert set(table["square"]["X"]) == {"rmse", "mae"}


@pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
@pytest.mark.parametrize("with_q", [False, True])
def test_file_round_trip(tmp_path, rng, suffix, with_q):
    t = np.arange(20) * 20000
    q = rng.normal(size=(20, 4)) if with_q else None
    tr = Trajectory(t, rng.normal(size=(20, 3)), q)
    write_trajectory(tmp_path / f"t{suffix}", tr)
    back = read_trajectory(tmp_path / f"t{suffix}")
    np.testing.assert_array_equal(back.t_us, tr.t_us)
    np.testing.assert_array_equal(back.pos, tr.pos)
    if with_q:
        np.testing.assert_array_equal(back.quat, q)
    else:
        assert back.quat is None


def test_read_rejects_bad_rows(tmp_path):
    (tmp_path / "b.csv").write_text("t_us,x,y\n0,1,2\n")
    with pytest.raises(ValidationError):
        read_trajectory(tmp_path / "b.csv")
    (tmp_path / "e.csv").write_text("t_us,x,y,z\n")
    with pytest.raises(EmptyTrajectory):
        read_trajectory(tmp_path / "e.csv")
