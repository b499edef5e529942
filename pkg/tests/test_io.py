import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combalance.errors import (
    DataFileError,
    MalformedRow,
    ManifestError,
    NonMonotonicTime,
    UnknownJointName,
)
from combalance.io import (
    BoardSeries,
    Curves,
    dump_json,
    read_board,
    read_manifest,
    read_results,
    read_skeleton,
    read_trajectory,
    write_board,
    write_results,
    write_skeleton,
    write_trajectory,
)
from combalance.signal import ErrorStats, Trajectory2D
from combalance.skeleton import SkeletonFrame, SkeletonSeries

from .conftest import random_frame, simulate

SKELETON_HEAD = "t,joint,state,px,py,pz\n"


def test_skeleton_header_only(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(SKELETON_HEAD)
    assert len(read_skeleton(path)) == 0


def test_skeleton_missing_header(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("")
    with pytest.raises(MalformedRow):
        read_skeleton(path)


def test_skeleton_round_trip(tmp_path, rng):
    frames = [random_frame(rng, 0.0), random_frame(rng, 1 / 30)]
    path = tmp_path / "s.csv"
    write_skeleton(SkeletonSeries(frames), path)
    back = read_skeleton(path)
    assert len(back) == 2
    for a, b in zip(frames, back):
        assert a.timestamp == b.timestamp
        for name, joint in a.joints.items():
            assert np.array_equal(joint.position, b.joints[name].position)
            assert joint.tracking_state == b.joints[name].tracking_state


def test_skeleton_not_tracked_empty_position(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(SKELETON_HEAD + "0.0,head,not_tracked,,,\n0.0,neck,tracked,1,2,3\n")
    frame = read_skeleton(path)[0]
    assert not frame.joints["head"].usable and frame.joints["neck"].usable
    path.write_text(SKELETON_HEAD + "0.0,head,tracked,,,\n")
    with pytest.raises(MalformedRow):
        read_skeleton(path)


def test_skeleton_time_goes_back(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(SKELETON_HEAD + "0.1,head,tracked,0,0,0\n0.2,head,tracked,0,0,0\n0.15,neck,tracked,0,0,0\n")
    with pytest.raises(NonMonotonicTime) as exc:
        read_skeleton(path)
    assert exc.value.line == 4
    assert f"{path}:4" in str(exc.value)


@pytest.mark.parametrize("row,err", [
    ("0.0,tail,tracked,0,0,0", UnknownJointName),
    ("0.0,head,guessed,0,0,0", MalformedRow),
    ("0.0,head,tracked,0,0", MalformedRow),
    ("0.0,head,tracked,0,x,0", MalformedRow),
    ("0.0,head,tracked,0,nan,0", MalformedRow),
])
def test_skeleton_bad_rows(tmp_path, row, err):
    path = tmp_path / "s.csv"
    path.write_text(SKELETON_HEAD + row + "\n")
    with pytest.raises(err) as exc:
        read_skeleton(path)
    assert exc.value.line == 2


def test_skeleton_duplicate_joint(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(SKELETON_HEAD + "0.0,head,tracked,0,0,0\n0.0,head,tracked,1,0,0\n")
    with pytest.raises(MalformedRow):
        read_skeleton(path)


def test_board_round_trip(tmp_path, rng):
    n = 1000
    t = np.cumsum(rng.uniform(0.001, 0.02, n))
    loads = rng.uniform(0, 50, (4, n))
    path = tmp_path / "b.csv"
    write_board(BoardSeries(t, *loads), path)
    back = read_board(path)
    assert len(back) == n
    assert np.array_equal(back.t, t)
    for a, b in zip((back.tl, back.tr, back.bl, back.br), loads):
        assert np.array_equal(a, b)


def test_board_negative_load(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("t,tl,tr,bl,br\n0,1,1,1,1\n0.1,1,-0.5,1,1\n")
    with pytest.raises(MalformedRow) as exc:
        read_board(path)
    assert exc.value.line == 3


def test_board_repeated_timestamp(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("t,tl,tr,bl,br\n0,1,1,1,1\n0,1,1,1,1\n")
    with pytest.raises(NonMonotonicTime):
        read_board(path)


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataFileError) as exc:
        read_board(tmp_path / "nope.csv")
    assert exc.value.exit_code == 3
    assert "nope.csv" in str(exc.value)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=30))
def test_trajectory_round_trip_exact(tmp_path_factory, pts):
    path = tmp_path_factory.mktemp("traj") / "t.csv"
    traj = Trajectory2D(np.arange(len(pts)) * 0.1, [p[0] for p in pts], [p[1] for p in pts])
    write_trajectory(traj, path)
    back = read_trajectory(path)
    assert np.array_equal(back.t, traj.t) and np.array_equal(back.x, traj.x) and np.array_equal(back.y, traj.y)


def test_results_empty(tmp_path):
    write_results([], Curves(np.array([]), np.array([]), np.array([])), tmp_path / "r")
    doc = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert doc["stats"] == []
    assert (tmp_path / "r" / "curves.csv").read_text() == "t,err_x,err_y\n"
    stats, curves, run = read_results(tmp_path / "r")
    assert stats == [] and len(curves.t) == 0 and run is None


def test_results_round_trip(tmp_path):
    stats = [ErrorStats("x", 1.5, 0.25, 3, 0.2), ErrorStats("y", 2.0, 1.0, 3, 0.2)]
    curves = Curves(np.array([0.0, 0.1, 0.2]), np.array([1.0, 1.5, 2.0]), np.array([1.0, 2.0, 3.0]))
    write_results(stats, curves, tmp_path, run={"k": 1})
    back, c, run = read_results(tmp_path)
    assert back == stats and run == {"k": 1}
    assert np.array_equal(c.err_y, curves.err_y)
    assert len((tmp_path / "curves.csv").read_text().splitlines()) == 4


def test_results_line_endings(tmp_path):
    write_results([ErrorStats("y", 1.0, 0.0, 1, 0.0)], Curves(np.zeros(1), np.zeros(1), np.ones(1)), tmp_path)
    for name in ("summary.json", "curves.csv"):
        assert b"\r" not in (tmp_path / name).read_bytes()


def test_dump_json_canonical():
    assert dump_json({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'


def test_manifest_round_trip(tmp_path):
    path = simulate(tmp_path, "A", duration_s=1)
    m = read_manifest(path)
    assert m.session_id == "A" and m.segment_table == "deleva-male"
    assert m.resolve(m.board_file) == path.parent / "board.csv"


def _manifest_doc(tmp_path):
    path = simulate(tmp_path, "A", duration_s=1)
    return path, json.loads(path.read_text())


def test_manifest_missing_board_names_path(tmp_path):
    path, _ = _manifest_doc(tmp_path)
    (path.parent / "board.csv").unlink()
    with pytest.raises(ManifestError) as exc:
        read_manifest(path)
    assert "board.csv" in str(exc.value)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(format_version="2.0.0"),
    lambda d: d.update(format_version="one"),
    lambda d: d.pop("profile"),
    lambda d: d["profile"].update(weight_kg=-1),
    lambda d: d.update(segment_table="missing.json"),
])
def test_manifest_errors(tmp_path, mutate):
    path, doc = _manifest_doc(tmp_path)
    mutate(doc)
    path.write_text(json.dumps(doc))
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_manifest_minor_version_accepted(tmp_path):
    path, doc = _manifest_doc(tmp_path)
    doc["format_version"] = "1.3.0"
    path.write_text(json.dumps(doc))
    assert read_manifest(path).format_version == "1.3.0"


def test_manifest_not_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{")
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_frame_positions_preserved_exactly(tmp_path):
    frame = SkeletonFrame.from_positions(0.5, {"head": (0.1, 0.2, 1 / 3)})
    path = tmp_path / "s.csv"
    write_skeleton(SkeletonSeries([frame]), path)
    assert read_skeleton(path)[0].joints["head"].position[2] == 1 / 3
