import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combalance.bsip import (
    BUILTIN_TABLES,
    SegmentDefinition,
    canonical_json,
    load_segment_table,
    segment_com,
    series_com,
    table_checksum,
    whole_body_com,
)
from combalance.errors import (
    FrameUnusable,
    SchemaError,
    SegmentUnavailable,
    SumError,
    UnknownJointError,
)
from combalance.skeleton import JOINT_NAMES, SkeletonFrame, SkeletonSeries

from .conftest import random_frame, random_rotation


def _table_file(tmp_path, segments, variant="neutral", name="t.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"variant": variant, "source": "test", "segments": segments}))
    return path


def _seg(name, prox, dist, mass, ratio=0.5, side="axial"):
    return {"name": name, "proximal": prox, "distal": dist, "mass_fraction": mass,
            "com_ratio": ratio, "side": side}


def _brute_force_com(frame, table):
    # independent accumulation straight from the raw JSON-level numbers
    acc = [0.0, 0.0, 0.0]
    for seg in table.segments:
        p = frame.joints[seg.proximal].position
        d = frame.joints[seg.distal].position
        for k in range(3):
            acc[k] += seg.mass_fraction * (p[k] + seg.com_ratio * (d[k] - p[k]))
    return np.array(acc)


@pytest.mark.parametrize("name", BUILTIN_TABLES)
def test_builtin_tables_sum_to_one(name):
    table = load_segment_table(name)
    assert abs(math.fsum(table.mass_fractions) - 1.0) <= 1e-9
    assert len(table.segments) == 14
    assert table.checksum == table_checksum(table.to_dict())


def test_builtin_male_matches_published_fractions():
    table = load_segment_table("deleva-male")
    by_name = {s.name: s for s in table.segments}
    assert by_name["trunk"].mass_fraction == pytest.approx(0.4346, abs=1e-9)
    assert by_name["thigh_left"].com_ratio == pytest.approx(0.4095)
    assert by_name["head"].mass_fraction == pytest.approx(0.0694, abs=1e-9)


def test_builtin_file_is_canonical():
    from importlib import resources

    text = resources.files("combalance.data").joinpath("deleva-female.json").read_text("utf-8")
    assert text == canonical_json(json.loads(text))


def test_minimal_table_loads(tmp_path):
    path = _table_file(tmp_path, [_seg("a", "head", "neck", 0.5), _seg("b", "hip_left", "knee_left", 0.5)])
    table = load_segment_table(path)
    assert [s.name for s in table.segments] == ["a", "b"]


def test_sum_error(tmp_path):
    path = _table_file(tmp_path, [_seg("a", "head", "neck", 0.49), _seg("b", "hip_left", "knee_left", 0.49)])
    with pytest.raises(SumError):
        load_segment_table(path)


def test_unknown_joint(tmp_path):
    path = _table_file(tmp_path, [_seg("a", "head", "tail", 0.5), _seg("b", "hip_left", "knee_left", 0.5)])
    with pytest.raises(UnknownJointError):
        load_segment_table(path)


@pytest.mark.parametrize("bad", [
    {"variant": "alien", "source": "x", "segments": []},
    {"variant": "male", "source": "x", "segments": [{"name": "a"}]},
    {"variant": "male", "source": "x", "segments": [_seg("a", "head", "head", 1.0)]},
    {"variant": "male", "source": "x", "segments": [_seg("a", "head", "neck", 1.0, ratio=1.5)]},
    {"variant": "male", "source": "x", "segments": [_seg("a", "head", "neck", 1.0)], "checksum": "00"},
])
def test_schema_errors(tmp_path, bad):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(SchemaError):
        load_segment_table(path)


def test_errors_are_distinct():
    assert not issubclass(SumError, SchemaError)
    assert not issubclass(UnknownJointError, SchemaError)


def _frame(positions, states=None):
    return SkeletonFrame.from_positions(0.0, positions, states)


def test_segment_com_examples():
    seg = SegmentDefinition("s", "hip_left", "knee_left", 0.5, 0.0)
    f = _frame({"hip_left": (3, -2, 7), "knee_left": (9, 9, 9)})
    np.testing.assert_array_equal(segment_com(f, seg), [3, -2, 7])
    seg = SegmentDefinition("s", "hip_left", "knee_left", 0.5, 0.5)
    f = _frame({"hip_left": (0, 0, 0), "knee_left": (2, 0, 0)})
    np.testing.assert_array_equal(segment_com(f, seg), [1, 0, 0])
    seg = SegmentDefinition("s", "hip_left", "knee_left", 0.5, 0.25)
    f = _frame({"hip_left": (1, 1, 1), "knee_left": (5, 1, 1)})
    np.testing.assert_array_equal(segment_com(f, seg), [2, 1, 1])


def test_segment_unavailable_names_segment():
    seg = SegmentDefinition("thigh_left", "hip_left", "knee_left", 0.5, 0.5)
    f = _frame({"hip_left": (0, 0, 0), "knee_left": (1, 1, 1)}, {"knee_left": "not_tracked"})
    with pytest.raises(SegmentUnavailable) as exc:
        segment_com(f, seg)
    assert exc.value.segment == "thigh_left"
    with pytest.raises(SegmentUnavailable):
        segment_com(_frame({"hip_left": (0, 0, 0)}), seg)


def test_whole_body_degenerate_skeleton():
    p = np.array([0.3, -1.2, 2.5])
    f = _frame({n: p for n in JOINT_NAMES})
    com, quality = whole_body_com(f, load_segment_table("deleva-male"))
    np.testing.assert_allclose(com, p, rtol=0, atol=1e-15)
    assert quality == pytest.approx(1.0, abs=1e-12)


def test_whole_body_symmetric_average(tmp_path):
    table = load_segment_table(_table_file(tmp_path, [
        _seg("a", "hip_left", "knee_left", 0.5, 0.0), _seg("b", "hip_right", "knee_right", 0.5, 0.0)]))
    f = _frame({"hip_left": (0, 0, 0), "knee_left": (5, 5, 5), "hip_right": (2, 0, 0), "knee_right": (7, 7, 7)})
    com, _ = whole_body_com(f, table)
    np.testing.assert_array_equal(com, [1, 0, 0])


@pytest.mark.parametrize("name", BUILTIN_TABLES)
def test_whole_body_matches_brute_force(rng, name):
    table = load_segment_table(name)
    for _ in range(100):
        f = random_frame(rng)
        com, quality = whole_body_com(f, table)
        np.testing.assert_allclose(com, _brute_force_com(f, table), rtol=0, atol=1e-12)


def test_renormalize_drops_missing_segment():
    table = load_segment_table("deleva-male")
    rng = np.random.default_rng(1)
    f = random_frame(rng)
    states = {"foot_left": "not_tracked"}
    g = SkeletonFrame.from_positions(0.0, f.positions(), states)
    com, quality = whole_body_com(g, table)
    kept = [s for s in table.segments if s.name != "foot_left"]
    w = np.array([s.mass_fraction for s in kept])
    expected = sum(wi * segment_com(g, s) for wi, s in zip(w / w.sum(), kept))
    np.testing.assert_allclose(com, expected, atol=1e-12)
    foot = next(s for s in table.segments if s.name == "foot_left").mass_fraction
    assert quality == pytest.approx(1.0 - foot)
    with pytest.raises(SegmentUnavailable):
        whole_body_com(g, table, policy="fail")


def test_renormalize_identical_when_complete(rng):
    table = load_segment_table("deleva-female")
    f = random_frame(rng)
    a = whole_body_com(f, table, policy="renormalize").position
    b = whole_body_com(f, table, policy="fail").position
    assert np.array_equal(a, b)


def test_inferred_joints_lower_quality_only():
    table = load_segment_table("deleva-male")
    f = random_frame(np.random.default_rng(2))
    g = SkeletonFrame.from_positions(0.0, f.positions(), {"knee_left": "inferred"})
    a, qa = whole_body_com(f, table)
    b, qb = whole_body_com(g, table)
    assert np.array_equal(a, b)
    fr = {s.name: s.mass_fraction for s in table.segments}
    assert qb == pytest.approx(1.0 - 0.5 * (fr["thigh_left"] + fr["shank_left"]))


def test_frame_unusable():
    table = load_segment_table("deleva-male")
    with pytest.raises(FrameUnusable):
        whole_body_com(_frame({"head": (0, 0, 0)}), table)


def test_series_com_skips_unusable(rng):
    table = load_segment_table("deleva-neutral")
    frames = [random_frame(rng, 0.0), SkeletonFrame.from_positions(0.1, {"head": (0, 0, 0)}),
              random_frame(rng, 0.2)]
    t, com, q = series_com(SkeletonSeries(frames), table)
    np.testing.assert_array_equal(t, [0.0, 0.2])
    assert com.shape == (2, 3)


vec3 = st.tuples(*[st.floats(-5, 5)] * 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), vec3)
def test_translation_equivariance(seed, shift):
    table = load_segment_table("deleva-male")
    f = random_frame(np.random.default_rng(seed))
    t = np.array(shift)
    a = whole_body_com(f, table).position
    b = whole_body_com(f.map_positions(lambda p: p + t), table).position
    np.testing.assert_allclose(b, a + t, rtol=0, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_rotation_equivariance(seed):
    rng = np.random.default_rng(seed)
    table = load_segment_table("deleva-female")
    f = random_frame(rng)
    R = random_rotation(rng)
    a = whole_body_com(f, table).position
    b = whole_body_com(f.map_positions(lambda p: R @ p), table).position
    np.testing.assert_allclose(b, R @ a, rtol=0, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_com_inside_convex_hull_of_segment_coms(seed):
    # convex combination check: weights are the normalized fractions, all >= 0
    rng = np.random.default_rng(seed)
    table = load_segment_table("deleva-neutral")
    f = random_frame(rng)
    coms = np.array([segment_com(f, s) for s in table.segments])
    com = whole_body_com(f, table).position
    lo, hi = coms.min(axis=0), coms.max(axis=0)
    assert np.all(com >= lo - 1e-12) and np.all(com <= hi + 1e-12)
    # and it is reproduced by the non-negative weights that sum to one
    w = table.mass_fractions
    assert np.all(w > 0) and abs(w.sum() - 1) < 1e-9
    np.testing.assert_allclose(w @ coms, com, atol=1e-12)
