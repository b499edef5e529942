import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combalance.anthro import SubjectProfile, profile_for_bfp
from combalance.bsip import builtin_table_for, load_segment_table, whole_body_com
from combalance.config import RunConfig
from combalance.errors import ConfigError
from combalance.io import read_board, read_manifest, read_skeleton, read_trajectory
from combalance.pipeline import board_trajectory, compare_prepared, prepare_session
from combalance.signal import project_to_board
from combalance.sim import DEFAULT_CALIBRATION, Scenario, bilinear_loads, generate_session, write_session

from .conftest import prepared, simulate, stat, subject_profile


def test_same_seed_same_bytes(tmp_path):
    a = simulate(tmp_path / "a", "A", duration_s=5, noise_skeleton_mm=3, noise_board_mm=1, seed=7)
    b = simulate(tmp_path / "b", "A", duration_s=5, noise_skeleton_mm=3, noise_board_mm=1, seed=7)
    for name in ("skeleton.csv", "board.csv", "truth.csv", "scenario.json", "manifest.json"):
        assert (a.parent / name).read_bytes() == (b.parent / name).read_bytes()


def test_different_seed_differs(tmp_path):
    a = simulate(tmp_path / "a", "A", duration_s=5, noise_board_mm=1, seed=1)
    b = simulate(tmp_path / "b", "A", duration_s=5, noise_board_mm=1, seed=2)
    assert (a.parent / "board.csv").read_bytes() != (b.parent / "board.csv").read_bytes()


def test_scenario_records_rng(tmp_path):
    doc = json.loads((simulate(tmp_path, "C", duration_s=2).parent / "scenario.json").read_text())
    assert doc["rng_algorithm"] == "numpy.random.PCG64" and doc["seed"] == 0


def test_skeleton_com_hits_truth():
    sc = Scenario(subject_profile("B"), duration_s=3)
    session = generate_session(sc)
    table = load_segment_table(builtin_table_for("female"))
    for frame, x, y in zip(session.skeleton, session.truth.x, session.truth.y):
        px, py = project_to_board(whole_body_com(frame, table).position, DEFAULT_CALIBRATION)
        assert abs(px - x) < 1e-9 and abs(py - y) < 1e-9


def test_board_loads_reproduce_cop_and_weight():
    sc = Scenario(subject_profile("C"), duration_s=3)
    session = generate_session(sc)
    b = session.board_raw
    np.testing.assert_allclose(b.tl + b.tr + b.bl + b.br, sc.profile.weight_kg, rtol=1e-12)
    cop = board_trajectory(b, DEFAULT_CALIBRATION)
    truth_x, truth_y = (sc.sway_amplitude_mm[i] * np.sin(2 * np.pi * sc.sway_frequency_hz[i] * b.t)
                        for i in range(2))
    np.testing.assert_allclose(cop.x, truth_x, atol=1e-9)
    np.testing.assert_allclose(cop.y, truth_y, atol=1e-9)


@given(st.floats(-200, 200), st.floats(-180, 180), st.floats(1, 200))
def test_bilinear_loads_nonnegative(x, y, w):
    loads = bilinear_loads(x, y, w, 228, 190)
    assert all(v >= 0 for v in loads)
    assert sum(loads) == pytest.approx(w, rel=1e-12)


def test_written_files_read_back(tmp_path):
    m = simulate(tmp_path, "A", duration_s=2)
    assert len(read_skeleton(m.parent / "skeleton.csv")) == 61
    assert len(read_board(m.parent / "board.csv")) == 121
    assert len(read_trajectory(m.parent / "truth.csv")) == 61


def test_lossless_round_trip(tmp_path):
    prep = prepared(tmp_path, "A", duration_s=10)
    stats, _ = compare_prepared(prep)
    assert prep.lag_s == 0.0
    for s in stats:
        assert s.mean < 1e-9


@pytest.mark.parametrize("lag", [0.1, 0.2, 0.5])
def test_lag_recovered(tmp_path, lag):
    prep = prepared(tmp_path, "C", duration_s=20, planted_lag_s=lag, noise_skeleton_mm=2, noise_board_mm=1)
    assert abs(prep.lag_s - lag) <= 1 / 30


def test_bias_orders_subjects(tmp_path):
    means = {}
    for key in ("A", "C", "B"):
        prep = prepared(tmp_path, key, duration_s=15, planted_bias_mm_per_bfp=2.0, bias_reference_bfp=0.0,
                        noise_skeleton_mm=2, noise_board_mm=1, seed=11)
        means[key] = stat(compare_prepared(prep)[0], "y").mean
    assert means["B"] > means["C"] > means["A"]
    assert means["B"] == pytest.approx(2 * 30.96, rel=0.05)


def test_board_noise_level(tmp_path):
    sigma = 2.0
    sc = Scenario(subject_profile("A"), duration_s=30, noise_board_mm=sigma, seed=5)
    session = generate_session(sc)
    cop = board_trajectory(session.board_raw, sc.board_calibration)
    tx, ty = (sc.sway_amplitude_mm[i] * np.sin(2 * np.pi * sc.sway_frequency_hz[i] * cop.t) for i in range(2))
    rmse = np.sqrt(np.mean((cop.x - tx) ** 2 + (cop.y - ty) ** 2) / 2)
    assert rmse <= 1.5 * sigma
    assert rmse >= 0.5 * sigma


@settings(max_examples=10, deadline=None)
@given(st.floats(10, 40), st.floats(10, 40))
def test_error_grows_with_bfp_distance(b1, b2):
    if abs(abs(b1 - 19.51) - abs(b2 - 19.51)) < 1.0:
        return
    errs = []
    for bfp in (b1, b2):
        p = SubjectProfile("p", 70, 1.7, 30, "male", bfp=bfp)
        sc = Scenario(p, duration_s=3, planted_bias_mm_per_bfp=1.5)
        errs.append(abs(sc.bias_mm))
    assert (errs[0] < errs[1]) == (abs(b1 - 19.51) < abs(b2 - 19.51))


def test_monotone_error_through_pipeline(tmp_path):
    means = []
    for i, off in enumerate((0.0, 4.0, 8.0, 12.0)):
        p = profile_for_bfp(19.51 + off, 1.7, 30, "male", id=f"s{i}")
        sc = Scenario(p, session_id=f"s{i}", duration_s=10, planted_bias_mm_per_bfp=2.0, noise_board_mm=0.5)
        prep = prepare_session(read_manifest(write_session(sc, tmp_path / f"s{i}")), RunConfig())
        means.append(stat(compare_prepared(prep)[0], "y").mean)
    assert means == sorted(means)


@pytest.mark.parametrize("kw", [
    {"duration_s": 0}, {"noise_board_mm": -1}, {"seed": -1}, {"sway_amplitude_mm": (300, 10)},
    {"sway_frequency_hz": (0, 1)},
])
def test_scenario_validation(kw):
    with pytest.raises(ConfigError):
        Scenario(subject_profile("A"), **kw)


def test_scenario_from_target_bfp():
    sc = Scenario.from_dict({"session_id": "x", "profile": {"target_bfp": 25.0, "height_m": 1.7,
                                                              "age_years": 40, "sex": "female"}})
    assert sc.profile.bfp == pytest.approx(25.0, rel=1e-12)
    assert Scenario.from_dict(json.loads(json.dumps(sc.to_dict()))).to_dict() == sc.to_dict()
    with pytest.raises(ConfigError):
        Scenario.from_dict({"profile": sc.profile.to_dict(), "bogus": 1})
