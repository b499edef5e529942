import numpy as np
import pytest

from combalance.anthro import profile_for_bfp
from combalance.skeleton import JOINT_NAMES, SkeletonFrame


def random_frame(rng, t=0.0, scale=1.0):
    positions = {n: rng.normal(0.0, scale, 3) for n in JOINT_NAMES}
    return SkeletonFrame.from_positions(t, positions)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# subjects mirroring the three calibration subjects (BFP A < C < B)
SUBJECTS = {
    "A": dict(target_bfp=19.51, height_m=1.78, age_years=30.0, sex="male"),
    "C": dict(target_bfp=23.39, height_m=1.72, age_years=38.0, sex="male"),
    "B": dict(target_bfp=30.96, height_m=1.62, age_years=45.0, sex="female"),
}


def subject_profile(key):
    s = SUBJECTS[key]
    return profile_for_bfp(s["target_bfp"], s["height_m"], s["age_years"], s["sex"], id=key)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def simulate(tmp_path, key, **kw):
    """Write a synthetic session for subject ``key`` and return the manifest path."""
    from combalance.sim import Scenario, write_session

    kw.setdefault("session_id", key)
    return write_session(Scenario(subject_profile(key), **kw), tmp_path / kw["session_id"])


def prepared(tmp_path, key, config=None, **kw):
    from combalance.config import RunConfig
    from combalance.io import read_manifest
    from combalance.pipeline import prepare_session

    return prepare_session(read_manifest(simulate(tmp_path, key, **kw)), config or RunConfig())


def stat(stats, axis):
    return next(s for s in stats if s.axis == axis)
