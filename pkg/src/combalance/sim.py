"""Synthetic paired sessions with planted bias, lag and noise.

The ground truth is a per-axis sinusoidal sway in the board frame. The
skeleton stream is an articulated standing template, scaled to the subject
height and translated rigidly each frame so that its whole-body CoM
projects onto ``truth + y-bias + noise``. The board stream carries loads
split bilinearly over the four cells so that the CoP equals
``truth(t - lag) + noise``.

The y-bias is ``planted_bias_mm_per_bfp * (bfp - bias_reference_bfp)``.
Random numbers come from numpy's PCG64 generator seeded with ``seed``;
skeleton noise is drawn before board noise.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Tuple

import numpy as np

from .anthro import SubjectProfile, profile_bfp, profile_for_bfp
from .bsip import builtin_table_for, load_segment_table, whole_body_com
from .errors import ConfigError
from .io import (
    MANIFEST_VERSION,
    BoardSeries,
    SessionManifest,
    dump_json,
    write_board,
    write_manifest,
    write_skeleton,
    write_text,
    write_trajectory,
)
from .signal import BoardCalibration, Trajectory2D, project_to_board
from .skeleton import SkeletonFrame, SkeletonSeries

RNG_ALGORITHM = "numpy.random.PCG64"

DEFAULT_CALIBRATION = BoardCalibration(
    board_origin=(0.0, -1.0, 2.5),
    board_x_axis=(1.0, 0.0, 0.0),
    board_y_axis=(0.0, 0.0, -1.0),
    half_length_mm=228.0,
    half_width_mm=190.0,
)

# (lateral, up, forward) as fractions of body height; left is +lateral.
# Arbitrary upright pose; only the induced CoM matters downstream.
_TEMPLATE = {
    "spine_base": (0.0, 0.530, 0.0),
    "spine_mid": (0.0, 0.660, -0.005),
    "spine_shoulder": (0.0, 0.818, 0.0),
    "neck": (0.0, 0.870, 0.005),
    "head": (0.0, 0.935, 0.010),
    "shoulder_left": (0.129, 0.810, 0.0),
    "elbow_left": (0.148, 0.630, -0.010),
    "wrist_left": (0.155, 0.485, 0.005),
    "hand_left": (0.157, 0.445, 0.010),
    "hand_tip_left": (0.158, 0.395, 0.012),
    "thumb_left": (0.148, 0.440, 0.030),
    "hip_left": (0.055, 0.520, 0.0),
    "knee_left": (0.058, 0.285, 0.008),
    "ankle_left": (0.060, 0.039, -0.005),
    "foot_left": (0.065, 0.010, 0.070),
}
for _name, (_lat, _up, _fwd) in list(_TEMPLATE.items()):
    if _name.endswith("_left"):
        _TEMPLATE[_name[:-5] + "_right"] = (-_lat, _up, _fwd)


@dataclass
class Scenario:
    profile: SubjectProfile
    session_id: str = "sim"
    duration_s: float = 30.0
    skeleton_rate_hz: float = 30.0
    board_rate_hz: float = 60.0
    sway_amplitude_mm: Tuple[float, float] = (15.0, 25.0)
    sway_frequency_hz: Tuple[float, float] = (0.23, 0.31)
    planted_bias_mm_per_bfp: float = 0.0
    bias_reference_bfp: float = 19.51
    planted_lag_s: float = 0.0
    noise_skeleton_mm: float = 0.0
    noise_board_mm: float = 0.0
    seed: int = 0
    board_calibration: BoardCalibration = field(default_factory=lambda: DEFAULT_CALIBRATION)

    def __post_init__(self):
        for name in ("duration_s", "skeleton_rate_hz", "board_rate_hz"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"scenario {name} must be positive, got {v!r}")
        for name in ("noise_skeleton_mm", "noise_board_mm", "planted_lag_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(f"scenario {name} must be non-negative, got {v!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("scenario seed must be a 64-bit unsigned integer")
        self.sway_amplitude_mm = tuple(float(v) for v in self.sway_amplitude_mm)
        self.sway_frequency_hz = tuple(float(v) for v in self.sway_frequency_hz)
        if len(self.sway_amplitude_mm) != 2 or len(self.sway_frequency_hz) != 2:
            raise ConfigError("sway amplitude and frequency need one value per axis")
        if min(self.sway_frequency_hz) <= 0 or min(self.sway_amplitude_mm) <= 0:
            raise ConfigError("sway amplitude and frequency must be positive")
        cal = self.board_calibration
        reach = 5 * self.noise_board_mm
        if (self.sway_amplitude_mm[0] + reach >= cal.half_length_mm
                or self.sway_amplitude_mm[1] + reach >= cal.half_width_mm):
            raise ConfigError("sway plus board noise would leave the load-cell rectangle")
        if self.profile.bfp is None:
            profile_bfp(self.profile)

    @property
    def bias_mm(self):
        return self.planted_bias_mm_per_bfp * (self.profile.bfp - self.bias_reference_bfp)

    def to_dict(self):
        return {
            "session_id": self.session_id,
            "profile": self.profile.to_dict(),
            "duration_s": self.duration_s,
            "skeleton_rate_hz": self.skeleton_rate_hz,
            "board_rate_hz": self.board_rate_hz,
            "sway": {"amplitude_mm": list(self.sway_amplitude_mm),
                     "frequency_hz": list(self.sway_frequency_hz)},
            "planted_bias_mm_per_bfp": self.planted_bias_mm_per_bfp,
            "bias_reference_bfp": self.bias_reference_bfp,
            "planted_lag_s": self.planted_lag_s,
            "noise_mm": {"skeleton": self.noise_skeleton_mm, "board": self.noise_board_mm},
            "seed": self.seed,
            "board_calibration": self.board_calibration.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        """Parse a scenario document.

        ``profile`` is either a full profile or ``{"target_bfp", "height_m",
        "age_years", "sex"[, "id"]}``, in which case the weight is solved so
        that the derived body fat equals the target.
        """
        d = dict(d)
        known = {"session_id", "profile", "duration_s", "skeleton_rate_hz", "board_rate_hz", "sway",
                 "planted_bias_mm_per_bfp", "bias_reference_bfp", "planted_lag_s", "noise_mm",
                 "seed", "board_calibration"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"scenario has unknown keys {sorted(unknown)}")
        if "profile" not in d:
            raise ConfigError("scenario needs a profile")
        p = dict(d.pop("profile"))
        if "target_bfp" in p:
            profile = profile_for_bfp(p.pop("target_bfp"), p.pop("height_m"), p.pop("age_years"),
                                      p.pop("sex"), id=p.pop("id", d.get("session_id", "sim")))
            if p:
                raise ConfigError(f"unexpected profile keys with target_bfp: {sorted(p)}")
        else:
            profile = SubjectProfile.from_dict(p)
        kw = {}
        sway = d.pop("sway", None)
        if sway is not None:
            kw["sway_amplitude_mm"] = tuple(sway["amplitude_mm"])
            kw["sway_frequency_hz"] = tuple(sway["frequency_hz"])
        noise = d.pop("noise_mm", None)
        if noise is not None:
            kw["noise_skeleton_mm"] = float(noise.get("skeleton", 0.0))
            kw["noise_board_mm"] = float(noise.get("board", 0.0))
        cal = d.pop("board_calibration", None)
        if cal is not None:
            kw["board_calibration"] = BoardCalibration.from_dict(cal)
        return cls(profile=profile, **d, **kw)


class Session(NamedTuple):
    skeleton: SkeletonSeries
    board_raw: BoardSeries
    truth: Trajectory2D


def sway(scenario: Scenario, t):
    (ax, ay), (fx, fy) = scenario.sway_amplitude_mm, scenario.sway_frequency_hz
    t = np.asarray(t, dtype=float)
    return ax * np.sin(2 * np.pi * fx * t), ay * np.sin(2 * np.pi * fy * t)


def template_joints(height_m, cal: BoardCalibration):
    """Standing template in the camera frame, feet centered on the board origin."""
    up = np.cross(cal.board_x_axis, cal.board_y_axis)
    return {
        name: cal.board_origin + height_m * (lat * cal.board_x_axis + u * up + fwd * cal.board_y_axis)
        for name, (lat, u, fwd) in _TEMPLATE.items()
    }


def _times(duration_s, rate_hz):
    n = int(math.floor(duration_s * rate_hz + 1e-9)) + 1
    return np.arange(n) / rate_hz


def bilinear_loads(x_mm, y_mm, total, half_length_mm, half_width_mm):
    """Four cell loads with the given CoP and total, twist-free split."""
    u = np.asarray(x_mm) / half_length_mm
    v = np.asarray(y_mm) / half_width_mm
    q = total / 4.0
    return (q * (1 - u) * (1 + v), q * (1 + u) * (1 + v),
            q * (1 - u) * (1 - v), q * (1 + u) * (1 - v))


def generate_session(scenario: Scenario) -> Session:
    rng = np.random.default_rng(scenario.seed)
    cal = scenario.board_calibration
    profile = scenario.profile

    ts = _times(scenario.duration_s, scenario.skeleton_rate_hz)
    tb = _times(scenario.duration_s, scenario.board_rate_hz)
    noise_k = rng.normal(0.0, 1.0, size=(len(ts), 2)) * scenario.noise_skeleton_mm
    noise_b = rng.normal(0.0, 1.0, size=(len(tb), 2)) * scenario.noise_board_mm

    truth_x, truth_y = sway(scenario, ts)
    truth = Trajectory2D(ts, truth_x, truth_y, rate_hz=scenario.skeleton_rate_hz)

    # skeleton: rigid translation of the template onto the target CoM
    table = load_segment_table(builtin_table_for(profile.sex))
    template = template_joints(profile.height_m, cal)
    c0 = whole_body_com(SkeletonFrame.from_positions(0.0, template), table).position
    px0, py0 = project_to_board(c0, cal)
    tx = truth_x + noise_k[:, 0]
    ty = truth_y + scenario.bias_mm + noise_k[:, 1]
    frames = []
    for t, x, y in zip(ts, tx, ty):
        shift = ((x - px0) / 1000.0) * cal.board_x_axis + ((y - py0) / 1000.0) * cal.board_y_axis
        frames.append(SkeletonFrame.from_positions(t, {n: p + shift for n, p in template.items()}))

    # board: delayed truth plus noise, split over the four cells
    bx, by = sway(scenario, tb - scenario.planted_lag_s)
    bx = bx + noise_b[:, 0]
    by = by + noise_b[:, 1]
    tl, tr, bl, br = bilinear_loads(bx, by, profile.weight_kg, cal.half_length_mm, cal.half_width_mm)
    board = BoardSeries(tb, tl, tr, bl, br)
    return Session(SkeletonSeries(frames), board, truth)


def write_session(scenario: Scenario, out_dir) -> Path:
    """Generate a session and write it as a directory with a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    session = generate_session(scenario)
    write_skeleton(session.skeleton, out / "skeleton.csv")
    write_board(session.board_raw, out / "board.csv")
    write_trajectory(session.truth, out / "truth.csv")
    meta = scenario.to_dict()
    meta["rng_algorithm"] = RNG_ALGORITHM
    write_text(out / "scenario.json", dump_json(meta))
    manifest = SessionManifest(
        session_id=scenario.session_id,
        profile=scenario.profile,
        skeleton_file="skeleton.csv",
        board_file="board.csv",
        board_calibration=scenario.board_calibration,
        segment_table=builtin_table_for(scenario.profile.sex),
        notes=f"synthetic session; rng={RNG_ALGORITHM} seed={scenario.seed}",
        format_version=MANIFEST_VERSION,
    )
    write_manifest(manifest, out / "manifest.json")
    return out / "manifest.json"
