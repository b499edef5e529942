"""Board-frame trajectories and the Kinect-vs-board comparison quantities.

All trajectories live in the 2-D board frame in millimeters: ``x`` along
the board's long axis, ``y`` along its short axis. Standard deviations are
population (``ddof=0``) values throughout.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    AlignmentError,
    CalibrationError,
    DegenerateSignal,
    InsufficientData,
    NoLoad,
)

BOARD = "board"
NORMALIZED = "normalized"
MEAN_CENTER = "mean_center"
CENTER_SCALE = "center_scale"
NORMALIZATION_MODES = (MEAN_CENTER, CENTER_SCALE)
AXES = ("x", "y", "euclidean")

ORTHONORMAL_TOL = 1e-9
_GRID_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Trajectory2D:
    """Timestamped planar samples; ``rate_hz`` is None for irregular sampling."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    frame: str = BOARD
    rate_hz: Optional[float] = None

    def __post_init__(self):
        t, x, y = (_frozen(np.ravel(v)) for v in (self.t, self.x, self.y))
        if not (len(t) == len(x) == len(y)):
            raise ValueError("t, x and y must have equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("trajectory values must be finite")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        if self.frame not in (BOARD, NORMALIZED):
            raise ValueError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.t)

    def replace(self, **changes):
        d = dict(t=self.t, x=self.x, y=self.y, frame=self.frame, rate_hz=self.rate_hz)
        d.update(changes)
        return Trajectory2D(**d)

    def slice(self, start, stop):
        return self.replace(t=self.t[start:stop], x=self.x[start:stop], y=self.y[start:stop])


@dataclass(frozen=True)
class BoardCalibration:
    """Board pose in the camera frame: origin (m) and in-plane unit axes."""

    board_origin: np.ndarray
    board_x_axis: np.ndarray
    board_y_axis: np.ndarray
    half_length_mm: float = 228.0
    half_width_mm: float = 190.0

    def __post_init__(self):
        for name in ("board_origin", "board_x_axis", "board_y_axis"):
            v = _frozen(getattr(self, name)).reshape(3)
            if not np.all(np.isfinite(v)):
                raise CalibrationError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("half_length_mm", "half_width_mm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise CalibrationError(f"{name} must be positive, got {v!r}")

    def check(self):
        ex, ey = self.board_x_axis, self.board_y_axis
        gram = np.array([[ex @ ex, ex @ ey], [ey @ ex, ey @ ey]])
        dev = np.max(np.abs(gram - np.eye(2)))
        if dev > ORTHONORMAL_TOL:
            raise CalibrationError(f"board axes are not orthonormal (max Gram deviation {dev:.3g})")

    def to_dict(self):
        return {
            "board_origin": [float(v) for v in self.board_origin],
            "board_x_axis": [float(v) for v in self.board_x_axis],
            "board_y_axis": [float(v) for v in self.board_y_axis],
            "half_length_mm": float(self.half_length_mm),
            "half_width_mm": float(self.half_width_mm),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                d["board_origin"], d["board_x_axis"], d["board_y_axis"],
                float(d.get("half_length_mm", 228.0)), float(d.get("half_width_mm", 190.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"malformed board calibration: {exc}") from exc


class ErrorStats(NamedTuple):
    axis: str
    mean: float
    sd: float
    n: int
    lag_applied_s: float = 0.0

    def to_dict(self):
        return {"axis": self.axis, "mean": self.mean, "sd": self.sd, "n": self.n,
                "lag_applied_s": self.lag_applied_s}

    @classmethod
    def from_dict(cls, d):
        return cls(d["axis"], float(d["mean"]), float(d["sd"]), int(d["n"]), float(d["lag_applied_s"]))


# -- center of pressure ----------------------------------------------------

def cop_from_loads(tl, tr, bl, br, half_length_mm=228.0, half_width_mm=190.0, min_total=1e-6):
    """Center of pressure of a four-load-cell board.

    Works elementwise on arrays. ``x`` grows toward the right cells, ``y``
    toward the top cells. Raises :class:`NoLoad` where the total load is not
    above ``min_total`` (subject off the board).
    """
    tl, tr, bl, br = (np.asarray(v, dtype=float) for v in (tl, tr, bl, br))
    if np.any(tl < 0) or np.any(tr < 0) or np.any(bl < 0) or np.any(br < 0):
        raise ValueError("load values must be non-negative")
    total = tl + tr + bl + br
    if np.any(~(total > min_total)):
        raise NoLoad(f"total load below minimum {min_total!r}")
    x = half_length_mm * ((tr + br) - (tl + bl)) / total
    y = half_width_mm * ((tl + tr) - (bl + br)) / total
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def project_to_board(com, cal: BoardCalibration):
    """Vertical projection of a camera-frame point (m) onto the board (mm).

    ``com`` may be a single 3-vector or an ``(n, 3)`` array.
    """
    cal.check()
    d = np.asarray(com, dtype=float) - cal.board_origin
    x = 1000.0 * (d @ cal.board_x_axis)
    y = 1000.0 * (d @ cal.board_y_axis)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


# -- resampling and alignment ----------------------------------------------

def _grid(t_start, t_stop, rate_hz):
    n = int(math.floor((t_stop - t_start) * rate_hz + _GRID_TOL)) + 1
    return t_start + np.arange(n) / rate_hz


def resample(traj: Trajectory2D, rate_hz: float, t_start=None, t_stop=None) -> Trajectory2D:
    """Linear interpolation onto the uniform grid ``t_start + k / rate_hz``.

    The grid spans ``[t_start, t_stop]`` (defaults: the trajectory's own
    range) and never extends past the data.
    """
    if not (rate_hz > 0 and math.isfinite(rate_hz)):
        raise ValueError(f"rate_hz must be positive, got {rate_hz!r}")
    if len(traj) < 2:
        raise InsufficientData(f"resampling needs at least 2 samples, got {len(traj)}")
    t0 = traj.t[0] if t_start is None else max(float(t_start), traj.t[0])
    t1 = traj.t[-1] if t_stop is None else min(float(t_stop), traj.t[-1])
    if t1 < t0:
        raise InsufficientData("requested range does not overlap the trajectory")
    grid = _grid(t0, t1, rate_hz)
    grid = grid[grid <= traj.t[-1]]
    return traj.replace(
        t=grid,
        x=np.interp(grid, traj.t, traj.x),
        y=np.interp(grid, traj.t, traj.y),
        rate_hz=float(rate_hz),
    )


def resample_common(a: Trajectory2D, b: Trajectory2D, rate_hz: float):
    """Resample two trajectories onto one grid over their common time range."""
    if len(a) < 2 or len(b) < 2:
        raise InsufficientData("both trajectories need at least 2 samples")
    t0 = max(a.t[0], b.t[0])
    t1 = min(a.t[-1], b.t[-1])
    if t1 <= t0:
        raise InsufficientData("trajectories do not overlap in time")
    ra = resample(a, rate_hz, t0, t1)
    rb = resample(b, rate_hz, t0, t1)
    n = min(len(ra), len(rb))
    return ra.slice(0, n), rb.slice(0, n)


def _check_same_grid(a, b):
    if len(a) != len(b):
        raise AlignmentError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.rate_hz is None or b.rate_hz is None or a.rate_hz != b.rate_hz:
        raise AlignmentError("trajectories must be resampled to the same rate")
    if len(a) and np.max(np.abs(a.t - b.t)) > _GRID_TOL / a.rate_hz + 1e-12:
        raise AlignmentError("trajectories are not on a common time grid")


def _pearson(a, b):
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / den if den > 0 else 0.0


def estimate_lag(ref: Trajectory2D, test: Trajectory2D, max_lag_s: float = 1.0) -> float:
    """Delay of ``test`` relative to ``ref`` in seconds.

    A positive result means ``test`` trails ``ref``: ``test(t) ~ ref(t - lag)``.
    The lag maximizes the normalized cross-correlation of the mean-removed
    y signals over the overlapping window of each candidate shift. Ties go
    to the smaller ``|lag|``, then to the negative lag.
    """
    _check_same_grid(ref, test)
    rate = ref.rate_hz
    n = len(ref)
    if n < 2 or (n - 1) / rate < 2 * max_lag_s:
        raise InsufficientData(
            f"overlap {(max(n, 1) - 1) / rate:.3f} s shorter than 2 * max_lag ({2 * max_lag_s} s)"
        )
    if np.ptp(ref.y) == 0 or np.ptp(test.y) == 0:
        raise DegenerateSignal("y signal has zero variance")
    a = ref.y - ref.y.mean()
    b = test.y - test.y.mean()
    max_k = int(math.floor(max_lag_s * rate + _GRID_TOL))
    best = None
    for k in range(-max_k, max_k + 1):
        if k >= 0:
            r = _pearson(a[: n - k], b[k:])
        else:
            r = _pearson(a[-k:], b[: n + k])
        key = (-r, abs(k), k)
        if best is None or key < best[0]:
            best = (key, k)
    return best[1] / rate


def align(ref: Trajectory2D, test: Trajectory2D, lag_s: float):
    """Shift ``test`` later by ``lag_s`` and trim both to the overlap.

    Both trajectories must share a grid; ``lag_s`` is rounded to a whole
    number of samples. The shifted ``test`` takes the timestamps of ``ref``.
    """
    _check_same_grid(ref, test)
    k = int(round(lag_s * ref.rate_hz))
    n = len(ref)
    if abs(k) >= n - 1:
        raise InsufficientData(f"lag of {k} samples leaves no overlap")
    if k >= 0:
        r, s = ref.slice(k, n), test.slice(0, n - k)
    else:
        r, s = ref.slice(0, n + k), test.slice(-k, n)
    return r, s.replace(t=r.t)


# -- normalization and error statistics ------------------------------------

def normalize(traj: Trajectory2D, mode: str = MEAN_CENTER, reference: Optional[Trajectory2D] = None):
    """Remove the per-axis session mean (and, for center_scale, divide by sd).

    Statistics come from ``reference`` when given, so two streams of one
    session can share a common origin; otherwise from ``traj`` itself.
    """
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}")
    src = traj if reference is None else reference
    if len(traj) < 1 or len(src) < 1:
        raise InsufficientData("normalization needs at least one sample")
    mx, my = src.x.mean(), src.y.mean()
    x, y = traj.x - mx, traj.y - my
    if mode == CENTER_SCALE:
        sx, sy = src.x.std(), src.y.std()
        if sx == 0 or sy == 0:
            raise DegenerateSignal("center_scale normalization with zero standard deviation")
        x, y = x / sx, y / sy
    return traj.replace(x=x, y=y, frame=NORMALIZED)


def distances(ref: Trajectory2D, test: Trajectory2D, axis: str) -> np.ndarray:
    if len(ref) != len(test):
        raise AlignmentError(f"length mismatch: {len(ref)} vs {len(test)}")
    if len(ref) and np.max(np.abs(ref.t - test.t)) > 1e-9:
        raise AlignmentError("trajectories do not share timestamps")
    if axis == "x":
        return np.abs(ref.x - test.x)
    if axis == "y":
        return np.abs(ref.y - test.y)
    if axis == "euclidean":
        return np.hypot(ref.x - test.x, ref.y - test.y)
    raise ValueError(f"axis must be one of {AXES}")


def error_stats(ref: Trajectory2D, test: Trajectory2D, axis: str = "y", lag_applied_s: float = 0.0):
    """Mean and population sd of per-sample distances on one axis."""
    d = distances(ref, test, axis)
    if len(d) < 1:
        raise InsufficientData("error statistics need at least one sample")
    return ErrorStats(axis, float(d.mean()), float(d.std()), int(len(d)), float(lag_applied_s))
