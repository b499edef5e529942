"""BFP-dependent correction surface for the Kinect y channel.

The surface is

    f(Y, BFP) = a*Y*BFP**2 + b*Y*BFP + c*Y + d*BFP**2 + e*BFP + f

i.e. a y-gain and a y-offset, each quadratic in body-fat percentage. A model
is used either as a *replacement* (``y' = f(y, bfp)``) or as an *offset*
(``y' = y - f(y, bfp)``). Coefficients are fitted by linear least squares
on the basis ``{Y*BFP**2, Y*BFP, Y, BFP**2, BFP, 1}`` using a QR
factorization of the column-equilibrated design matrix.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    IllConditioned,
    InsufficientDiversity,
    ModelSchemaError,
    ProfileIncomplete,
)
from .signal import Trajectory2D

REPLACEMENT = "replacement"
OFFSET = "offset"
MODES = (REPLACEMENT, OFFSET)
PAPER_EQ1 = "paper_eq1"
FITTED = "fitted"
PROVENANCES = (PAPER_EQ1, FITTED)
COEFFICIENT_NAMES = ("a", "b", "c", "d", "e", "f")

# golden-standard subject A
DEFAULT_REFERENCE_BFP = 19.51
# rank-deficiency threshold on the condition number of the equilibrated normal matrix
MAX_CONDITION = 1e13

EQ1_COEFFICIENTS = (0.0094, -0.479, 5.732, -19.47348, 983.09884, -11762.064)


class FitDiagnostics(NamedTuple):
    rmse: float
    condition_number: float
    n_samples: int


@dataclass(frozen=True)
class CorrectionModel:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    mode: str = REPLACEMENT
    reference_bfp: float = DEFAULT_REFERENCE_BFP
    provenance: str = FITTED
    diagnostics: Optional[FitDiagnostics] = None

    def __post_init__(self):
        for name in COEFFICIENT_NAMES + ("reference_bfp",):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ModelSchemaError(f"{name} must be a finite number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.mode not in MODES:
            raise ModelSchemaError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.provenance not in PROVENANCES:
            raise ModelSchemaError(f"provenance must be one of {PROVENANCES}")
        if (self.diagnostics is not None) != (self.provenance == FITTED):
            raise ModelSchemaError("diagnostics must be present exactly when provenance is 'fitted'")

    @property
    def coefficients(self):
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f])

    def to_dict(self):
        d = {k: getattr(self, k) for k in COEFFICIENT_NAMES}
        d.update(mode=self.mode, reference_bfp=self.reference_bfp, provenance=self.provenance,
                 diagnostics=None if self.diagnostics is None else self.diagnostics._asdict())
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ModelSchemaError("model must be a JSON object")
        expected = set(COEFFICIENT_NAMES) | {"mode", "reference_bfp", "provenance", "diagnostics"}
        if set(d) != expected:
            raise ModelSchemaError(
                f"model keys differ from schema: missing {sorted(expected - set(d))}, "
                f"unexpected {sorted(set(d) - expected)}"
            )
        diag = d["diagnostics"]
        if diag is not None:
            try:
                diag = FitDiagnostics(float(diag["rmse"]), float(diag["condition_number"]),
                                      int(diag["n_samples"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelSchemaError(f"malformed diagnostics: {exc}") from exc
        return cls(*(d[k] for k in COEFFICIENT_NAMES), mode=d["mode"],
                   reference_bfp=d["reference_bfp"], provenance=d["provenance"], diagnostics=diag)


def paper_eq1_model(mode: str = OFFSET) -> CorrectionModel:
    """The published coefficients, read either as an offset or a replacement."""
    return CorrectionModel(*EQ1_COEFFICIENTS, mode=mode, reference_bfp=DEFAULT_REFERENCE_BFP,
                           provenance=PAPER_EQ1)


BUILTIN_MODELS = {
    "paper-eq1-offset": lambda: paper_eq1_model(OFFSET),
    "paper-eq1-replacement": lambda: paper_eq1_model(REPLACEMENT),
}


def load_model(source) -> CorrectionModel:
    if isinstance(source, str) and source in BUILTIN_MODELS:
        return BUILTIN_MODELS[source]()
    try:
        doc = json.loads(Path(source).read_text("utf-8"))
    except OSError as exc:
        raise ModelSchemaError(f"cannot read model file {str(source)!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ModelSchemaError(f"model file is not valid JSON: {exc}") from exc
    return CorrectionModel.from_dict(doc)


def eval_surface(Y, bfp, model: CorrectionModel):
    """Evaluate the six-term surface exactly as written; no mode semantics."""
    Y_arr = np.asarray(Y, dtype=float)
    if not np.all(np.isfinite(Y_arr)):
        raise DomainError("Y", Y, "must be finite")
    if not math.isfinite(bfp):
        raise DomainError("bfp", bfp, "must be finite")
    b2 = bfp * bfp
    v = (model.a * Y_arr * b2 + model.b * Y_arr * bfp + model.c * Y_arr
         + model.d * b2 + model.e * bfp + model.f)
    return float(v) if v.ndim == 0 else v


def apply_correction(traj: Trajectory2D, profile, model: CorrectionModel) -> Trajectory2D:
    """Correct the y channel of ``traj`` for the body fat of ``profile``."""
    bfp = getattr(profile, "bfp", None)
    if bfp is None:
        raise ProfileIncomplete(f"profile {getattr(profile, 'id', '?')!r} has no body-fat value")
    f = eval_surface(traj.y, bfp, model)
    y = f if model.mode == REPLACEMENT else traj.y - f
    return traj.replace(y=np.atleast_1d(y))


class CalibrationSet(NamedTuple):
    """Aligned Kinect and board y series of one subject."""

    y_kinect: np.ndarray
    y_board: np.ndarray
    bfp: float


def design_matrix(Y, bfp):
    Y = np.asarray(Y, dtype=float)
    B = np.broadcast_to(np.asarray(bfp, dtype=float), Y.shape)
    one = np.ones_like(Y)
    return np.column_stack([Y * B * B, Y * B, Y, B * B, B, one])


def fit_correction(calibration: Sequence[CalibrationSet], ridge: float = 0.0, mode: str = REPLACEMENT,
                   reference_bfp: float = DEFAULT_REFERENCE_BFP) -> CorrectionModel:
    """Least-squares fit of the six coefficients over several subjects.

    Minimizes ``sum((target - f(Y, BFP))**2) + ridge * |coeffs|**2`` where the
    target is the board y (replacement mode) or ``y_kinect - y_board``
    (offset mode). Three or more distinct BFP levels are needed for an
    unregularized fit; with fewer, a positive ``ridge`` is required.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not (ridge >= 0 and math.isfinite(ridge)):
        raise ValueError("ridge must be a non-negative finite number")
    blocks, targets = [], []
    for cal in calibration:
        yk = np.asarray(cal.y_kinect, dtype=float).ravel()
        yb = np.asarray(cal.y_board, dtype=float).ravel()
        if yk.shape != yb.shape:
            raise ValueError("y_kinect and y_board must be aligned (equal length)")
        if not (np.all(np.isfinite(yk)) and np.all(np.isfinite(yb)) and math.isfinite(cal.bfp)):
            raise DomainError("calibration", cal.bfp, "contains non-finite values")
        blocks.append(design_matrix(yk, cal.bfp))
        targets.append(yb if mode == REPLACEMENT else yk - yb)
    levels = {float(c.bfp) for c, blk in zip(calibration, blocks) if len(blk)}
    if len(levels) < 2:
        raise InsufficientDiversity(f"need at least 2 distinct BFP levels, got {len(levels)}")
    A = np.vstack(blocks)
    t = np.concatenate(targets)
    n = len(t)
    if n < 6:
        raise InsufficientDiversity(f"need at least 6 samples, got {n}")

    A_aug, t_aug = A, t
    if ridge > 0:
        A_aug = np.vstack([A, math.sqrt(ridge) * np.eye(6)])
        t_aug = np.concatenate([t, np.zeros(6)])
    scale = np.linalg.norm(A_aug, axis=0)
    scale[scale == 0] = 1.0
    As = A_aug / scale
    sv = np.linalg.svd(As, compute_uv=False)
    cond = math.inf if sv[-1] == 0 else float((sv[0] / sv[-1]) ** 2)
    if ridge == 0 and not cond < MAX_CONDITION:
        raise IllConditioned(cond)

    Q, R = np.linalg.qr(As)
    z = np.linalg.solve(R, Q.T @ t_aug)
    coeffs = z / scale
    rmse = float(np.sqrt(np.mean((t - A @ coeffs) ** 2)))
    return CorrectionModel(*coeffs.tolist(), mode=mode, reference_bfp=reference_bfp,
                           provenance=FITTED, diagnostics=FitDiagnostics(rmse, cond, n))


