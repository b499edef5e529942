"""Per-session processing shared by ``compare`` and ``fit``.

read -> whole-body CoM -> board projection -> common-grid resampling ->
lag alignment -> shared normalization -> (correction) -> error statistics.
"""

import logging
from typing import NamedTuple, Optional

import numpy as np

from .anthro import profile_bfp
from .bsip import load_segment_table, series_com
from .correction import CorrectionModel, CalibrationSet, apply_correction
from .errors import FrameUnusable
from .io import Curves, SessionManifest, file_checksum, read_board, read_skeleton
from .signal import (
    AXES,
    Trajectory2D,
    align,
    cop_from_loads,
    distances,
    error_stats,
    estimate_lag,
    normalize,
    project_to_board,
    resample_common,
)

logger = logging.getLogger(__name__)


class PreparedSession(NamedTuple):
    manifest: SessionManifest
    board: Trajectory2D
    kinect: Trajectory2D
    lag_s: float
    frames_total: int
    frames_used: int
    inputs: dict


def board_trajectory(board_raw, cal) -> Trajectory2D:
    x, y = cop_from_loads(board_raw.tl, board_raw.tr, board_raw.bl, board_raw.br,
                          cal.half_length_mm, cal.half_width_mm)
    return Trajectory2D(board_raw.t, np.atleast_1d(x), np.atleast_1d(y))


def prepare_session(manifest: SessionManifest, config) -> PreparedSession:
    """Bring the Kinect CoM and the board CoP onto one normalized time grid.

    Board and Kinect are both normalized with the board's session statistics
    so that a systematic Kinect-to-board distance survives normalization.
    """
    table = load_segment_table(manifest.segment_table_source)
    skeleton = read_skeleton(manifest.resolve(manifest.skeleton_file))
    board_raw = read_board(manifest.resolve(manifest.board_file))

    t, com, quality = series_com(skeleton, table, config.missing_policy, config.inferred_penalty)
    keep = quality >= config.quality_threshold
    if not np.any(keep):
        raise FrameUnusable(
            f"session {manifest.session_id!r}: no frame reaches quality {config.quality_threshold}"
        )
    if not np.all(keep):
        logger.info("%s: dropped %d low-quality frames", manifest.session_id, int(np.sum(~keep)))
    kx, ky = project_to_board(com[keep], manifest.board_calibration)
    kinect = Trajectory2D(t[keep], np.atleast_1d(kx), np.atleast_1d(ky))
    board = board_trajectory(board_raw, manifest.board_calibration)

    kinect, board = resample_common(kinect, board, config.resample_rate_hz)
    lag = 0.0
    if config.lag_correction:
        # positive lag: the board trails the Kinect
        lag = estimate_lag(kinect, board, config.max_lag_s)
        board, kinect = align(board, kinect, lag)

    if manifest.profile.bfp is None:
        profile_bfp(manifest.profile, config.bmi_variant)
    kinect = normalize(kinect, config.normalization, reference=board)
    board = normalize(board, config.normalization)

    inputs = {
        "skeleton_sha256": file_checksum(manifest.resolve(manifest.skeleton_file)),
        "board_sha256": file_checksum(manifest.resolve(manifest.board_file)),
        "segment_table": manifest.segment_table,
        "segment_table_sha256": table.checksum,
    }
    return PreparedSession(manifest, board, kinect, lag, len(skeleton), int(np.sum(keep)), inputs)


def compare_prepared(prep: PreparedSession, model: Optional[CorrectionModel] = None):
    """Error statistics (x, y, euclidean) and per-sample curves of a session."""
    kinect = prep.kinect
    if model is not None:
        kinect = apply_correction(kinect, prep.manifest.profile, model)
    stats = [error_stats(prep.board, kinect, axis, prep.lag_s) for axis in AXES]
    curves = Curves(prep.board.t, distances(prep.board, kinect, "x"), distances(prep.board, kinect, "y"))
    return stats, curves


def calibration_set(prep: PreparedSession) -> CalibrationSet:
    return CalibrationSet(prep.kinect.y, prep.board.y, prep.manifest.profile.bfp)
