"""Readers and writers for every on-disk artifact.

File formats (UTF-8, LF line endings, ``.`` decimal separator; floats are
written in shortest round-trip form so write -> read is lossless):

skeleton CSV
    ``t,joint,state,px,py,pz``; one joint per row, rows of one frame are
    contiguous, frame timestamps strictly increasing. ``state`` is one of
    ``tracked``, ``inferred``, ``not_tracked``; positions may be empty for
    ``not_tracked`` joints. Positions are meters in the camera frame.
board CSV
    ``t,tl,tr,bl,br``; seconds and non-negative load units.
trajectory CSV
    ``t,x,y``; seconds and millimeters.
session manifest (JSON)
    ``format_version``, ``session_id``, ``profile``, ``skeleton_file``,
    ``board_file``, ``board_calibration``, ``segment_table``, ``notes``.
results
    ``summary.json`` and ``curves.csv`` (``t,err_x,err_y``).

Readers reject malformed input; errors carry the offending path and line.
"""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import NamedTuple, Optional

import numpy as np

from .anthro import SubjectProfile
from .bsip import BUILTIN_TABLES
from .errors import (
    DataFileError,
    DomainError,
    ManifestError,
    MalformedRow,
    NonMonotonicTime,
    UnknownJointName,
)
from .signal import BoardCalibration, ErrorStats, Trajectory2D
from .skeleton import JOINT_SET, NOT_TRACKED, TRACKING_STATES, Joint, SkeletonFrame, SkeletonSeries

MANIFEST_VERSION = "1.0.0"
RESULTS_VERSION = "1.0.0"
SKELETON_HEADER = ["t", "joint", "state", "px", "py", "pz"]
BOARD_HEADER = ["t", "tl", "tr", "bl", "br"]
TRAJECTORY_HEADER = ["t", "x", "y"]
CURVES_HEADER = ["t", "err_x", "err_y"]


def fmt(v) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(v))


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(path, text):
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataFileError(f"cannot write: {exc.strerror}", path) from exc


def file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _open_csv(path, header):
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFileError(f"cannot read: {exc.strerror}", path) from exc
    reader = csv.reader(fh)
    first = next(reader, None)
    if first != header:
        fh.close()
        raise MalformedRow(f"expected header {','.join(header)!r}, got {first!r}", path, 1)
    return fh, reader


def _float(text, path, line, name, allow_empty=False):
    if allow_empty and text == "":
        return math.nan
    try:
        v = float(text)
    except ValueError:
        raise MalformedRow(f"{name}: cannot parse {text!r} as a number", path, line) from None
    if not math.isfinite(v):
        raise MalformedRow(f"{name}: non-finite value {text!r}", path, line)
    return v


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    write_text(path, "\n".join(lines) + "\n")


# -- skeleton --------------------------------------------------------------

def read_skeleton(path) -> SkeletonSeries:
    fh, reader = _open_csv(path, SKELETON_HEADER)
    frames = []
    cur_t, cur = None, None
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 6:
                raise MalformedRow(f"expected 6 fields, got {len(row)}", path, line)
            t = _float(row[0], path, line, "t")
            name, state = row[1], row[2]
            if name not in JOINT_SET:
                raise UnknownJointName(f"unknown joint name {name!r}", path, line)
            if state not in TRACKING_STATES:
                raise MalformedRow(f"unknown tracking state {state!r}", path, line)
            empty_ok = state == NOT_TRACKED
            pos = np.array([_float(v, path, line, k, empty_ok) for k, v in zip("xyz", row[3:])])
            pos.flags.writeable = False
            if cur_t is None or t > cur_t:
                if cur is not None:
                    frames.append(SkeletonFrame(cur_t, MappingProxyType(cur)))
                cur_t, cur = t, {}
            elif t < cur_t:
                raise NonMonotonicTime(f"timestamp {row[0]} after {fmt(cur_t)}", path, line)
            if name in cur:
                raise MalformedRow(f"duplicate joint {name!r} at t={row[0]}", path, line)
            cur[name] = Joint(name, pos, state)
    if cur is not None:
        frames.append(SkeletonFrame(cur_t, MappingProxyType(cur)))
    return SkeletonSeries(frames)


def write_skeleton(series, path):
    rows = []
    for frame in series:
        for name, joint in frame.joints.items():
            if joint.tracking_state == NOT_TRACKED and not np.all(np.isfinite(joint.position)):
                coords = ["", "", ""]
            else:
                coords = [fmt(v) for v in joint.position]
            rows.append([fmt(frame.timestamp), name, joint.tracking_state, *coords])
    _write_csv(path, SKELETON_HEADER, rows)


# -- board -----------------------------------------------------------------

@dataclass(frozen=True)
class BoardSeries:
    """Raw four-cell load recording."""

    t: np.ndarray
    tl: np.ndarray
    tr: np.ndarray
    bl: np.ndarray
    br: np.ndarray

    def __len__(self):
        return len(self.t)


def read_board(path) -> BoardSeries:
    fh, reader = _open_csv(path, BOARD_HEADER)
    data = []
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 5:
                raise MalformedRow(f"expected 5 fields, got {len(row)}", path, line)
            vals = [_float(v, path, line, k) for k, v in zip(BOARD_HEADER, row)]
            if any(v < 0 for v in vals[1:]):
                raise MalformedRow("negative load value", path, line)
            if data and not vals[0] > data[-1][0]:
                raise NonMonotonicTime(f"timestamp {row[0]} not after {fmt(data[-1][0])}", path, line)
            data.append(vals)
    arr = np.array(data, dtype=float).reshape(-1, 5)
    return BoardSeries(*(arr[:, i].copy() for i in range(5)))


def write_board(board: BoardSeries, path):
    rows = ([fmt(v) for v in r] for r in zip(board.t, board.tl, board.tr, board.bl, board.br))
    _write_csv(path, BOARD_HEADER, rows)


# -- trajectories ----------------------------------------------------------

def read_trajectory(path, frame="board") -> Trajectory2D:
    fh, reader = _open_csv(path, TRAJECTORY_HEADER)
    data = []
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 3:
                raise MalformedRow(f"expected 3 fields, got {len(row)}", path, line)
            vals = [_float(v, path, line, k) for k, v in zip(TRAJECTORY_HEADER, row)]
            if data and not vals[0] > data[-1][0]:
                raise NonMonotonicTime(f"timestamp {row[0]} not after {fmt(data[-1][0])}", path, line)
            data.append(vals)
    arr = np.array(data, dtype=float).reshape(-1, 3)
    return Trajectory2D(arr[:, 0], arr[:, 1], arr[:, 2], frame=frame)


def write_trajectory(traj: Trajectory2D, path):
    rows = ([fmt(t), fmt(x), fmt(y)] for t, x, y in zip(traj.t, traj.x, traj.y))
    _write_csv(path, TRAJECTORY_HEADER, rows)


# -- manifests -------------------------------------------------------------

@dataclass
class SessionManifest:
    session_id: str
    profile: SubjectProfile
    skeleton_file: str
    board_file: str
    board_calibration: BoardCalibration
    segment_table: str
    notes: str = ""
    format_version: str = MANIFEST_VERSION
    base_dir: Path = field(default=Path("."), compare=False)

    def resolve(self, rel) -> Path:
        return self.base_dir / rel

    @property
    def segment_table_source(self):
        if self.segment_table in BUILTIN_TABLES:
            return self.segment_table
        return str(self.resolve(self.segment_table))

    def to_dict(self):
        return {
            "format_version": self.format_version,
            "session_id": self.session_id,
            "profile": self.profile.to_dict(),
            "skeleton_file": self.skeleton_file,
            "board_file": self.board_file,
            "board_calibration": self.board_calibration.to_dict(),
            "segment_table": self.segment_table,
            "notes": self.notes,
        }


def _check_version(v, path):
    parts = str(v).split(".")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ManifestError(f"format_version {v!r} is not a semver string", path)
    if parts[0] != MANIFEST_VERSION.split(".")[0]:
        raise ManifestError(f"unsupported format_version {v!r} (expected {MANIFEST_VERSION})", path)


def read_manifest(path) -> SessionManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text("utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc.strerror}", path) from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}", path) from exc
    required = {"format_version", "session_id", "profile", "skeleton_file", "board_file",
                "board_calibration", "segment_table"}
    if not isinstance(doc, dict) or required - set(doc):
        missing = sorted(required - set(doc)) if isinstance(doc, dict) else sorted(required)
        raise ManifestError(f"manifest missing keys {missing}", path)
    _check_version(doc["format_version"], path)
    try:
        profile = SubjectProfile.from_dict(doc["profile"])
    except (DomainError, TypeError) as exc:
        raise ManifestError(f"invalid profile: {exc}", path) from exc
    manifest = SessionManifest(
        session_id=str(doc["session_id"]),
        profile=profile,
        skeleton_file=doc["skeleton_file"],
        board_file=doc["board_file"],
        board_calibration=BoardCalibration.from_dict(doc["board_calibration"]),
        segment_table=doc["segment_table"],
        notes=doc.get("notes", ""),
        format_version=doc["format_version"],
        base_dir=path.parent,
    )
    files = [manifest.skeleton_file, manifest.board_file]
    if manifest.segment_table not in BUILTIN_TABLES:
        files.append(manifest.segment_table)
    for rel in files:
        if not manifest.resolve(rel).is_file():
            raise ManifestError(f"referenced file not found: {manifest.resolve(rel)}", path)
    return manifest


def write_manifest(manifest: SessionManifest, path):
    write_text(path, dump_json(manifest.to_dict()))


# -- results ---------------------------------------------------------------

class Curves(NamedTuple):
    t: np.ndarray
    err_x: np.ndarray
    err_y: np.ndarray


def write_results(stats, curves: Curves, path, run: Optional[dict] = None):
    """Write ``summary.json`` and ``curves.csv`` into directory ``path``.

    ``run`` carries configuration and input checksums; it is embedded
    verbatim together with the checksum of the curves file.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataFileError(f"cannot create results directory: {exc.strerror}", out) from exc
    rows = ([fmt(t), fmt(x), fmt(y)] for t, x, y in zip(curves.t, curves.err_x, curves.err_y))
    _write_csv(out / "curves.csv", CURVES_HEADER, rows)
    summary = {
        "format_version": RESULTS_VERSION,
        "stats": [s.to_dict() for s in stats],
        "curves_sha256": file_checksum(out / "curves.csv"),
        "run": run,
    }
    write_text(out / "summary.json", dump_json(summary))


def read_results(path):
    """Inverse of :func:`write_results`; returns ``(stats, curves, run)``."""
    out = Path(path)
    try:
        summary = json.loads((out / "summary.json").read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFileError(f"cannot read summary.json: {exc}", out) from exc
    stats = [ErrorStats.from_dict(s) for s in summary["stats"]]
    fh, reader = _open_csv(out / "curves.csv", CURVES_HEADER)
    data = []
    with fh:
        for row in reader:
            if len(row) != 3:
                raise MalformedRow(f"expected 3 fields, got {len(row)}", out / "curves.csv", reader.line_num)
            data.append([_float(v, out / "curves.csv", reader.line_num, k) for k, v in zip(CURVES_HEADER, row)])
    arr = np.array(data, dtype=float).reshape(-1, 3)
    return stats, Curves(arr[:, 0], arr[:, 1], arr[:, 2]), summary.get("run")
