"""Segmental (kinematic) whole-body center of mass.

Each segment's CoM lies a fixed fraction ``com_ratio`` of the way from its
proximal to its distal joint; the body CoM is the mass-fraction weighted
mean of the segment CoMs.

Segment tables are JSON files with schema::

    {"variant": "male" | "female" | "neutral",
     "source": "<citation>",
     "segments": [{"name", "proximal", "distal", "mass_fraction",
                   "com_ratio", "side"}, ...],
     "checksum": "<sha256 hex, optional>"}

The checksum is the SHA-256 of the canonical serialization (UTF-8, sorted
keys, two-space indent, LF line endings, trailing newline) of the table
without its ``checksum`` key.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Tuple

import numpy as np

from .errors import (
    FrameUnusable,
    SchemaError,
    SegmentUnavailable,
    SumError,
    UnknownJointError,
)
from .skeleton import INFERRED, JOINT_SET, SkeletonFrame

VARIANTS = ("male", "female", "neutral")
SIDES = ("left", "right", "axial")
BUILTIN_TABLES = ("deleva-male", "deleva-female", "deleva-neutral")
SUM_TOLERANCE = 1e-9

RENORMALIZE = "renormalize"
FAIL = "fail"
POLICIES = (RENORMALIZE, FAIL)


@dataclass(frozen=True)
class SegmentDefinition:
    name: str
    proximal: str
    distal: str
    mass_fraction: float
    com_ratio: float
    side: str = "axial"

    def to_dict(self):
        return {
            "name": self.name,
            "proximal": self.proximal,
            "distal": self.distal,
            "mass_fraction": self.mass_fraction,
            "com_ratio": self.com_ratio,
            "side": self.side,
        }


@dataclass(frozen=True)
class SegmentTable:
    variant: str
    segments: Tuple[SegmentDefinition, ...]
    source: str
    checksum: str

    def to_dict(self, with_checksum=True):
        d = {
            "variant": self.variant,
            "source": self.source,
            "segments": [s.to_dict() for s in self.segments],
        }
        if with_checksum:
            d["checksum"] = self.checksum
        return d

    @property
    def mass_fractions(self):
        return np.array([s.mass_fraction for s in self.segments])


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def table_checksum(d) -> str:
    body = {k: v for k, v in d.items() if k != "checksum"}
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def _real(d, key, where):
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(f"{where}: {key!r} must be a finite number, got {v!r}")
    return float(v)


def table_from_dict(d) -> SegmentTable:
    """Validate a parsed segment-table document."""
    if not isinstance(d, dict):
        raise SchemaError("segment table must be a JSON object")
    extra = set(d) - {"variant", "source", "segments", "checksum"}
    if extra:
        raise SchemaError(f"unexpected keys {sorted(extra)}")
    variant = d.get("variant")
    if variant not in VARIANTS:
        raise SchemaError(f"variant must be one of {VARIANTS}, got {variant!r}")
    source = d.get("source")
    if not isinstance(source, str):
        raise SchemaError("source must be a string")
    raw = d.get("segments")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("segments must be a non-empty list")

    segments = []
    names = set()
    for i, s in enumerate(raw):
        where = f"segments[{i}]"
        if not isinstance(s, dict):
            raise SchemaError(f"{where} must be an object")
        missing = {"name", "proximal", "distal", "mass_fraction", "com_ratio", "side"} - set(s)
        if missing:
            raise SchemaError(f"{where} missing keys {sorted(missing)}")
        name = s["name"]
        if not isinstance(name, str) or name in names:
            raise SchemaError(f"{where}: segment name {name!r} is not a unique string")
        names.add(name)
        for key in ("proximal", "distal"):
            if s[key] not in JOINT_SET:
                raise UnknownJointError(s[key], f" in {where}.{key}")
        if s["proximal"] == s["distal"]:
            raise SchemaError(f"{where}: proximal and distal joints coincide")
        mass = _real(s, "mass_fraction", where)
        ratio = _real(s, "com_ratio", where)
        if not 0 < mass < 1 and not (mass == 1 and len(raw) == 1):
            raise SchemaError(f"{where}: mass_fraction {mass!r} outside (0, 1)")
        if not 0 <= ratio <= 1:
            raise SchemaError(f"{where}: com_ratio {ratio!r} outside [0, 1]")
        if s["side"] not in SIDES:
            raise SchemaError(f"{where}: side must be one of {SIDES}")
        segments.append(SegmentDefinition(name, s["proximal"], s["distal"], mass, ratio, s["side"]))

    total = math.fsum(s.mass_fraction for s in segments)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumError(total)

    checksum = table_checksum(d)
    if "checksum" in d and d["checksum"] != checksum:
        raise SchemaError(f"checksum mismatch: file says {d['checksum']}, content hashes to {checksum}")
    return SegmentTable(variant, tuple(segments), source, checksum)


def load_segment_table(source) -> SegmentTable:
    """Load a built-in table (``deleva-male``...) or a JSON file path."""
    if isinstance(source, str) and source in BUILTIN_TABLES:
        text = resources.files("combalance.data").joinpath(f"{source}.json").read_text("utf-8")
    else:
        path = Path(source)
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read segment table {str(path)!r}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"segment table is not valid JSON: {exc}") from exc
    return table_from_dict(doc)


def builtin_table_for(sex: str) -> str:
    return {"male": "deleva-male", "female": "deleva-female"}.get(sex, "deleva-neutral")


def segment_com(frame: SkeletonFrame, seg: SegmentDefinition) -> np.ndarray:
    """Point ``com_ratio`` of the way from the proximal to the distal joint."""
    for name in (seg.proximal, seg.distal):
        joint = frame.joints.get(name)
        if joint is None or not joint.usable:
            raise SegmentUnavailable(seg.name, name)
    p = frame.joints[seg.proximal].position
    d = frame.joints[seg.distal].position
    return p + seg.com_ratio * (d - p)


class BodyCoM(NamedTuple):
    position: np.ndarray
    quality: float


def whole_body_com(frame, table, policy=RENORMALIZE, inferred_penalty=0.5) -> BodyCoM:
    """Mass-weighted mean of the available segment CoMs.

    With ``policy="renormalize"`` unavailable segments are dropped and the
    remaining weights rescaled to sum to one; ``policy="fail"`` re-raises
    :class:`SegmentUnavailable`. The quality score is the sum of the table
    mass fractions of the segments used, where a segment with an inferred
    endpoint counts ``1 - inferred_penalty`` of its fraction. The penalty
    never affects the CoM weights.
    """
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    coms, weights, quality = [], [], 0.0
    for seg in table.segments:
        try:
            coms.append(segment_com(frame, seg))
        except SegmentUnavailable:
            if policy == FAIL:
                raise
            continue
        weights.append(seg.mass_fraction)
        inferred = INFERRED in (frame.joints[seg.proximal].tracking_state,
                                frame.joints[seg.distal].tracking_state)
        quality += seg.mass_fraction * (1.0 - inferred_penalty if inferred else 1.0)
    if not coms:
        raise FrameUnusable(f"no computable segment at t={frame.timestamp!r}")
    w = np.array(weights)
    if len(coms) < len(table.segments):
        w = w / w.sum()
    return BodyCoM(w @ np.array(coms), quality)


def series_com(series, table, policy=RENORMALIZE, inferred_penalty=0.5, skip_unusable=True):
    """CoM and quality for every frame of a series.

    Returns ``(t, com, quality)`` arrays; frames with no computable segment
    are dropped when ``skip_unusable`` is true.
    """
    ts, coms, qs = [], [], []
    for frame in series:
        try:
            c = whole_body_com(frame, table, policy, inferred_penalty)
        except FrameUnusable:
            if not skip_unusable:
                raise
            continue
        ts.append(frame.timestamp)
        coms.append(c.position)
        qs.append(c.quality)
    return np.array(ts, dtype=float), np.array(coms, dtype=float).reshape(-1, 3), np.array(qs)
