"""Depth-camera skeleton data model (25-joint vocabulary)."""

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence

import numpy as np

JOINT_NAMES = (
    "spine_base", "spine_mid", "neck", "head",
    "shoulder_left", "elbow_left", "wrist_left", "hand_left",
    "shoulder_right", "elbow_right", "wrist_right", "hand_right",
    "hip_left", "knee_left", "ankle_left", "foot_left",
    "hip_right", "knee_right", "ankle_right", "foot_right",
    "spine_shoulder",
    "hand_tip_left", "thumb_left", "hand_tip_right", "thumb_right",
)
JOINT_SET = frozenset(JOINT_NAMES)

TRACKED = "tracked"
INFERRED = "inferred"
NOT_TRACKED = "not_tracked"
TRACKING_STATES = (TRACKED, INFERRED, NOT_TRACKED)


class Joint(NamedTuple):
    name: str
    position: np.ndarray
    tracking_state: str = TRACKED

    @property
    def usable(self) -> bool:
        return self.tracking_state != NOT_TRACKED


def make_joint(name, position, tracking_state=TRACKED):
    if name not in JOINT_SET:
        raise ValueError(f"unknown joint name {name!r}")
    if tracking_state not in TRACKING_STATES:
        raise ValueError(f"unknown tracking state {tracking_state!r}")
    pos = np.array(position, dtype=float).reshape(3)
    if tracking_state != NOT_TRACKED and not np.all(np.isfinite(pos)):
        raise ValueError(f"joint {name!r} is {tracking_state} but has non-finite position")
    pos.flags.writeable = False
    return Joint(name, pos, tracking_state)


@dataclass(frozen=True)
class SkeletonFrame:
    timestamp: float
    joints: Mapping[str, Joint]

    @classmethod
    def from_positions(cls, timestamp, positions, states=None):
        """Build a frame from ``{joint_name: xyz}`` and optional ``{joint_name: state}``."""
        states = states or {}
        joints = {n: make_joint(n, p, states.get(n, TRACKED)) for n, p in positions.items()}
        return cls(float(timestamp), MappingProxyType(joints))

    def positions(self):
        return {n: j.position for n, j in self.joints.items()}

    def map_positions(self, fn):
        """New frame with ``fn`` applied to every joint position."""
        joints = {
            n: make_joint(n, fn(j.position), j.tracking_state) for n, j in self.joints.items()
        }
        return SkeletonFrame(self.timestamp, MappingProxyType(joints))


@dataclass(frozen=True)
class SkeletonSeries:
    frames: Sequence[SkeletonFrame] = field(default_factory=tuple)

    def __post_init__(self):
        frames = tuple(self.frames)
        for prev, cur in zip(frames, frames[1:]):
            if not cur.timestamp > prev.timestamp:
                raise ValueError(
                    f"timestamps must be strictly increasing ({prev.timestamp!r} -> {cur.timestamp!r})"
                )
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def timestamps(self):
        return np.array([f.timestamp for f in self.frames], dtype=float)
