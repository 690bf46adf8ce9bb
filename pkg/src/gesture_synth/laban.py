"""Labanotation-style arm symbols for matching poses at gesture boundaries.

Each arm is reduced to a direction (eight horizontal sectors or ``Place``)
and a level (High / Middle / Low) from the shoulder-to-wrist vector.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .motion import DEFAULT_SKELETON, Skeleton, normalize_frames

LEVEL_BAND_DEG = 30.0
PLACE_RADIUS = 0.15


class Direction(enum.Enum):
    # Ring order, counter-clockwise seen from above; value is the ring slot.
    Forward = 0
    ForwardLeft = 1
    Left = 2
    BackwardLeft = 3
    Backward = 4
    BackwardRight = 5
    Right = 6
    ForwardRight = 7
    Place = 8


class Level(enum.Enum):
    Low = 0
    Middle = 1
    High = 2


@dataclass(frozen=True)
class ArmSymbol:
    direction: Direction
    level: Level
    # Row of the precomputed distance table; derived, not compared.
    code: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "code", self.direction.value * len(Level) + self.level.value)

    def __str__(self):
        return f"{self.direction.name}/{self.level.name}"


@dataclass(frozen=True)
class LabanPose:
    left: ArmSymbol
    right: ArmSymbol

    def __str__(self):
        return f"L:{self.left} R:{self.right}"

    @classmethod
    def parse(cls, text: str) -> "LabanPose":
        """Inverse of ``str``: ``"L:Forward/Middle R:Place/Low"``."""
        m = re.fullmatch(r"\s*L:(\w+)/(\w+)\s+R:(\w+)/(\w+)\s*", text)
        if m is None:
            raise ValueError(f"not a labanotation pose: {text!r}")
        try:
            left = ArmSymbol(Direction[m[1]], Level[m[2]])
            right = ArmSymbol(Direction[m[3]], Level[m[4]])
        except KeyError as e:
            raise ValueError(f"unknown labanotation symbol {e} in {text!r}") from None
        return cls(left, right)


def _arm_symbol(v: np.ndarray) -> ArmSymbol:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return ArmSymbol(Direction.Place, Level.Low)
    horiz = math.hypot(v[0], v[2])
    elevation = math.degrees(math.atan2(v[1], horiz))
    if elevation > LEVEL_BAND_DEG:
        level = Level.High
    elif elevation < -LEVEL_BAND_DEG:
        level = Level.Low
    else:
        level = Level.Middle
    if horiz < PLACE_RADIUS:
        return ArmSymbol(Direction.Place, level)
    # Azimuth measured from forward (+z) towards the speaker's left (+x).
    azimuth = math.degrees(math.atan2(v[0], v[2])) % 360.0
    sector = int(((azimuth + 22.5) % 360.0) // 45.0)
    return ArmSymbol(Direction(sector), level)


def encode(pose, skeleton: Skeleton = DEFAULT_SKELETON) -> LabanPose:
    """Quantize the arms of one pose.

    The pose is first made root-relative and scaled to unit shoulder width,
    so the result does not depend on global translation or uniform scale.
    """
    p = np.asarray(pose, dtype=float)
    if p.shape != (skeleton.n_joints, 3):
        raise ValueError(f"pose must have shape ({skeleton.n_joints}, 3), got {p.shape}")
    p = normalize_frames(p[None], skeleton)[0]
    ix = skeleton.index
    right = _arm_symbol(p[ix("r_wrist")] - p[ix("r_shoulder")])
    left = _arm_symbol(p[ix("l_wrist")] - p[ix("l_shoulder")])
    return LabanPose(left, right)


def direction_distance(a: Direction, b: Direction) -> int:
    """Steps around the eight-sector ring; Place sits two steps from every sector."""
    if a == b:
        return 0
    if Direction.Place in (a, b):
        return 2
    d = abs(a.value - b.value) % 8
    return min(d, 8 - d)


def _arm_distance(a: ArmSymbol, b: ArmSymbol) -> int:
    return direction_distance(a.direction, b.direction) + abs(a.level.value - b.level.value)


_ALL_ARMS = sorted((ArmSymbol(d, lv) for d in Direction for lv in Level), key=lambda s: s.code)
_ARM_TABLE = [[_arm_distance(a, b) for b in _ALL_ARMS] for a in _ALL_ARMS]


def arm_distance(a: ArmSymbol, b: ArmSymbol) -> int:
    return _ARM_TABLE[a.code][b.code]


def distance(a: LabanPose, b: LabanPose) -> int:
    """Symbol distance summed over both arms; a metric on ``LabanPose``."""
    return arm_distance(a.left, b.left) + arm_distance(a.right, b.right)


REST = encode(DEFAULT_SKELETON.rest_pose())
