"""Poses, motion clips and the motion math used by every generator.

Coordinates are root-relative (neck at the origin) and scaled so that the
shoulder width is 1. Axes: +x is the speaker's left, +y is up, +z is forward.
A pose is a ``(J, 3)`` float array; a clip stacks ``T`` of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import ScalarSeries, extract_keyframes, gaussian_filter

__all__ = [
    "Skeleton",
    "DEFAULT_SKELETON",
    "MotionClip",
    "ScalarSeries",
    "pose_lerp",
    "motion_energy",
    "extract_keyframes",
    "gaussian_filter",
    "retime",
    "uniform_retime",
    "blend",
    "resample",
    "normalize_frames",
]

JOINT_NAMES = (
    "neck",
    "head",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
)

# Arms hanging, wrists straight below the shoulders.
REST_POSE = (
    (0.0, 0.0, 0.0),
    (0.0, 0.6, 0.0),
    (-0.5, -0.05, 0.0),
    (-0.55, -0.65, 0.0),
    (-0.55, -1.2, 0.05),
    (0.5, -0.05, 0.0),
    (0.55, -0.65, 0.0),
    (0.55, -1.2, 0.05),
)


@dataclass(frozen=True)
class Skeleton:
    """Joint naming and the canonical rest pose for one joint set."""

    joint_names: tuple = JOINT_NAMES
    rest: tuple = REST_POSE

    def __post_init__(self):
        if len(self.joint_names) != len(self.rest):
            raise ValueError("rest pose must list one point per joint")
        for name in ("neck", "r_shoulder", "r_wrist", "l_shoulder", "l_wrist"):
            if name not in self.joint_names:
                raise ValueError(f"skeleton is missing required joint {name!r}")

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    def index(self, name: str) -> int:
        return self.joint_names.index(name)

    def rest_pose(self) -> np.ndarray:
        return np.array(self.rest, dtype=float)

    def to_dict(self) -> dict:
        return {"joint_names": list(self.joint_names), "rest": [list(p) for p in self.rest]}

    @classmethod
    def from_dict(cls, d: dict) -> "Skeleton":
        return cls(tuple(d["joint_names"]), tuple(tuple(float(c) for c in p) for p in d["rest"]))


DEFAULT_SKELETON = Skeleton()


@dataclass(frozen=True, eq=False)
class MotionClip:
    """An immutable sequence of poses.

    Parameters
    ----------
    frames : array_like, shape (T, J, 3)
        Joint positions, T >= 2.
    fps : float
        Frames per second.
    keyframes : sequence of int
        Strictly increasing frame indices in ``[0, T-1]``; may be empty.
    skeleton : Skeleton
        Joint set the frames follow.
    """

    frames: np.ndarray
    fps: float = 25.0
    keyframes: tuple = ()
    skeleton: Skeleton = field(default=DEFAULT_SKELETON)

    def __post_init__(self):
        frames = np.array(self.frames, dtype=float)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise ValueError(f"frames must have shape (T, J, 3), got {frames.shape}")
        if frames.shape[0] < 2:
            raise ValueError("a motion clip needs at least 2 frames")
        if frames.shape[1] != self.skeleton.n_joints:
            raise ValueError(
                f"clip has {frames.shape[1]} joints, skeleton defines {self.skeleton.n_joints}"
            )
        if not np.all(np.isfinite(frames)):
            raise ValueError("joint coordinates must be finite")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        kf = tuple(int(k) for k in self.keyframes)
        if any(b <= a for a, b in zip(kf, kf[1:])):
            raise ValueError("keyframes must be strictly increasing")
        if kf and (kf[0] < 0 or kf[-1] > frames.shape[0] - 1):
            raise ValueError("keyframes out of range")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "keyframes", kf)

    def __len__(self):
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MotionClip):
            return NotImplemented
        return (
            self.fps == other.fps
            and self.keyframes == other.keyframes
            and self.skeleton == other.skeleton
            and np.array_equal(self.frames, other.frames)
        )

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def duration(self) -> float:
        return self.n_frames / self.fps

    def joint(self, name: str) -> np.ndarray:
        """Trajectory of one joint, shape (T, 3)."""
        return self.frames[:, self.skeleton.index(name)]

    def with_keyframes(self, keyframes) -> "MotionClip":
        return MotionClip(self.frames, self.fps, tuple(keyframes), self.skeleton)

    def to_dict(self) -> dict:
        """Motion JSON object: fps, joint_names, frames, keyframes."""
        return {
            "fps": self.fps,
            "joint_names": list(self.skeleton.joint_names),
            "frames": self.frames.tolist(),
            "keyframes": list(self.keyframes),
        }

    @classmethod
    def from_dict(cls, d: dict, skeleton: Skeleton | None = None) -> "MotionClip":
        names = tuple(d["joint_names"])
        if skeleton is None:
            skeleton = DEFAULT_SKELETON
        if names != skeleton.joint_names:
            raise ValueError(f"joint names {names} do not match skeleton {skeleton.joint_names}")
        return cls(np.array(d["frames"], dtype=float), d["fps"], tuple(d.get("keyframes", ())), skeleton)


def pose_lerp(a, b, t: float) -> np.ndarray:
    """Joint-wise ``(1 - t) * a + t * b``; exact at ``t`` of 0 or 1 and when ``a == b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"pose shapes differ: {a.shape} vs {b.shape}")
    if t == 1:
        return b.copy()
    return a + t * (b - a)


def motion_energy(clip: MotionClip) -> ScalarSeries:
    """Squared wrist speed summed over both hands, one value per frame.

    ``value[t] = sum_w |p_w(t) - p_w(t-1)|^2 * fps^2`` for ``t >= 1``, and the
    first value repeats the second.
    """
    if clip.n_frames < 2:
        raise ValueError("motion energy needs at least 2 frames")
    sk = clip.skeleton
    wrists = clip.frames[:, [sk.index("r_wrist"), sk.index("l_wrist")]]
    step = np.diff(wrists, axis=0) * clip.fps
    energy = np.sum(step**2, axis=(1, 2))
    return ScalarSeries(clip.fps, np.concatenate([energy[:1], energy]))


def _sample(frames: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Linearly interpolate ``frames`` at fractional frame ``positions``."""
    last = frames.shape[0] - 1
    positions = np.clip(positions, 0.0, last)
    lo = np.floor(positions).astype(int)
    hi = np.minimum(lo + 1, last)
    t = (positions - lo)[:, None, None]
    a = frames[lo]
    return a + t * (frames[hi] - a)


def retime(clip: MotionClip, src_keyframes, dst_times, total_frames: int) -> MotionClip:
    """Warp ``clip`` so each source keyframe lands on its destination frame.

    The time map is piecewise linear through ``(0, 0)``, each
    ``(src_k, dst_k)`` and ``(T-1, total_frames-1)``. Output frame ``f``
    samples the source at the inverse map of ``f``. At integer destination
    times the output pose equals the source keyframe pose exactly.

    Raises
    ------
    ValueError
        If the anchor lists differ in length, are not strictly increasing, or
        collide with the clip endpoints.
    """
    src = [float(s) for s in src_keyframes]
    dst = [float(d) for d in dst_times]
    if len(src) != len(dst):
        raise ValueError("src_keyframes and dst_times must have equal length")
    if total_frames < 2:
        raise ValueError("total_frames must be at least 2")
    src_anchor = np.array([0.0, *src, clip.n_frames - 1.0])
    dst_anchor = np.array([0.0, *dst, total_frames - 1.0])
    if np.any(np.diff(src_anchor) <= 0) or np.any(np.diff(dst_anchor) <= 0):
        raise ValueError("anchors must be strictly increasing and strictly inside the clip")

    out_idx = np.arange(total_frames, dtype=float)
    positions = np.interp(out_idx, dst_anchor, src_anchor)
    # np.interp is exact at knots only up to rounding; pin integer anchors.
    for s, d in zip(src_anchor, dst_anchor):
        if d == int(d):
            positions[int(d)] = s
    frames = _sample(clip.frames, positions)
    keyframes = tuple(int(round(d)) for d in dst)
    return MotionClip(frames, clip.fps, keyframes, clip.skeleton)


def uniform_retime(clip: MotionClip, total_frames: int) -> MotionClip:
    """Stretch or squeeze a clip linearly to ``total_frames``; keyframes are rescaled."""
    if total_frames == clip.n_frames:
        return clip
    out = retime(clip, [], [], total_frames)
    scale = (total_frames - 1) / (clip.n_frames - 1)
    keys = sorted({int(round(k * scale)) for k in clip.keyframes})
    return out.with_keyframes(keys)


def fit_length(clip: MotionClip, total_frames: int, max_speedup: float = np.inf) -> MotionClip:
    """Uniformly retime to ``total_frames`` without playing faster than ``max_speedup``.

    If the clip would have to be sped up more than that, a centered window of
    it is used instead, so only the middle of the gesture is played.
    """
    ratio = (clip.n_frames - 1) / (total_frames - 1) if total_frames > 1 else np.inf
    if ratio <= max_speedup:
        return uniform_retime(clip, total_frames)
    width = max(2, int(np.floor(max_speedup * (total_frames - 1))) + 1)
    start = (clip.n_frames - width) // 2
    keys = [k - start for k in clip.keyframes if start <= k < start + width]
    window = MotionClip(clip.frames[start:start + width], clip.fps, keys, clip.skeleton)
    return uniform_retime(window, total_frames)


def max_displacement(clip: MotionClip) -> float:
    """Largest single-frame joint displacement in the clip."""
    return float(np.linalg.norm(np.diff(clip.frames, axis=0), axis=2).max())


def blend(prev: MotionClip, nxt: MotionClip, transition_frames: int) -> MotionClip:
    """Concatenate two clips with a linearly interpolated bridge.

    Bridge frame ``k`` (1-based) is ``pose_lerp(last(prev), first(nxt), k / (n + 1))``.
    Keyframes of both clips are carried over at their new positions.
    """
    if transition_frames < 0:
        raise ValueError("transition_frames must be >= 0")
    if prev.fps != nxt.fps:
        raise ValueError(f"fps mismatch: {prev.fps} vs {nxt.fps}")
    if prev.skeleton != nxt.skeleton:
        raise ValueError("skeleton mismatch")
    a = prev.frames[-1]
    b = nxt.frames[0]
    ts = np.arange(1, transition_frames + 1) / (transition_frames + 1)
    bridge = a + ts[:, None, None] * (b - a)
    frames = np.concatenate([prev.frames, bridge.reshape(-1, *a.shape), nxt.frames])
    offset = prev.n_frames + transition_frames
    keys = prev.keyframes + tuple(k + offset for k in nxt.keyframes)
    return MotionClip(frames, prev.fps, keys, prev.skeleton)


def resample(clip: MotionClip, new_fps: float) -> MotionClip:
    """Change the frame rate, keeping the duration ``T / fps`` within one output frame.

    Output frame ``i`` samples the source at time ``i / new_fps`` (clamped to
    the last source frame).
    """
    if not new_fps > 0:
        raise ValueError("new_fps must be positive")
    if new_fps == clip.fps:
        return clip
    ratio = new_fps / clip.fps
    n_out = max(2, int(round(clip.n_frames * ratio)))
    positions = np.arange(n_out) / ratio
    frames = _sample(clip.frames, positions)
    keys = sorted({min(n_out - 1, int(round(k * ratio))) for k in clip.keyframes})
    return MotionClip(frames, new_fps, keys, clip.skeleton)


def normalize_frames(frames, skeleton: Skeleton = DEFAULT_SKELETON) -> np.ndarray:
    """Make frames root-relative and scale them to unit mean shoulder width.

    Already-normalized input is returned bit-for-bit unchanged.
    """
    frames = np.array(frames, dtype=float)
    neck = frames[:, skeleton.index("neck")][:, None, :]
    if np.any(neck != 0):
        frames = frames - neck
    width = np.linalg.norm(
        frames[:, skeleton.index("l_shoulder")] - frames[:, skeleton.index("r_shoulder")], axis=1
    ).mean()
    if width > 0 and abs(width - 1.0) > 1e-9:
        frames = frames / width
    return frames
