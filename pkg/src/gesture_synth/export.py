"""Writing generated motion to disk: lossless motion JSON and BVH."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .motion import DEFAULT_SKELETON, MotionClip, Skeleton

# Joint tree of the default skeleton; the neck is the root.
PARENTS = {
    "head": "neck",
    "r_shoulder": "neck",
    "r_elbow": "r_shoulder",
    "r_wrist": "r_elbow",
    "l_shoulder": "neck",
    "l_elbow": "l_shoulder",
    "l_wrist": "l_elbow",
}
# Child whose direction a joint's rotation aims at.
AIM_CHILD = {"r_shoulder": "r_elbow", "r_elbow": "r_wrist", "l_shoulder": "l_elbow", "l_elbow": "l_wrist"}
EULER_ORDER = "ZXY"


def save_motion_json(clip: MotionClip, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(clip.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_motion_json(path, skeleton: Skeleton | None = None) -> MotionClip:
    return MotionClip.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), skeleton)


def _children(name):
    return [c for c, p in PARENTS.items() if p == name]


def _aim(a: np.ndarray, b: np.ndarray) -> Rotation:
    """Shortest-arc rotation taking direction ``a`` onto direction ``b``."""
    a = a / np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if nb == 0:
        return Rotation.identity()
    b = b / nb
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, b))
    if s < 1e-12:
        if c > 0:
            return Rotation.identity()
        # Antiparallel: half-turn about any axis perpendicular to a.
        perp = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(perp) < 1e-6:
            perp = np.cross(a, [0.0, 1.0, 0.0])
        return Rotation.from_rotvec(np.pi * perp / np.linalg.norm(perp))
    return Rotation.from_rotvec(axis / s * np.arctan2(s, c))


def _torso_frame(pose: np.ndarray, ix) -> np.ndarray:
    """Orthonormal basis (columns x, y, z) from the shoulder line and the head."""
    x = pose[ix("l_shoulder")] - pose[ix("r_shoulder")]
    x = x / np.linalg.norm(x)
    up = pose[ix("head")] - pose[ix("neck")]
    z = np.cross(x, up)
    z = z / np.linalg.norm(z)
    y = np.cross(z, x)
    return np.stack([x, y, z], axis=1)


def bvh_offsets(clip: MotionClip) -> dict:
    """Fixed bone offsets: rest-pose directions scaled to the clip's mean bone lengths."""
    sk = clip.skeleton
    ix = sk.index
    rest = sk.rest_pose()
    offsets = {"neck": np.zeros(3)}
    for child, parent in PARENTS.items():
        length = np.linalg.norm(clip.frames[:, ix(child)] - clip.frames[:, ix(parent)], axis=1).mean()
        d = rest[ix(child)] - rest[ix(parent)]
        offsets[child] = d / np.linalg.norm(d) * length
    return offsets


def bvh_channels(clip: MotionClip) -> np.ndarray:
    """Per-frame channel values in hierarchy order.

    Root: X/Y/Z position then Z/X/Y rotation (degrees). Other joints: Z/X/Y
    rotation. Each arm joint is rotated so the bone to its child points where
    the data says; the root rotation follows the torso frame.
    """
    sk = clip.skeleton
    ix = sk.index
    rest = sk.rest_pose()
    rest_torso = _torso_frame(rest, ix)
    offsets = bvh_offsets(clip)
    order = hierarchy_order()
    rows = []
    for pose in clip.frames:
        world = {}
        root = Rotation.from_matrix(_torso_frame(pose, ix) @ rest_torso.T)
        world["neck"] = root
        values = list(pose[ix("neck")]) + list(root.as_euler(EULER_ORDER, degrees=True))
        for name in order[1:]:
            parent_rot = world[PARENTS[name]]
            if name in AIM_CHILD:
                child = AIM_CHILD[name]
                target = parent_rot.inv().apply(pose[ix(child)] - pose[ix(name)])
                local = _aim(offsets[child], target)
            else:
                local = Rotation.identity()
            world[name] = parent_rot * local
            values += list(local.as_euler(EULER_ORDER, degrees=True))
        rows.append(values)
    return np.array(rows)


def hierarchy_order() -> list[str]:
    order = []

    def visit(name):
        order.append(name)
        for c in _children(name):
            visit(c)

    visit("neck")
    return order


def save_bvh(clip: MotionClip, path) -> Path:
    if clip.skeleton.joint_names != DEFAULT_SKELETON.joint_names:
        raise ValueError("BVH export supports the default upper-body skeleton only")
    offsets = bvh_offsets(clip)
    lines = ["HIERARCHY"]

    def fmt(v):
        return " ".join(f"{x:.6f}" for x in v)

    def emit(name, depth):
        pad = "  " * depth
        if name == "neck":
            lines.append(f"{pad}ROOT {name}")
        else:
            lines.append(f"{pad}JOINT {name}")
        lines.append(pad + "{")
        lines.append(f"{pad}  OFFSET {fmt(offsets[name])}")
        if name == "neck":
            lines.append(f"{pad}  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation")
        else:
            lines.append(f"{pad}  CHANNELS 3 Zrotation Xrotation Yrotation")
        kids = _children(name)
        for c in kids:
            emit(c, depth + 1)
        if not kids:
            lines.append(f"{pad}  End Site")
            lines.append(pad + "  {")
            lines.append(f"{pad}    OFFSET 0.000000 0.000000 0.000000")
            lines.append(pad + "  }")
        lines.append(pad + "}")

    emit("neck", 0)
    channels = bvh_channels(clip)
    lines.append("MOTION")
    lines.append(f"Frames: {clip.n_frames}")
    lines.append(f"Frame Time: {1.0 / clip.fps:.6f}")
    for row in channels:
        lines.append(fmt(row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def export_motion(clip: MotionClip, path, fmt: str = "json") -> Path:
    if fmt == "json":
        return save_motion_json(clip, path)
    if fmt == "bvh":
        return save_bvh(clip, path)
    raise ValueError(f"unknown motion format {fmt!r}")
