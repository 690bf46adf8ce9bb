import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from gesture_synth.export import (
    AIM_CHILD,
    EULER_ORDER,
    PARENTS,
    bvh_offsets,
    export_motion,
    hierarchy_order,
    load_motion_json,
)
from gesture_synth.motion import DEFAULT_SKELETON, MotionClip, Skeleton

from conftest import random_clip


def parse_bvh(path):
    """Minimal BVH reader: joint order, offsets, channel counts, frame count, frame time, values."""
    lines = path.read_text().splitlines()
    joints, offsets, counts, stack = [], {}, {}, []
    i = 0
    while lines[i].strip() != "MOTION":
        tok = lines[i].split()
        if tok[0] in ("ROOT", "JOINT"):
            joints.append(tok[1])
            stack.append(tok[1])
        elif tok[0] == "End":
            stack.append(None)
        elif tok[0] == "OFFSET" and stack[-1] is not None:
            offsets[stack[-1]] = np.array([float(v) for v in tok[1:]])
        elif tok[0] == "CHANNELS":
            counts[stack[-1]] = int(tok[1])
        elif tok[0] == "}":
            stack.pop()
        i += 1
    n_frames = int(lines[i + 1].split(":")[1])
    frame_time = float(lines[i + 2].split(":")[1])
    values = np.array([[float(v) for v in ln.split()] for ln in lines[i + 3:] if ln.strip()])
    return joints, offsets, counts, n_frames, frame_time, values


def forward_kinematics(joints, offsets, row):
    """World positions from one BVH frame (root ZXY rotation after XYZ position)."""
    pos, rot = {}, {}
    k = 0
    for name in joints:
        if name == "neck":
            pos[name] = row[0:3]
            rot[name] = Rotation.from_euler(EULER_ORDER, row[3:6], degrees=True)
            k = 6
            continue
        parent = PARENTS[name]
        local = Rotation.from_euler(EULER_ORDER, row[k:k + 3], degrees=True)
        k += 3
        pos[name] = pos[parent] + rot[parent].apply(offsets[name])
        rot[name] = rot[parent] * local
    return pos


class TestJson:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        # full-precision random floats survive the text round trip exactly
        clip = random_clip(rng, 17, fps=29.97).with_keyframes([3, 9])
        back = load_motion_json(export_motion(clip, tmp_path / "m.json"))
        assert back.frames.tobytes() == clip.frames.tobytes()
        assert back.fps == clip.fps and back.keyframes == clip.keyframes

    def test_joint_name_mismatch(self, tmp_path):
        clip = random_clip(np.random.default_rng(1), 5)
        path = export_motion(clip, tmp_path / "m.json")
        other = Skeleton(DEFAULT_SKELETON.joint_names[::-1], DEFAULT_SKELETON.rest[::-1])
        with pytest.raises(ValueError):
            load_motion_json(path, other)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            export_motion(random_clip(np.random.default_rng(2), 5), tmp_path / "m.x", "fbx")

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            export_motion(random_clip(np.random.default_rng(3), 5), tmp_path / "missing" / "m.json")


class TestBvh:
    def test_header_and_frames(self, fixture_records, tmp_path):
        clip = fixture_records[0].clip
        joints, offsets, counts, n, ft, values = parse_bvh(export_motion(clip, tmp_path / "m.bvh", "bvh"))
        assert joints == hierarchy_order()
        assert set(joints) == set(DEFAULT_SKELETON.joint_names)
        assert n == clip.n_frames == values.shape[0]
        assert ft == pytest.approx(1 / clip.fps, abs=1e-6)
        assert values.shape[1] == sum(counts.values()) == 6 + 3 * 7

    def test_constant_pose_constant_channels(self, tmp_path):
        frames = np.repeat(DEFAULT_SKELETON.rest_pose()[None], 6, axis=0)
        _, _, _, _, _, values = parse_bvh(export_motion(MotionClip(frames, 25), tmp_path / "c.bvh", "bvh"))
        assert np.all(values == values[0])

    def test_forward_kinematics_reproduces_bone_directions(self, tmp_path):
        rng = np.random.default_rng(4)
        clip = random_clip(rng, 12, scale=0.6)
        joints, offsets, _, _, _, values = parse_bvh(export_motion(clip, tmp_path / "r.bvh", "bvh"))
        for f, row in enumerate(values):
            pos = forward_kinematics(joints, offsets, row)
            for joint, child in AIM_CHILD.items():
                want = clip.frames[f, DEFAULT_SKELETON.index(child)] - clip.frames[f, DEFAULT_SKELETON.index(joint)]
                got = pos[child] - pos[joint]
                cos = np.dot(want, got) / (np.linalg.norm(want) * np.linalg.norm(got))
                # six-decimal text output limits the angular precision
                assert cos > 1 - 1e-8

    def test_offsets_use_mean_bone_length(self, fixture_records):
        clip = fixture_records[0].clip
        off = bvh_offsets(clip)
        ix = DEFAULT_SKELETON.index
        length = np.linalg.norm(clip.frames[:, ix("r_wrist")] - clip.frames[:, ix("r_elbow")], axis=1).mean()
        assert np.linalg.norm(off["r_wrist"]) == pytest.approx(length)
