import itertools

import numpy as np
import pytest

from gesture_synth.laban import (
    REST,
    ArmSymbol,
    Direction,
    LabanPose,
    Level,
    arm_distance,
    direction_distance,
    distance,
    encode,
)
from gesture_synth.motion import DEFAULT_SKELETON

SK = DEFAULT_SKELETON
ARMS = [ArmSymbol(d, lv) for d in Direction for lv in Level]
RING = [d for d in Direction if d is not Direction.Place]


def pose_with_arms(right=None, left=None):
    """Rest pose with the wrists placed at shoulder + the given offsets."""
    p = SK.rest_pose().copy()
    if right is not None:
        p[SK.index("r_wrist")] = p[SK.index("r_shoulder")] + np.asarray(right, float)
    if left is not None:
        p[SK.index("l_wrist")] = p[SK.index("l_shoulder")] + np.asarray(left, float)
    return p


def sym(d, lv="Middle"):
    return ArmSymbol(Direction[d], Level[lv])


class TestEncode:
    def test_hanging_arms(self):
        pose = pose_with_arms(right=[0, -0.6, 0], left=[0, -0.6, 0])
        assert encode(pose) == LabanPose(sym("Place", "Low"), sym("Place", "Low"))

    def test_forward_shoulder_height(self):
        assert encode(pose_with_arms(right=[0, 0, 0.6])).right == sym("Forward", "Middle")

    def test_up_and_right(self):
        # the speaker's right is -x
        assert encode(pose_with_arms(right=[-0.5, 0.5, 0])).right == sym("Right", "High")

    def test_rest_pose(self):
        assert REST == LabanPose(sym("Place", "Low"), sym("Place", "Low"))

    def test_degenerate_arm(self):
        assert encode(pose_with_arms(right=[0, 0, 0])).right == sym("Place", "Low")

    def test_all_sectors(self):
        for d in RING:
            az = np.radians(45.0 * d.value)
            # sector centre, and a point 20 degrees off centre
            for off in (0.0, np.radians(20)):
                v = [0.6 * np.sin(az + off), 0.0, 0.6 * np.cos(az + off)]
                assert encode(pose_with_arms(left=v)).left == ArmSymbol(d, Level.Middle)

    def test_level_bands(self):
        for deg, lv in [(29, "Middle"), (31, "High"), (-29, "Middle"), (-31, "Low")]:
            a = np.radians(deg)
            v = [0.0, 0.6 * np.sin(a), 0.6 * np.cos(a)]
            assert encode(pose_with_arms(right=v)).right == sym("Forward", lv)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            encode(np.zeros((7, 3)))

    def test_translation_and_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            pose = SK.rest_pose() + rng.normal(0, 0.4, size=(8, 3))
            base = encode(pose)
            shift = rng.uniform(-10, 10, size=3)
            scale = float(np.exp(rng.uniform(-3, 3)))
            assert encode(pose + shift) == base
            assert encode(pose * scale) == base
            assert encode((pose + shift) * scale) == base


class TestDistance:
    def test_identical(self):
        p = LabanPose(sym("Left", "High"), sym("Place", "Low"))
        assert distance(p, p) == 0

    def test_level_step(self):
        a = LabanPose(sym("Forward"), sym("Forward", "Middle"))
        b = LabanPose(sym("Forward"), sym("Forward", "High"))
        assert distance(a, b) == 1

    def test_forward_backward(self):
        a = LabanPose(sym("Forward"), sym("Forward"))
        b = LabanPose(sym("Forward"), sym("Backward"))
        assert distance(a, b) == 4

    def test_ring_oracle(self):
        # walk the ring both ways and take the shorter walk
        for a, b in itertools.product(RING, RING):
            cw = next(k for k in range(8) if (a.value + k) % 8 == b.value)
            assert direction_distance(a, b) == min(cw, 8 - cw)

    def test_place(self):
        assert direction_distance(Direction.Place, Direction.Place) == 0
        assert all(direction_distance(Direction.Place, d) == 2 for d in RING)

    def test_place_at_one_would_not_be_metric(self):
        # Forward -> Place -> Backward would be 2 < 4 with Place one step from every sector
        def d1(a, b):
            if Direction.Place in (a, b) and a != b:
                return 1
            return direction_distance(a, b)

        f, p, b = Direction.Forward, Direction.Place, Direction.Backward
        assert d1(f, b) > d1(f, p) + d1(p, b)
        assert direction_distance(f, b) <= direction_distance(f, p) + direction_distance(p, b)

    def test_arm_metric_exhaustive(self):
        n = len(ARMS)
        d = np.array([[arm_distance(a, b) for b in ARMS] for a in ARMS])
        assert n == 27
        assert np.array_equal(d, d.T)
        assert np.all((d == 0) == np.eye(n, dtype=bool))
        # d[i, k] <= d[i, j] + d[j, k] for every triple
        assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :])

    def test_pose_metric_exhaustive(self):
        poses = [LabanPose(a, b) for a in ARMS for b in ARMS]
        d = np.array([[distance(p, q) for q in poses] for p in poses])
        assert np.array_equal(d, d.T)
        assert np.all((d == 0) == np.eye(len(poses), dtype=bool))
        for i in range(0, len(poses), 81):
            # d[i, k] <= d[i, j] + d[j, k] over all 729^3 triples, in row chunks
            block = d[i:i + 81]
            assert np.all(block[:, None, :] <= block[:, :, None] + d[None, :, :])

    def test_range(self):
        d = [distance(LabanPose(a, a), LabanPose(b, b)) for a in ARMS for b in ARMS]
        assert min(d) == 0 and max(d) == 12


class TestText:
    def test_round_trip(self):
        for a in ARMS:
            for b in ARMS[::5]:
                p = LabanPose(a, b)
                assert LabanPose.parse(str(p)) == p

    def test_format(self):
        assert str(LabanPose(sym("Forward"), sym("Place", "Low"))) == "L:Forward/Middle R:Place/Low"

    @pytest.mark.parametrize("text", ["", "L:Forward/Middle", "L:Up/Middle R:Place/Low", "R:Place/Low L:Place/Low"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            LabanPose.parse(text)
