# Labanotation-style arm symbols and the distance used to match gesture boundaries.
import numpy as np

from gesture_synth import laban
from gesture_synth.laban import LabanPose
from gesture_synth.motion import DEFAULT_SKELETON

sk = DEFAULT_SKELETON


def arms(right, left):
    p = sk.rest_pose().copy()
    p[sk.index("r_wrist")] = p[sk.index("r_shoulder")] + right
    p[sk.index("l_wrist")] = p[sk.index("l_shoulder")] + left
    return p


# Arms hanging down quantize to Place/Low on both sides.
print("rest pose:       ", laban.encode(sk.rest_pose()))

# +z is forward and +x is the speaker's left.
reach = arms(right=[0, 0, 0.6], left=[0.4, 0.4, 0.0])
print("reach and raise: ", laban.encode(reach))

# Symbols only depend on directions, so moving or scaling the body changes nothing.
print("moved and scaled:", laban.encode(reach * 2.5 + [1.0, 0.3, -2.0]))

# The distance counts steps around the eight-direction ring plus level steps, per arm.
a = LabanPose.parse("L:Forward/Middle R:Forward/Middle")
for text in ["L:Forward/Middle R:Forward/High", "L:Forward/Middle R:Backward/Middle", "L:Place/Low R:Place/Low"]:
    b = LabanPose.parse(text)
    print(f"d({a}, {b}) = {laban.distance(a, b)}")

# Place is two steps from every direction; that keeps the triangle inequality intact:
# Forward -> Place -> Backward costs 2 + 2, never less than Forward -> Backward = 4.
f, p, bk = laban.Direction.Forward, laban.Direction.Place, laban.Direction.Backward
print("F-B:", laban.direction_distance(f, bk), " F-P-B:", laban.direction_distance(f, p) + laban.direction_distance(p, bk))

# Random poses: how often does each symbol occur?
rng = np.random.default_rng(0)
counts = {}
for _ in range(2000):
    pose = sk.rest_pose() + rng.normal(0, 0.4, size=(8, 3))
    sym = laban.encode(pose).right
    counts[str(sym)] = counts.get(str(sym), 0) + 1
for sym, c in sorted(counts.items(), key=lambda kv: -kv[1])[:6]:
    print(f"  {sym:<22} {c}")
