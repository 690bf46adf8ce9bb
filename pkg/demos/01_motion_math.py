# Motion clips, motion energy and keyframes, then retiming and blending.
import numpy as np

from gesture_synth.motion import DEFAULT_SKELETON, MotionClip, blend, motion_energy, retime, uniform_retime
from gesture_synth.series import extract_keyframes

np.set_printoptions(precision=3, suppress=True)
sk = DEFAULT_SKELETON
print("joints:", sk.joint_names)

# A two-second clip at 25 fps: both wrists swing forward twice.
t = np.arange(50) / 25.0
frames = np.repeat(sk.rest_pose()[None], 50, axis=0)
swing = 0.25 * (1 - np.cos(2 * np.pi * t))
for wrist in ("r_wrist", "l_wrist"):
    frames[:, sk.index(wrist), 2] += swing
clip = MotionClip(frames, 25.0)
print(clip.n_frames, "frames,", clip.duration, "s")

# Motion energy is the squared wrist speed summed over both hands.
energy = motion_energy(clip)
print("energy at frames 0..10:", energy.values[:10])

# Keyframes are local maxima of the smoothed energy. Each swing is fastest twice,
# once going out and once coming back, so two swings give four keyframes.
keys = extract_keyframes(energy, sigma=0.12)
print("keyframes:", keys, "at seconds", [k / 25 for k in keys])
clip = clip.with_keyframes(keys)

# Move the keyframes to new frames; the poses there match the source exactly.
moved = retime(clip, keys, [5, 15, 40, 55], 60)
print("retimed to", moved.n_frames, "frames, keyframes", moved.keyframes)
for k, d in zip(keys, moved.keyframes):
    print(f"  source frame {k} -> output frame {d}: identical pose = {np.array_equal(clip.frames[k], moved.frames[d])}")

# Uniform retiming stretches the whole clip linearly.
slow = uniform_retime(clip, 100)
print("uniformly stretched to", slow.n_frames, "frames, keyframes now", slow.keyframes)

# Blending inserts linear bridge frames between the last pose of one clip and the first of the next.
joined = blend(clip, slow, 8)
print("blended length", joined.n_frames, "= 50 + 8 + 100")
step = np.linalg.norm(np.diff(joined.frames, axis=0), axis=2).max()
print("largest joint step per frame:", round(float(step), 4))
