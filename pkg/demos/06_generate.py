# End to end: text (and optionally speech audio) to one gesture clip.
import tempfile
from pathlib import Path

import numpy as np

from gesture_synth.dataset import ingest
from gesture_synth.export import export_motion
from gesture_synth.fixtures import data_path
from gesture_synth.library import LibraryConfig, build
from gesture_synth.pipeline import GenerationConfig, TextModels, generate
from gesture_synth.signal import Waveform
from gesture_synth.text import EmbeddingTable, LinearHead

table = EmbeddingTable.load(data_path("embeddings.txt"))
models = TextModels(table, LinearHead.load(data_path("type_head.txt")), LinearHead.load(data_path("word_head.txt")))
records, _ = ingest(data_path("fixture.jsonl"))
lib = build(records, table, LibraryConfig(seed=0))


def show(result):
    print(f"{result.clip.n_frames} frames for {result.duration:.2f} s of speech")
    for rep in result.spans:
        print(f"  {rep.span.label.name:<10} frames {rep.frame_range}  {' '.join(rep.words)!r:<40} <- {', '.join(rep.sources)}")
        for m in rep.alignment:
            print(f"      keyframe: source {m.source_id}[{m.source_frame}] -> frame {m.achieved} (target {m.target})")
    step = np.linalg.norm(np.diff(result.clip.frames, axis=0), axis=2).max()
    print(f"  largest step {step:.4f} (limit {2 * lib.displacement_p99:.4f})\n")


text = "Well um it is really very important, and the ocean is a huge wave so tall it must rise up."
show(generate(text, lib, models, GenerationConfig(seed=1)))

# With audio, its length sets the duration and Beat keyframes follow its loud syllables.
rng = np.random.default_rng(0)
sr = 16000
x = 1e-3 * rng.standard_normal(2 * sr)
tt = np.arange(x.size) / sr
for a, b in [(0.2, 0.5), (0.8, 1.1), (1.4, 1.7)]:
    i, j = int(a * sr), int(b * sr)
    x[i:j] += 0.5 * np.hanning(j - i) * np.sin(2 * np.pi * 200 * tt[i:j])
show(generate("really very must never always", lib, models, audio=Waveform(sr, x)))

# Ending at rest replaces the tail of the last span with a bridge into the rest pose.
result = generate("the donut is so big", lib, models, GenerationConfig(end_at_rest=True))
print("final pose is rest:", np.array_equal(result.clip.frames[-1], lib.skeleton.rest_pose()))

# Export as motion JSON and BVH.
with tempfile.TemporaryDirectory() as tmp:
    for fmt in ("json", "bvh"):
        path = export_motion(result.clip, Path(tmp) / f"out.{fmt}", fmt)
        print(fmt, path.stat().st_size, "bytes")
