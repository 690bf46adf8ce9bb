# Build the three retrieval indices from the bundled fixture dataset and query them.
import tempfile

import numpy as np

from gesture_synth import laban
from gesture_synth.dataset import ingest
from gesture_synth.fixtures import data_path
from gesture_synth.library import (
    GestureLibrary,
    LibraryConfig,
    build,
    nearest_imagistic_word,
    query_beat,
    query_imagistic,
    query_nogesture,
)
from gesture_synth.text import EmbeddingTable

records, manifest = ingest(data_path("fixture.jsonl"))
print(manifest.summary())

table = EmbeddingTable.load(data_path("embeddings.txt"))
lib = build(records, table, LibraryConfig(seed=0, k=4))
print("\nindex sizes:", lib.counts)
print("99th percentile per-frame displacement: %.4f" % lib.displacement_p99)

# Beat: keyframe count first, then the closest length.
print("\nbeat entries (id, keyframes, frames):")
for e in lib.beat:
    print(f"  {e.id}  {e.n_keyframes}  {e.n_frames}")
for k, n in [(3, 50), (4, 40), (9, 100)]:
    print(f"query_beat({k}, {n}) ->", query_beat(lib, k, n).id)

# Imagistic: nearest word by cosine distance, then a random member of its cluster.
print("\nclusters:")
for c in lib.imagistic:
    print(f"  {c.cluster_id}: members {c.members} words {c.words}")
rng = np.random.default_rng(0)
for word in ["circle", "tall", "tiny", "huge"]:
    cid, w, dist = nearest_imagistic_word(lib, table.lookup(word))
    print(f"'{word}' -> nearest word '{w}' (distance {dist:.3f}), cluster {cid}, sample",
          query_imagistic(lib, table.lookup(word), rng)[1])

# No-Gesture: boundary symbols first, then length.
print("\nno-gesture entries:")
for e in lib.nogesture:
    print(f"  {e.id}  {e.n_frames:>3} frames  first {e.laban_first}  last {e.laban_last}")
front = laban.LabanPose.parse("L:ForwardLeft/Low R:ForwardRight/Low")
print("rest -> rest:  ", query_nogesture(lib, laban.REST, laban.REST, 40).id)
print("front -> rest: ", query_nogesture(lib, front, laban.REST, 40).id)

# The library round-trips through a directory.
with tempfile.TemporaryDirectory() as tmp:
    out = lib.save(tmp)
    print("\nsaved files:", sorted(p.name for p in out.iterdir()))
    print("reloaded counts equal:", GestureLibrary.load(out).counts == lib.counts)
