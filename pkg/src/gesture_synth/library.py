"""Retrieval indices over an annotated gesture dataset.

Three indices are built, one per gesture type:

* Beat: clips keyed by their number of motion-energy keyframes and length.
* Imagistic: k-means clusters of clips, each carrying the embeddings of the
  words annotators marked as representing its members.
* No-Gesture: clips keyed by the labanotation of their first and last
  keyframe poses, plus their length.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from urllib.parse import quote

import numpy as np

from . import laban
from .motion import DEFAULT_SKELETON, MotionClip, Skeleton, motion_energy, resample, uniform_retime
from .series import find_peaks, gaussian_filter
from .text import EmbeddingTable, GestureType

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DESCRIPTOR_FRAMES = 32
TIE_TOL = 1e-12


@dataclass(frozen=True)
class GestureRecord:
    """One annotated gesture from the dataset."""

    id: str
    gesture_type: GestureType
    clip: MotionClip
    words: tuple = ()
    imagistic_words: tuple = ()
    audio: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "gesture_type", GestureType(self.gesture_type))
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "imagistic_words", tuple(self.imagistic_words))
        if not self.id:
            raise ValueError("record id must be non-empty")
        missing = set(self.imagistic_words) - set(self.words)
        if missing:
            raise ValueError(f"record {self.id}: imagistic words {sorted(missing)} not in transcript")
        if self.imagistic_words and self.gesture_type is not GestureType.Imagistic:
            raise ValueError(f"record {self.id}: only Imagistic records may list imagistic words")


@dataclass(frozen=True)
class BeatEntry:
    id: str
    n_keyframes: int
    n_frames: int
    keyframes: tuple = ()


@dataclass(frozen=True, eq=False)
class ImagisticCluster:
    cluster_id: int
    members: tuple
    words: tuple = ()
    embeddings: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __eq__(self, other):
        if not isinstance(other, ImagisticCluster):
            return NotImplemented
        return (
            self.cluster_id == other.cluster_id
            and self.members == other.members
            and self.words == other.words
            and np.array_equal(self.embeddings, other.embeddings)
        )


@dataclass(frozen=True)
class NoGestureEntry:
    id: str
    n_frames: int
    laban_first: laban.LabanPose
    laban_last: laban.LabanPose


@dataclass(frozen=True)
class LibraryConfig:
    fps: float = 25.0
    motion_sigma: float = 0.12
    k: int | None = None
    seed: int = 0


class EmptyIndexError(LookupError):
    """Raised when a query hits an index with no entries."""


class GestureLibrary:
    """Read-only container for the three indices and the clips they point to."""

    def __init__(
        self,
        beat,
        imagistic,
        nogesture,
        clips: dict,
        skeleton: Skeleton = DEFAULT_SKELETON,
        config: LibraryConfig = LibraryConfig(),
        displacement_p99: float = 0.0,
    ):
        self.beat = tuple(beat)
        self.imagistic = tuple(imagistic)
        self.nogesture = tuple(nogesture)
        self.clips = dict(clips)
        self.skeleton = skeleton
        self.config = config
        self.displacement_p99 = float(displacement_p99)
        self._types = {}
        for e in self.beat:
            self._types[e.id] = GestureType.Beat
        for c in self.imagistic:
            for m in c.members:
                self._types[m] = GestureType.Imagistic
        for e in self.nogesture:
            self._types[e.id] = GestureType.NoGesture
        missing = set(self._types) - set(self.clips)
        if missing:
            raise ValueError(f"library entries reference unknown clips: {sorted(missing)[:5]}")
        self._word_index = _WordIndex(self.imagistic)

    @property
    def counts(self) -> dict:
        return {
            "beat": len(self.beat),
            "imagistic_clusters": len(self.imagistic),
            "imagistic_members": sum(len(c.members) for c in self.imagistic),
            "nogesture": len(self.nogesture),
        }

    def type_of(self, record_id: str) -> GestureType:
        return self._types[record_id]

    def clip(self, record_id: str) -> MotionClip:
        return self.clips[record_id]

    def has(self, gesture_type: GestureType) -> bool:
        return bool(
            {
                GestureType.Beat: self.beat,
                GestureType.Imagistic: self.imagistic,
                GestureType.NoGesture: self.nogesture,
            }[GestureType(gesture_type)]
        )

    def save(self, out_dir) -> Path:
        """Write ``meta.json``, one JSON-lines file per index and ``clips/``."""
        out = Path(out_dir)
        (out / "clips").mkdir(parents=True, exist_ok=True)
        meta = {
            "format_version": FORMAT_VERSION,
            "counts": self.counts,
            "skeleton": self.skeleton.to_dict(),
            "config": asdict(self.config),
            "seed": self.config.seed,
            "displacement_p99": self.displacement_p99,
        }
        _write_json(out / "meta.json", meta)
        _write_jsonl(out / "beat.jsonl", [asdict(e) | {"keyframes": list(e.keyframes)} for e in self.beat])
        _write_jsonl(
            out / "imagistic.jsonl",
            [
                {
                    "cluster_id": c.cluster_id,
                    "members": list(c.members),
                    "words": [
                        {"word": w, "embedding": v.tolist()} for w, v in zip(c.words, c.embeddings)
                    ],
                }
                for c in self.imagistic
            ],
        )
        _write_jsonl(
            out / "nogesture.jsonl",
            [
                {
                    "id": e.id,
                    "n_frames": e.n_frames,
                    "laban_first": str(e.laban_first),
                    "laban_last": str(e.laban_last),
                }
                for e in self.nogesture
            ],
        )
        for rid in sorted(self.clips):
            _write_json(out / "clips" / clip_filename(rid), self.clips[rid].to_dict())
        return out

    @classmethod
    def load(cls, lib_dir) -> "GestureLibrary":
        d = Path(lib_dir)
        meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"{d}: unsupported library format_version {meta.get('format_version')}")
        skeleton = Skeleton.from_dict(meta["skeleton"])
        config = LibraryConfig(**meta["config"])
        beat = [
            BeatEntry(r["id"], r["n_keyframes"], r["n_frames"], tuple(r["keyframes"]))
            for r in _read_jsonl(d / "beat.jsonl")
        ]
        imagistic = []
        for r in _read_jsonl(d / "imagistic.jsonl"):
            words = tuple(w["word"] for w in r["words"])
            emb = np.array([w["embedding"] for w in r["words"]], dtype=float)
            imagistic.append(ImagisticCluster(r["cluster_id"], tuple(r["members"]), words, emb))
        nogesture = [
            NoGestureEntry(
                r["id"],
                r["n_frames"],
                laban.LabanPose.parse(r["laban_first"]),
                laban.LabanPose.parse(r["laban_last"]),
            )
            for r in _read_jsonl(d / "nogesture.jsonl")
        ]
        ids = [e.id for e in beat] + [m for c in imagistic for m in c.members] + [e.id for e in nogesture]
        clips = {}
        for rid in ids:
            clip_d = json.loads((d / "clips" / clip_filename(rid)).read_text(encoding="utf-8"))
            clips[rid] = MotionClip.from_dict(clip_d, skeleton)
        return cls(beat, imagistic, nogesture, clips, skeleton, config, meta["displacement_p99"])


class _WordIndex:
    """Flattened, unit-normalized word entries across all Imagistic clusters."""

    def __init__(self, clusters):
        words, cluster_ids, vecs = [], [], []
        for c in clusters:
            for w, v in zip(c.words, c.embeddings):
                n = np.linalg.norm(v)
                if n == 0:
                    continue
                words.append(w)
                cluster_ids.append(c.cluster_id)
                vecs.append(v / n)
        self.words = words
        self.cluster_ids = cluster_ids
        self.unit = np.array(vecs) if vecs else np.zeros((0, 0))

    def nearest(self, query: np.ndarray) -> tuple[int, str, float]:
        q = np.asarray(query, dtype=float)
        n = np.linalg.norm(q)
        if n == 0:
            raise ValueError("query embedding has zero norm")
        if self.unit.shape[0] == 0:
            raise EmptyIndexError("Imagistic index has no word entries")
        if q.shape != (self.unit.shape[1],):
            raise ValueError(f"query dimension {q.shape} does not match index dimension {self.unit.shape[1]}")
        dist = 1.0 - self.unit @ (q / n)
        # parallel vectors of different length tie up to rounding
        cands = np.flatnonzero(dist <= dist.min() + TIE_TOL)
        i = min(cands, key=lambda j: (self.words[j], self.cluster_ids[j]))
        return self.cluster_ids[i], self.words[i], float(dist[i])


def clip_filename(record_id: str) -> str:
    return quote(record_id, safe="") + ".json"


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True) + "\n", encoding="utf-8")


def _write_jsonl(path: Path, rows) -> None:
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")


def _read_jsonl(path: Path) -> list:
    with path.open(encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def energy_keyframes(clip: MotionClip, sigma: float) -> list[int]:
    """Motion-energy keyframes of a clip (smoothed local maxima)."""
    smoothed = gaussian_filter(motion_energy(clip), sigma).values
    return find_peaks(smoothed)


def motion_descriptor(clip: MotionClip) -> np.ndarray:
    """Clip resampled to a fixed 32 frames, flattened."""
    return uniform_retime(clip, DESCRIPTOR_FRAMES).frames.reshape(-1)


def kmeans(x, k: int, rng, max_iter: int = 100, tol: float = 1e-4):
    """Lloyd's algorithm with k-means++ seeding.

    Empty clusters are re-seeded with the point farthest from its current
    center (taken from a cluster that can spare it). Stops when the relative
    drop in inertia is at most ``tol``.

    Returns
    -------
    labels : np.ndarray of int, shape (N,)
    centers : np.ndarray, shape (k, D)
    inertia : float
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        if d2.sum() > 0:
            nxt = int(rng.choice(n, p=d2 / d2.sum()))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(free[rng.integers(free.size)])
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    centers = x[chosen].copy()

    prev = math.inf
    for _ in range(max_iter):
        dist = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dist, axis=1)
        for j in range(k):
            if np.any(labels == j):
                continue
            sizes = np.bincount(labels, minlength=k)
            own = dist[np.arange(n), labels]
            spare = sizes[labels] > 1
            p = int(np.argmax(np.where(spare, own, -1.0)))
            labels[p] = j
        centers = np.stack([x[labels == j].mean(axis=0) for j in range(k)])
        inertia = float(np.sum((x - centers[labels]) ** 2))
        if inertia == 0 or prev - inertia <= tol * prev:
            break
        prev = inertia
    return labels, centers, inertia


def cluster_imagistic(records, k: int, rng) -> list[ImagisticCluster]:
    """Group Imagistic records by k-means over fixed-length motion descriptors.

    Clusters are numbered in order of their smallest member id; members are
    sorted. Word lists are left empty (see :func:`build`).
    """
    records = list(records)
    if not records:
        raise ValueError("no records to cluster")
    if k > len(records):
        raise ValueError(f"k={k} exceeds the number of records ({len(records)})")
    x = np.stack([motion_descriptor(r.clip) for r in records])
    labels, _, _ = kmeans(x, k, rng)
    groups = [sorted(r.id for r, lab in zip(records, labels) if lab == j) for j in range(k)]
    groups.sort(key=lambda g: g[0])
    return [ImagisticCluster(i, tuple(g)) for i, g in enumerate(groups)]


def default_k(n_records: int) -> int:
    return max(1, int(round(math.sqrt(n_records / 2))))


def _laban_boundaries(clip: MotionClip, keyframes) -> tuple[laban.LabanPose, laban.LabanPose]:
    if len(keyframes) >= 2:
        first, last = clip.frames[keyframes[0]], clip.frames[keyframes[-1]]
    else:
        first, last = clip.frames[0], clip.frames[-1]
    return laban.encode(first, clip.skeleton), laban.encode(last, clip.skeleton)


def _beat_keyframes(clip: MotionClip, sigma: float) -> list[int]:
    keys = energy_keyframes(clip, sigma)
    if keys:
        return keys
    # No interior maximum: fall back to the most energetic interior frame.
    smoothed = gaussian_filter(motion_energy(clip), sigma).values[1:-1]
    if smoothed.size == 0:
        return []
    return [1 + int(np.argmax(smoothed))] if np.ptp(smoothed) > 0 else [clip.n_frames // 2]


def frame_displacements(clip: MotionClip) -> np.ndarray:
    """Largest joint displacement between each pair of consecutive frames."""
    return np.linalg.norm(np.diff(clip.frames, axis=0), axis=2).max(axis=1)


def build(records, table: EmbeddingTable | None = None, config: LibraryConfig = LibraryConfig()) -> GestureLibrary:
    """Build all three indices from ingested records.

    Parameters
    ----------
    records : sequence of GestureRecord
    table : EmbeddingTable, optional
        Source of word vectors for Imagistic clusters. Without a table the
        clusters carry no words and cannot be queried.
    config : LibraryConfig
    """
    records = list(records)
    if not records:
        raise ValueError("cannot build a library from zero records")
    skeleton = records[0].clip.skeleton
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise ValueError("record ids must be unique")
    for r in records:
        if r.clip.skeleton != skeleton:
            raise ValueError(f"record {r.id} uses a different skeleton")

    clips = {}
    beat, nogesture, imag_records = [], [], []
    for r in records:
        clip = resample(r.clip, config.fps)
        if r.gesture_type is GestureType.Beat:
            keys = _beat_keyframes(clip, config.motion_sigma)
            if not keys:
                log.warning("beat record %s has no usable keyframe; skipped", r.id)
                continue
            clips[r.id] = clip.with_keyframes(keys)
            beat.append(BeatEntry(r.id, len(keys), clip.n_frames, tuple(keys)))
        elif r.gesture_type is GestureType.NoGesture:
            keys = energy_keyframes(clip, config.motion_sigma)
            first, last = _laban_boundaries(clip, keys)
            clips[r.id] = clip.with_keyframes(keys)
            nogesture.append(NoGestureEntry(r.id, clip.n_frames, first, last))
        else:
            clips[r.id] = clip
            imag_records.append(GestureRecord(r.id, r.gesture_type, clip, r.words, r.imagistic_words, r.audio))

    imagistic = []
    if imag_records:
        k = config.k if config.k is not None else default_k(len(imag_records))
        k = min(k, len(imag_records))
        rng = np.random.default_rng(config.seed)
        by_id = {r.id: r for r in imag_records}
        for c in cluster_imagistic(imag_records, k, rng):
            words = sorted({w for m in c.members for w in by_id[m].imagistic_words})
            kept, vecs = [], []
            for w in words:
                v = table.get(w) if table is not None else None
                if v is None:
                    log.warning("imagistic word %r has no embedding; skipped", w)
                    continue
                kept.append(w)
                vecs.append(v)
            dim = table.dim if table is not None else 0
            emb = np.array(vecs, dtype=float).reshape(len(kept), dim)
            imagistic.append(ImagisticCluster(c.cluster_id, c.members, tuple(kept), emb))

    disp = np.concatenate([frame_displacements(c) for c in clips.values()]) if clips else np.zeros(1)
    p99 = float(np.percentile(disp, 99))
    return GestureLibrary(beat, imagistic, nogesture, clips, skeleton, config, p99)


def query_beat(lib: GestureLibrary, n_keyframes: int, n_frames: int) -> BeatEntry:
    """Entry with ``n_keyframes`` keyframes whose length is closest to ``n_frames``.

    Without an exact keyframe-count match the nearest count is used (the
    smaller count on a tie). Length ties go to the shorter clip, then to the
    smaller id.
    """
    if not lib.beat:
        raise EmptyIndexError("Beat index is empty")
    if n_keyframes < 1:
        raise ValueError("n_keyframes must be >= 1")
    counts = {e.n_keyframes for e in lib.beat}
    k = min(counts, key=lambda c: (abs(c - n_keyframes), c))
    cands = [e for e in lib.beat if e.n_keyframes == k]
    return min(cands, key=lambda e: (abs(e.n_frames - n_frames), e.n_frames, e.id))


def query_imagistic(lib: GestureLibrary, query_embedding, rng) -> tuple[int, str]:
    """Nearest word entry by cosine distance, then a uniformly sampled member of its cluster.

    Returns ``(cluster_id, record_id)``.
    """
    if not lib.imagistic:
        raise EmptyIndexError("Imagistic index is empty")
    cid, _, _ = lib._word_index.nearest(query_embedding)
    members = lib.imagistic[[c.cluster_id for c in lib.imagistic].index(cid)].members
    return cid, members[int(rng.integers(len(members)))]


def nearest_imagistic_word(lib: GestureLibrary, query_embedding) -> tuple[int, str, float]:
    """``(cluster_id, word, cosine distance)`` of the closest word entry."""
    return lib._word_index.nearest(query_embedding)


def query_nogesture(
    lib: GestureLibrary, prev: laban.LabanPose, nxt: laban.LabanPose, target_frames: int
) -> NoGestureEntry:
    """Entry whose boundary symbols best match ``prev`` and ``nxt``.

    Ties go to the length closest to ``target_frames``, then the smaller id.
    """
    if not lib.nogesture:
        raise EmptyIndexError("No-Gesture index is empty")
    return min(
        lib.nogesture,
        key=lambda e: (
            laban.distance(prev, e.laban_first) + laban.distance(nxt, e.laban_last),
            abs(target_frames - e.n_frames),
            e.id,
        ),
    )
