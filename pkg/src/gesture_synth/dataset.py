"""JSON-lines gesture dataset: ingestion, validation and manifest statistics.

One object per line::

    {"id": str, "type": "beat" | "imagistic" | "nogesture", "fps": number,
     "joints": [[[x, y, z] x J] x T], "words": [str],
     "imagistic_words": [str], "audio": str (optional)}

Joint coordinates are made root-relative, scaled to unit shoulder width and
resampled to a common frame rate on the way in.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .library import GestureRecord
from .motion import DEFAULT_SKELETON, MotionClip, Skeleton, normalize_frames, resample
from .text import GestureType

REQUIRED_KEYS = ("id", "type", "fps", "joints", "words")


class DatasetError(ValueError):
    """A dataset file failed validation; carries the file and line number."""

    def __init__(self, path, lineno: int | None, message: str):
        self.path = str(path)
        self.lineno = lineno
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {message}")


@dataclass
class DatasetManifest:
    path: str
    n_records: int
    counts: dict
    joint_names: tuple
    fps_histogram: dict = field(default_factory=dict)
    splits: dict = field(default_factory=dict)

    def proportions(self) -> dict:
        return {k: v / self.n_records for k, v in self.counts.items()}

    def summary(self) -> str:
        lines = [f"{self.path}: {self.n_records} records"]
        for name, count in self.counts.items():
            lines.append(f"  {name:<10} {count:>7}  ({100.0 * count / self.n_records:5.1f}%)")
        fps = ", ".join(f"{k:g} fps x{v}" for k, v in sorted(self.fps_histogram.items()))
        lines.append(f"  source frame rates: {fps}")
        if self.splits:
            lines.append("  splits: " + ", ".join(f"{k}={v}" for k, v in sorted(self.splits.items())))
        return "\n".join(lines)


def parse_record(obj: dict, fps: float = 25.0, skeleton: Skeleton = DEFAULT_SKELETON) -> GestureRecord:
    """Validate one decoded JSON object and turn it into a normalized record."""
    if not isinstance(obj, dict):
        raise ValueError("record must be a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    gtype = GestureType.parse(str(obj["type"]))
    try:
        joints = np.array(obj["joints"], dtype=float)
    except (TypeError, ValueError):
        raise ValueError("joints must be a T x J x 3 array of numbers") from None
    if joints.ndim != 3 or joints.shape[2] != 3:
        raise ValueError(f"joints must have shape (T, J, 3), got {joints.shape}")
    if joints.shape[1] != skeleton.n_joints:
        raise ValueError(f"expected {skeleton.n_joints} joints per frame, got {joints.shape[1]}")
    src_fps = float(obj["fps"])
    clip = MotionClip(normalize_frames(joints, skeleton), src_fps, (), skeleton)
    words = [str(w) for w in obj["words"]]
    return GestureRecord(
        str(obj["id"]),
        gtype,
        resample(clip, fps),
        tuple(words),
        tuple(str(w) for w in obj.get("imagistic_words", ())),
        obj.get("audio"),
    )


def ingest(path, fps: float = 25.0, skeleton: Skeleton = DEFAULT_SKELETON):
    """Read and validate a dataset file.

    Returns
    -------
    records : list of GestureRecord
        In file order.
    manifest : DatasetManifest

    Raises
    ------
    DatasetError
        On malformed JSON, schema violations, unknown gesture types,
        inconsistent joint counts, duplicate ids or an empty file.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(path, None, "file not found")
    records = []
    fps_hist: Counter = Counter()
    splits: Counter = Counter()
    seen = set()
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(path, lineno, f"malformed JSON ({e.msg})") from None
            try:
                rec = parse_record(obj, fps, skeleton)
            except ValueError as e:
                raise DatasetError(path, lineno, str(e)) from None
            if rec.id in seen:
                raise DatasetError(path, lineno, f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            fps_hist[float(obj["fps"])] += 1
            if "split" in obj:
                splits[str(obj["split"])] += 1
            records.append(rec)
    if not records:
        raise DatasetError(path, None, "dataset is empty")
    counts = Counter(r.gesture_type for r in records)
    manifest = DatasetManifest(
        str(path),
        len(records),
        {t.value: counts.get(t, 0) for t in GestureType},
        skeleton.joint_names,
        dict(fps_hist),
        dict(splits),
    )
    return records, manifest


def record_to_dict(rec: GestureRecord) -> dict:
    d = {
        "id": rec.id,
        "type": rec.gesture_type.value,
        "fps": rec.clip.fps,
        "joints": rec.clip.frames.tolist(),
        "words": list(rec.words),
        "imagistic_words": list(rec.imagistic_words),
    }
    if rec.audio is not None:
        d["audio"] = rec.audio
    return d


def write_records(records, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(record_to_dict(rec)) + "\n")
    return path


def read_labeled(path) -> list[dict]:
    """Rows for head training: ``words`` plus ``type`` or per-word ``labels``."""
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(path, lineno, f"malformed JSON ({e.msg})") from None
            if not isinstance(obj, dict) or "words" not in obj:
                raise DatasetError(path, lineno, "row needs a 'words' list")
            obj["_line"] = lineno
            rows.append(obj)
    if not rows:
        raise DatasetError(path, None, "no training rows")
    return rows
