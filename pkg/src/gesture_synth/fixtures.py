"""A small synthetic gesture dataset for tests, demos and smoke runs.

Twelve records (5 Beat, 4 Imagistic, 3 No-Gesture) on the default
skeleton, a 16-dimensional embedding table over a toy vocabulary, and heads
trained on that table. Everything is generated deterministically; the copies
under ``gesture_synth/data`` are produced by running this module::

    python -m gesture_synth.fixtures
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .motion import DEFAULT_SKELETON
from .text import UNK, EmbeddingTable, GestureType, LinearHead, train_head

FPS = 25.0
DIM = 16

BEAT_WORDS = ("really", "very", "must", "never", "always", "believe", "important", "every", "absolutely", "so")
NOGESTURE_WORDS = ("the", "a", "of", "and", "um", "to", "is", "it", "in", "that", "uh", "well")
IMAGISTIC_GROUPS = {
    "round": ("circle", "donut", "wave", "ocean"),
    "big": ("big", "huge", "wide"),
    "up": ("up", "rise", "tall"),
    "small": ("small", "tiny", "box"),
}

_SHOULDERS = np.array([[-0.5, -0.05, 0.0], [0.5, -0.05, 0.0]])
# Hands held in front at waist height: where most fixture gestures start and end.
NEUTRAL = np.array([[-0.3, -0.75, 0.4], [0.3, -0.75, 0.4]])
REST = np.array([[-0.55, -1.2, 0.05], [0.55, -1.2, 0.05]])


def _ease(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _pose_from_wrists(wrists: np.ndarray) -> np.ndarray:
    """Full 8-joint pose from the two wrist positions; elbows bend down and out."""
    pose = np.array(DEFAULT_SKELETON.rest, dtype=float)
    for side, (sh_i, el_i, wr_i) in enumerate(((2, 3, 4), (5, 6, 7))):
        sh = _SHOULDERS[side]
        wr = wrists[side]
        out = np.array([-0.12 if side == 0 else 0.12, -0.25, -0.1])
        pose[sh_i] = sh
        pose[el_i] = 0.5 * (sh + wr) + out
        pose[wr_i] = wr
    return pose


def _clip(wrist_track: np.ndarray) -> np.ndarray:
    return np.stack([_pose_from_wrists(w) for w in wrist_track])


def _beat(n_frames: int, n_beats: int, amplitude: float, phase: float = 0.0) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_frames)
    env = _ease(t / 0.15) * _ease((1.0 - t) / 0.15)
    stroke = -amplitude * np.abs(np.sin(np.pi * n_beats * t + phase)) ** 3
    track = np.repeat(NEUTRAL[None], n_frames, axis=0)
    track[:, :, 1] += (env * stroke)[:, None]
    track[:, :, 2] += (0.3 * env * stroke)[:, None]
    return _clip(track)


def _imagistic(kind: str, n_frames: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_frames)
    env = _ease(t / 0.25) * _ease((1.0 - t) / 0.25)
    track = np.repeat(NEUTRAL[None], n_frames, axis=0)
    if kind == "round":
        ang = 2 * np.pi * t
        r = 0.22 * env
        track[:, 0, 0] += r * (np.cos(ang) - 1)
        track[:, 0, 1] += r * np.sin(ang) + 0.35 * env
        track[:, 1, 0] -= r * (np.cos(ang) - 1)
        track[:, 1, 1] += r * np.sin(ang) + 0.35 * env
    elif kind == "big":
        track[:, 0, 0] -= 0.45 * env
        track[:, 1, 0] += 0.45 * env
        track[:, :, 1] += (0.3 * env)[:, None]
    elif kind == "up":
        track[:, 0, 1] += 0.7 * env
        track[:, 0, 2] += 0.1 * env
    else:
        track[:, 0, 0] += 0.18 * env
        track[:, 1, 0] -= 0.18 * env
        track[:, :, 1] += (0.25 * env)[:, None]
    return _clip(track)


def _nogesture(kind: str, n_frames: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_frames)
    sway = 0.02 * np.sin(2 * np.pi * t)
    if kind == "rest":
        track = np.repeat(REST[None], n_frames, axis=0)
    elif kind == "front":
        track = np.repeat(NEUTRAL[None], n_frames, axis=0)
    else:
        # drifting from hands in front down to the sides
        u = _ease(t)[:, None, None]
        track = (1 - u) * NEUTRAL[None] + u * REST[None]
    track = track.copy()
    track[:, :, 0] += sway[:, None]
    return _clip(track)


def fixture_rows() -> list[dict]:
    """Dataset rows in the JSON-lines record schema."""
    rows = []

    def add(rid, gtype, frames, words, imag=()):
        rows.append(
            {
                "id": rid,
                "type": gtype.value,
                "fps": FPS,
                "joints": np.round(frames, 6).tolist(),
                "words": list(words),
                "imagistic_words": list(imag),
            }
        )

    add("beat-00", GestureType.Beat, _beat(20, 1, 0.12), ["so", "important"])
    add("beat-01", GestureType.Beat, _beat(32, 2, 0.14), ["we", "must", "never"])
    add("beat-02", GestureType.Beat, _beat(45, 3, 0.15, 0.3), ["really", "very", "important"])
    add("beat-03", GestureType.Beat, _beat(60, 4, 0.15), ["i", "always", "believe", "every", "word"])
    add("beat-04", GestureType.Beat, _beat(80, 6, 0.16, 0.2), ["absolutely", "every", "single", "day", "really"])
    add("imag-00", GestureType.Imagistic, _imagistic("round", 40), ["it", "looks", "like", "a", "donut"], ["donut"])
    add("imag-01", GestureType.Imagistic, _imagistic("big", 30), ["a", "huge", "wide", "ocean"], ["huge", "wide"])
    add("imag-02", GestureType.Imagistic, _imagistic("up", 30), ["prices", "rise", "up"], ["rise", "up"])
    add("imag-03", GestureType.Imagistic, _imagistic("small", 28), ["a", "tiny", "box"], ["tiny", "box"])
    add("nog-00", GestureType.NoGesture, _nogesture("rest", 30), ["and", "then", "the"])
    add("nog-01", GestureType.NoGesture, _nogesture("front", 24), ["um", "well"])
    add("nog-02", GestureType.NoGesture, _nogesture("drop", 36), ["that", "is", "it"])
    return rows


def _vocabulary() -> list[tuple[str, GestureType, str | None]]:
    vocab = [(w, GestureType.Beat, None) for w in BEAT_WORDS]
    vocab += [(w, GestureType.NoGesture, None) for w in NOGESTURE_WORDS]
    for group, words in IMAGISTIC_GROUPS.items():
        vocab += [(w, GestureType.Imagistic, group) for w in words]
    return vocab


def fixture_table(seed: int = 7) -> EmbeddingTable:
    """Toy embeddings: a type direction, a semantic-group direction and noise."""
    rng = np.random.default_rng(seed)
    groups = list(IMAGISTIC_GROUPS)
    words, rows = [], []
    for word, gtype, group in _vocabulary():
        v = 0.3 * rng.standard_normal(DIM)
        v[gtype.index] += 2.0
        if group is not None:
            v[3 + groups.index(group)] += 1.5
        words.append(word)
        rows.append(v)
    unk = 0.3 * rng.standard_normal(DIM)
    unk[GestureType.NoGesture.index] += 1.0
    words.append(UNK)
    rows.append(unk)
    return EmbeddingTable(words, np.round(np.array(rows), 6))


def fixture_heads(table: EmbeddingTable) -> tuple[LinearHead, LinearHead]:
    """(type head, imagistic word selector) trained on the fixture vocabulary."""
    vocab = _vocabulary()
    x = np.stack([table.lookup(w) for w, _, _ in vocab])
    y_type = np.array([g.index for _, g, _ in vocab])
    y_imag = np.array([g is GestureType.Imagistic for _, g, _ in vocab], dtype=float)
    return train_head(x, y_type, 3), train_head(x, y_imag, 1)


def vocabulary_words() -> list[str]:
    return [w for w, _, _ in _vocabulary()]


def data_path(name: str) -> Path:
    """Path of a bundled fixture file (``fixture.jsonl``, ``embeddings.txt``, ...)."""
    return Path(str(resources.files("gesture_synth") / "data" / name))


def write_fixture_files(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "fixture.jsonl").open("w", encoding="utf-8") as f:
        for row in fixture_rows():
            f.write(json.dumps(row) + "\n")
    table = fixture_table()
    table.save(out / "embeddings.txt")
    type_head, selector = fixture_heads(table)
    type_head.save(out / "type_head.txt")
    selector.save(out / "word_head.txt")
    return out


if __name__ == "__main__":
    print(write_fixture_files(Path(__file__).parent / "data"))
