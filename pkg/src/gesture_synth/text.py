"""Word-level text processing: tokens, embeddings, gesture-type labels and spans.

Word representations come from a static embedding table; per-word gesture
types and word importance are predicted by small linear heads trained with
full-batch gradient descent.
"""

from __future__ import annotations

import enum
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

UNK = "<unk>"
_STRIP = string.punctuation + "‘’“”…–—«»¿¡"


class GestureType(str, enum.Enum):
    """Gesture classes; declaration order is the argmax tie-break order."""

    Beat = "beat"
    Imagistic = "imagistic"
    NoGesture = "nogesture"

    @property
    def index(self) -> int:
        return _TYPE_ORDER.index(self)

    @classmethod
    def parse(cls, value: str) -> "GestureType":
        try:
            return cls(value.strip().lower().replace("-", "").replace("_", ""))
        except ValueError:
            raise ValueError(f"unknown gesture type {value!r}") from None


_TYPE_ORDER = tuple(GestureType)


@dataclass(frozen=True)
class WordToken:
    text: str
    embedding: np.ndarray
    index: int


@dataclass(frozen=True)
class TypedSpan:
    """Half-open word range ``[start, end)`` sharing one gesture type."""

    start: int
    end: int
    label: GestureType

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and strip surrounding punctuation."""
    out = []
    for raw in text.lower().split():
        word = raw.strip(_STRIP)
        if word:
            out.append(word)
    return out


class EmbeddingTable:
    """Static word vectors with an optional ``<unk>`` fallback row."""

    def __init__(self, words, vectors):
        vectors = np.array(vectors, dtype=float)
        words = list(words)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("need one vector row per word")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in embedding table")
        vectors.setflags(write=False)
        self.words = words
        self.vectors = vectors
        self._index = {w: i for i, w in enumerate(words)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word):
        return word in self._index

    def __len__(self):
        return len(self.words)

    def get(self, word: str):
        i = self._index.get(word)
        return None if i is None else self.vectors[i]

    def lookup(self, word: str) -> np.ndarray:
        v = self.get(word)
        if v is None:
            v = self.get(UNK)
            if v is None:
                raise KeyError(f"word {word!r} not in embedding table and no {UNK} entry")
        return v

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        """Read ``D N`` header then ``word v1 .. vD`` lines."""
        path = Path(path)
        with path.open(encoding="utf-8") as f:
            header = f.readline().split()
            if len(header) != 2:
                raise ValueError(f"{path}:1: expected header 'D N'")
            dim, n = int(header[0]), int(header[1])
            words, rows = [], []
            for lineno, line in enumerate(f, start=2):
                parts = line.rstrip("\n").split(" ")
                if not line.strip():
                    continue
                if len(parts) != dim + 1:
                    raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}")
                words.append(parts[0])
                try:
                    rows.append([float(x) for x in parts[1:]])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: non-numeric embedding value") from None
        if len(words) != n:
            raise ValueError(f"{path}: header announces {n} words, found {len(words)}")
        if UNK not in words:
            raise ValueError(f"{path}: embedding table must contain {UNK}")
        return cls(words, np.array(rows).reshape(n, dim))

    def save(self, path) -> Path:
        path = Path(path)
        lines = [f"{self.dim} {len(self)}"]
        for w, v in zip(self.words, self.vectors):
            lines.append(" ".join([w, *(repr(float(x)) for x in v)]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def embed(words, table: EmbeddingTable) -> list[WordToken]:
    return [WordToken(w, table.lookup(w), i) for i, w in enumerate(words)]


@dataclass(frozen=True, eq=False)
class LinearHead:
    """Affine scorer ``W @ x + b``. One output class means a sigmoid probability."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.array(self.weight, dtype=float)
        b = np.array(self.bias, dtype=float).reshape(-1)
        if w.ndim != 2 or w.shape[0] != b.size:
            raise ValueError(f"weight {w.shape} and bias {b.shape} disagree")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("head parameters must be finite")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def classes(self) -> int:
        return self.weight.shape[0]

    @property
    def dim(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def zeros(cls, classes: int, dim: int) -> "LinearHead":
        return cls(np.zeros((classes, dim)), np.zeros(classes))

    def logits(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ValueError(f"input dimension {x.shape[1]} does not match head dimension {self.dim}")
        return x @ self.weight.T + self.bias

    def save(self, path) -> Path:
        path = Path(path)
        lines = [f"{self.classes} {self.dim}"]
        lines += [" ".join(repr(float(x)) for x in row) for row in self.weight]
        lines.append(" ".join(repr(float(x)) for x in self.bias))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> "LinearHead":
        path = Path(path)
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        try:
            classes, dim = (int(t) for t in lines[0].split())
            rows = [[float(t) for t in ln.split()] for ln in lines[1:]]
        except (ValueError, IndexError):
            raise ValueError(f"{path}: malformed head file") from None
        if len(rows) != classes + 1 or any(len(r) != dim for r in rows[:-1]) or len(rows[-1]) != classes:
            raise ValueError(f"{path}: expected {classes} weight rows of {dim} values and a bias row")
        return cls(np.array(rows[:-1]).reshape(classes, dim), np.array(rows[-1]))


def predict_types(tokens, head: LinearHead) -> list[GestureType]:
    """Per-token argmax class; exact ties go to Beat, then Imagistic."""
    if head.classes != len(_TYPE_ORDER):
        raise ValueError(f"type head must have {len(_TYPE_ORDER)} classes, has {head.classes}")
    if not tokens:
        return []
    scores = head.logits(np.stack([t.embedding for t in tokens]))
    return [_TYPE_ORDER[i] for i in np.argmax(scores, axis=1)]


def type_probabilities(tokens, head: LinearHead) -> np.ndarray:
    scores = head.logits(np.stack([t.embedding for t in tokens]))
    scores = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def smooth_types(labels, window: int = 5) -> list:
    """Centered majority vote over ``window`` words, truncated at the edges.

    When two or more labels share the top count the original label is kept.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd number, got {window}")
    labels = list(labels)
    half = window // 2
    out = []
    for i, own in enumerate(labels):
        counts = Counter(labels[max(0, i - half):i + half + 1]).most_common()
        if len(counts) > 1 and counts[0][1] == counts[1][1]:
            out.append(own)
        else:
            out.append(counts[0][0])
    return out


def select_imagistic_words(tokens, selector: LinearHead, threshold: float = 0.5) -> list[tuple[int, float]]:
    """``(token index, importance)`` for words scoring at least ``threshold``.

    Falls back to the single best-scoring word so a span never comes back empty.
    """
    if selector.classes != 1:
        raise ValueError("word selector must have exactly one output")
    if not tokens:
        return []
    z = selector.logits(np.stack([t.embedding for t in tokens]))[:, 0]
    scores = expit(z)
    picked = [(tokens[i].index, float(s)) for i, s in enumerate(scores) if s >= threshold]
    if not picked:
        # rank on logits: far below threshold the sigmoid saturates to 0
        i = int(np.argmax(z))
        picked = [(tokens[i].index, float(scores[i]))]
    return picked


def segment_spans(labels) -> list[TypedSpan]:
    labels = list(labels)
    if not labels:
        raise ValueError("cannot segment an empty label sequence")
    spans = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            spans.append(TypedSpan(start, i, labels[start]))
            start = i
    return spans


def loss_and_grad(head: LinearHead, x, y):
    """Mean cross-entropy and its gradient with respect to (weight, bias).

    For a single-output head ``y`` holds 0/1 targets and the loss is binary
    cross-entropy; otherwise ``y`` holds class indices.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n = x.shape[0]
    z = head.logits(x)
    if head.classes == 1:
        t = y.astype(float).reshape(-1)
        z1 = z[:, 0]
        # log(1 + e^z) - t z, written to avoid overflow
        loss = np.mean(np.logaddexp(0.0, z1) - t * z1)
        dz = (expit(z1) - t)[:, None] / n
    else:
        zs = z - z.max(axis=1, keepdims=True)
        logp = zs - np.log(np.exp(zs).sum(axis=1, keepdims=True))
        idx = y.astype(int).reshape(-1)
        loss = -np.mean(logp[np.arange(n), idx])
        dz = np.exp(logp)
        dz[np.arange(n), idx] -= 1.0
        dz /= n
    return float(loss), dz.T @ x, dz.sum(axis=0)


def train_head(
    x,
    y,
    classes: int,
    lr: float = 0.1,
    epochs: int = 500,
    callback=None,
) -> LinearHead:
    """Fit a linear head by full-batch gradient descent from zero initialization.

    ``callback(epoch, loss)`` is invoked with the loss before each update and
    once more after the last one.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training data must be a non-empty (N, D) array")
    if len(y) != x.shape[0]:
        raise ValueError("one label per example required")
    weight = np.zeros((classes, x.shape[1]))
    bias = np.zeros(classes)
    head = LinearHead(weight, bias)
    for epoch in range(epochs + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, gw, gb = loss_and_grad(head, x, y)
        if not np.isfinite(loss):
            raise FloatingPointError(f"loss became {loss} at epoch {epoch}; lower the learning rate")
        if callback is not None:
            callback(epoch, loss)
        if epoch == epochs:
            break
        weight = weight - lr * gw
        bias = bias - lr * gb
        if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
            raise FloatingPointError(f"parameters diverged at epoch {epoch}; lower the learning rate")
        head = LinearHead(weight, bias)
    return head
