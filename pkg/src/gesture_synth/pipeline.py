"""Text (and optional speech audio) to a single gesture clip.

Words are typed as Beat / Imagistic / No-Gesture, grouped into spans, and
each span is filled by its type's generator from the gesture library. Spans
are laid out on the word timeline and joined with short linear bridges that
are carved out of the neighbouring spans, so the output length always
matches the speech duration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import laban
from .library import EmptyIndexError, GestureLibrary, query_beat, query_imagistic, query_nogesture
from .motion import MotionClip, blend, fit_length, max_displacement, retime
from .signal import Waveform, audio_keyframes, estimate_duration
from .text import (
    EmbeddingTable,
    GestureType,
    LinearHead,
    TypedSpan,
    embed,
    predict_types,
    segment_spans,
    select_imagistic_words,
    smooth_types,
    tokenize,
)


@dataclass(frozen=True)
class GenerationConfig:
    fps: float = 25.0
    transition_seconds: float = 0.3
    motion_sigma: float = 0.12
    intensity_sigma: float = 0.10
    wpm: float = 150.0
    window: int = 5
    selector_threshold: float = 0.5
    seed: int = 0
    end_at_rest: bool = False
    prominence_db: float = 3.0
    intensity_win: float = 0.025
    intensity_hop: float = 0.010
    # Fastest allowed joint displacement per frame, in multiples of the
    # library's 99th-percentile displacement; 0 disables the cap.
    speed_limit: float = 2.0

    def __post_init__(self):
        for name in ("fps", "wpm", "intensity_win", "intensity_hop"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("transition_seconds", "motion_sigma", "intensity_sigma", "speed_limit"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("smoothing window must be a positive odd number")
        if not 0 <= self.selector_threshold <= 1:
            raise ValueError("selector_threshold must lie in [0, 1]")

    @property
    def transition_frames(self) -> int:
        return int(np.floor(self.transition_seconds * self.fps + 0.5))


@dataclass(frozen=True)
class TextModels:
    """Embedding table plus the type classifier and the Imagistic word selector."""

    table: EmbeddingTable
    type_head: LinearHead
    selector: LinearHead


@dataclass(frozen=True)
class KeyframeMatch:
    """A source keyframe placed on an audio (or word) keyframe, in output frames."""

    target: int
    achieved: int
    source_id: str
    source_frame: int


@dataclass
class SpanReport:
    span: TypedSpan
    words: tuple
    start_time: float
    end_time: float
    frame_range: tuple  # frames allotted on the timeline, [start, end)
    clip_range: tuple  # frames covered by the span's own clip, [start, end)
    sources: tuple = ()
    alignment: tuple = ()
    keyframe_source: str | None = None  # "audio", "words" or None
    targets: tuple = ()  # Beat keyframe targets, output frames


@dataclass
class GenerationResult:
    clip: MotionClip
    spans: list
    duration: float
    words: tuple
    word_times: tuple
    transitions: tuple = field(default_factory=tuple)


@dataclass
class _SpanPlan:
    span: TypedSpan
    tokens: list
    t0: float
    t1: float
    f0: int
    f1: int
    cut_left: int = 0
    cut_right: int = 0

    @property
    def clip_start(self) -> int:
        return self.f0 + self.cut_left

    @property
    def clip_len(self) -> int:
        return self.f1 - self.f0 - self.cut_left - self.cut_right


def _round(x) -> int:
    return int(np.floor(x + 0.5))


def _spread(n: int, m: int) -> list[int]:
    """``m`` evenly spread, distinct indices into ``range(n)`` (m <= n)."""
    if m == 1:
        return [(n - 1) // 2]
    return [_round(i * (n - 1) / (m - 1)) for i in range(m)]


def _span_bounds(starts, total_frames: int, min_len: int = 2) -> list[int]:
    b = [0, *(_round(s) for s in starts[1:]), total_frames]
    for i in range(1, len(b) - 1):
        b[i] = max(b[i], b[i - 1] + min_len)
    for i in range(len(b) - 2, 0, -1):
        b[i] = min(b[i], b[i + 1] - min_len)
    return b


def _beat_targets(plan: _SpanPlan, keyframe_times, fps: float) -> tuple[list[int], str | None]:
    """Keyframe targets local to the span clip; audio first, word midpoints as fallback."""
    lo, n = plan.clip_start, plan.clip_len
    if keyframe_times:
        local = sorted({_round(t * fps) - lo for t in keyframe_times})
        local = [f for f in local if 1 <= f <= n - 2]
        if local:
            return local, "audio"
    if n < 3:
        return [], None
    dur = plan.t1 - plan.t0
    local = set()
    for tok_t0, tok_t1 in (tok.times for tok in plan.tokens):
        frac = ((tok_t0 + tok_t1) / 2 - plan.t0) / dur if dur > 0 else 0.5
        local.add(min(n - 2, max(1, _round(frac * (n - 1)))))
    return sorted(local), "words"


def generate_beat(plan: _SpanPlan, keyframe_times, library: GestureLibrary, config: GenerationConfig):
    """Retrieve a Beat clip and warp its motion keyframes onto the target keyframes.

    Returns ``(clip, source ids, keyframe matches, target origin, targets)``
    with matches and targets in output-timeline frames.
    """
    n = plan.clip_len
    if n < 2:
        raise ValueError("Beat span has no frames to fill")
    targets, source = _beat_targets(plan, keyframe_times, config.fps)
    entry = query_beat(library, max(1, len(targets)), n)
    src_clip = library.clip(entry.id)
    src = list(entry.keyframes)
    if targets and src:
        m = min(len(src), len(targets))
        src = [src[i] for i in _spread(len(src), m)]
        dst = [targets[i] for i in _spread(len(targets), m)]
    else:
        src, dst = [], []
    out = retime(src_clip, src, dst, n)
    matches = tuple(
        KeyframeMatch(plan.clip_start + d, plan.clip_start + k, entry.id, s)
        for s, d, k in zip(src, dst, out.keyframes)
    )
    return out, (entry.id,), matches, source, tuple(plan.clip_start + t for t in targets)


def _max_speedup(clip: MotionClip, library: GestureLibrary, config: GenerationConfig) -> float:
    limit = config.speed_limit * library.displacement_p99
    disp = max_displacement(clip)
    if limit <= 0 or disp == 0:
        return np.inf
    return limit / disp


def generate_imagistic(plan: _SpanPlan, library: GestureLibrary, models: TextModels, config: GenerationConfig, rng):
    """Sample one library gesture per important word and chain them with linear bridges.

    If the chained gestures cannot fit the span without exceeding the speed
    cap, the lowest-scoring words are dropped (at least one gesture is kept).
    """
    if not library.imagistic:
        raise EmptyIndexError("Imagistic index is empty")
    picked = select_imagistic_words(plan.tokens, models.selector, config.selector_threshold)
    by_index = {t.index: t for t in plan.tokens}
    sampled = []
    for idx, score in picked:
        emb = by_index[idx].embedding
        if not np.any(emb):
            continue
        _, rid = query_imagistic(library, emb, rng)
        sampled.append((idx, score, rid))
    if not sampled:
        cluster = library.imagistic[int(rng.integers(len(library.imagistic)))]
        sampled.append((plan.tokens[0].index, 0.0, cluster.members[int(rng.integers(len(cluster.members)))]))

    tr = config.transition_frames
    n = plan.clip_len
    keep, length = [], -tr
    for item in sorted(sampled, key=lambda it: (-it[1], it[0])):
        clip = library.clip(item[2])
        budget = _max_speedup(clip, library, config) * (n - 1) + 1
        if keep and length + tr + clip.n_frames > budget:
            continue
        keep.append(item)
        length += tr + clip.n_frames
    sources = [rid for _, _, rid in sorted(keep)]
    merged = library.clip(sources[0])
    for rid in sources[1:]:
        merged = blend(merged, library.clip(rid), tr)
    return fit_length(merged, n, _max_speedup(merged, library, config)), tuple(sources)


def generate_nogesture(plan: _SpanPlan, prev_pose, next_pose, library: GestureLibrary, config: GenerationConfig):
    """Pick the No-Gesture clip whose boundary symbols match the neighbouring poses."""
    sk = library.skeleton
    prev_sym = laban.encode(sk.rest_pose() if prev_pose is None else prev_pose, sk)
    next_sym = laban.encode(sk.rest_pose() if next_pose is None else next_pose, sk)
    entry = query_nogesture(library, prev_sym, next_sym, plan.clip_len)
    clip = library.clip(entry.id)
    return fit_length(clip, plan.clip_len, _max_speedup(clip, library, config)), (entry.id,)


def _plan(spans, tokens, total: float, config: GenerationConfig) -> tuple[list[_SpanPlan], list[int], int, int]:
    fps = config.fps
    total_frames = max(2, _round(total * fps))
    if total_frames < 2 * len(spans):
        raise ValueError(
            f"speech of {total:.3f} s is too short for {len(spans)} spans at {fps} fps"
        )
    starts = [tokens[s.start].times[0] * fps for s in spans]
    tr = config.transition_frames
    # Short spans are widened (when the total allows) so every bridge has room.
    min_len = max(2, min(2 + tr, total_frames // len(spans)))
    b = _span_bounds(starts, total_frames, min_len)
    plans = [
        _SpanPlan(s, tokens[s.start:s.end], tokens[s.start].times[0], tokens[s.end - 1].times[1], b[i], b[i + 1])
        for i, s in enumerate(spans)
    ]
    rest_tail = 0
    if config.end_at_rest:
        last = plans[-1]
        room = last.f1 - last.f0 - 2
        if room >= 2:
            rest_tail = min(room, 2 + tr)
            last.cut_right = rest_tail
    bridges = []
    for left, right in zip(plans, plans[1:]):
        # Each side gives at most half its spare frames when it also borders another span.
        spare_left = left.f1 - left.f0 - 2 - left.cut_left - left.cut_right
        spare_right = right.f1 - right.f0 - 2 - right.cut_right
        if right is not plans[-1]:
            spare_right //= 2
        give_left = max(0, min(tr // 2, spare_left))
        give_right = max(0, min(tr - tr // 2, spare_right))
        left.cut_right += give_left
        right.cut_left += give_right
        bridges.append(give_left + give_right)
    return plans, bridges, rest_tail, total_frames


def generate(
    text: str,
    library: GestureLibrary,
    models: TextModels,
    config: GenerationConfig = GenerationConfig(),
    audio: Waveform | None = None,
) -> GenerationResult:
    """Generate a gesture clip for ``text``.

    When ``audio`` is given its length sets the speech duration (word timings
    are scaled uniformly) and Beat keyframes come from its intensity peaks;
    otherwise the speaking-rate model supplies timings and Beat spans use one
    keyframe per word.
    """
    words = tokenize(text)
    if not words:
        raise ValueError("input text contains no words")
    tokens = embed(words, models.table)
    labels = smooth_types(predict_types(tokens, models.type_head), config.window)
    spans = segment_spans(labels)

    total, times = estimate_duration(words, config.wpm)
    if audio is not None:
        if audio.duration <= 0:
            raise ValueError("audio is empty")
        scale = audio.duration / total
        times = [(a * scale, b * scale) for a, b in times]
        total = audio.duration
    tokens = [_TimedToken(t, times[t.index]) for t in tokens]

    for s in spans:
        if not library.has(s.label):
            raise EmptyIndexError(f"library has no {s.label.name} entries but the text needs them")

    plans, bridges, rest_tail, total_frames = _plan(spans, tokens, total, config)
    key_times = None
    if audio is not None:
        key_times = audio_keyframes(
            audio, config.intensity_sigma, config.prominence_db, config.intensity_win, config.intensity_hop
        )

    rng = np.random.default_rng(config.seed)
    clips: list = [None] * len(plans)
    reports = []
    for plan in plans:
        reports.append(
            SpanReport(
                plan.span,
                tuple(words[plan.span.start:plan.span.end]),
                plan.t0,
                plan.t1,
                (plan.f0, plan.f1),
                (plan.clip_start, plan.clip_start + plan.clip_len),
            )
        )
    for i, plan in enumerate(plans):
        if plan.span.label is GestureType.Beat:
            clip, src, matches, ksrc, targets = generate_beat(plan, key_times, library, config)
            reports[i].alignment = matches
            reports[i].keyframe_source = ksrc
            reports[i].targets = targets
        elif plan.span.label is GestureType.Imagistic:
            clip, src = generate_imagistic(plan, library, models, config, rng)
        else:
            continue
        clips[i] = clip
        reports[i].sources = src
    rest = library.skeleton.rest_pose()
    for i, plan in enumerate(plans):
        if plan.span.label is not GestureType.NoGesture:
            continue
        prev_pose = clips[i - 1].frames[-1] if i > 0 else None
        if i + 1 < len(plans):
            next_pose = clips[i + 1].frames[0]
        else:
            next_pose = rest if config.end_at_rest else None
        clips[i], reports[i].sources = generate_nogesture(plan, prev_pose, next_pose, library, config)

    out = clips[0]
    for clip, n_bridge in zip(clips[1:], bridges):
        out = blend(out, clip, n_bridge)
    if rest_tail:
        rest_clip = MotionClip(np.stack([rest, rest]), config.fps, (), library.skeleton)
        out = blend(out, rest_clip, rest_tail - 2)
    assert out.n_frames == total_frames, (out.n_frames, total_frames)
    return GenerationResult(out, reports, total, tuple(words), tuple(times), tuple(bridges))


class _TimedToken:
    """A word token with its (start, end) speech time attached."""

    __slots__ = ("text", "embedding", "index", "times")

    def __init__(self, token, times):
        self.text = token.text
        self.embedding = token.embedding
        self.index = token.index
        self.times = times
