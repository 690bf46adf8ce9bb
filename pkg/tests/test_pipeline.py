import numpy as np
import pytest

from gesture_synth import laban
from gesture_synth.fixtures import BEAT_WORDS, IMAGISTIC_GROUPS, NOGESTURE_WORDS
from gesture_synth.library import EmptyIndexError, build, query_beat, query_nogesture
from gesture_synth.motion import fit_length
from gesture_synth.pipeline import (
    GenerationConfig,
    _max_speedup,
    _SpanPlan,
    _TimedToken,
    generate,
    generate_beat,
)
from gesture_synth.signal import Waveform
from gesture_synth.text import GestureType, TypedSpan, WordToken

from test_signal import burst_waveform

IMAG_WORDS = tuple(w for group in IMAGISTIC_GROUPS.values() for w in group)


def max_step(clip):
    return np.linalg.norm(np.diff(clip.frames, axis=0), axis=2).max()


def check_contract(result, lib, fps=25.0):
    """Duration, continuity and provenance invariants shared by every generated result."""
    clip = result.clip
    assert abs(clip.n_frames / fps - result.duration) <= 1 / fps + 1e-9
    assert max_step(clip) <= 2 * lib.displacement_p99
    spans = [r.span for r in result.spans]
    assert spans[0].start == 0 and spans[-1].end == len(result.words)
    assert all(a.end == b.start for a, b in zip(spans, spans[1:]))
    for r in result.spans:
        assert r.sources
        assert all(lib.type_of(s) is r.span.label for s in r.sources)


def random_text(rng, n):
    pools = [BEAT_WORDS, IMAG_WORDS, NOGESTURE_WORDS]
    words, pool = [], int(rng.integers(3))
    while len(words) < n:
        if rng.random() < 0.35:
            pool = int(rng.integers(3))
        words.append(str(rng.choice(pools[pool])))
    return " ".join(words)


def plan_for(n_frames, words=("really",), f0=0):
    toks = [_TimedToken(WordToken(w, np.zeros(1), i), (i, i + 1)) for i, w in enumerate(words)]
    return _SpanPlan(TypedSpan(0, len(words), GestureType.Beat), toks, 0.0, float(len(words)), f0, f0 + n_frames)


class TestNoGestureText:
    def test_single_span(self, fixture_lib, models):
        result = generate("the um of and a to is it", fixture_lib, models)
        assert [r.span.label for r in result.spans] == [GestureType.NoGesture]
        assert result.duration == pytest.approx(8 * 60 / 150)
        assert result.clip.n_frames == 80
        check_contract(result, fixture_lib)

    def test_sentence_initial_boundary_is_rest(self, fixture_lib, models):
        result = generate("the um of and really very must never always so", fixture_lib, models)
        nog, beat = result.spans
        assert nog.span.label is GestureType.NoGesture and beat.span.label is GestureType.Beat
        next_first = result.clip.frames[beat.clip_range[0]]
        n = nog.clip_range[1] - nog.clip_range[0]
        expect = query_nogesture(fixture_lib, laban.REST, laban.encode(next_first), n)
        assert nog.sources == (expect.id,)

    def test_between_gestures_matches_both_sides(self, fixture_lib, models):
        text = "really very must never the um of and a big huge wide tall"
        result = generate(text, fixture_lib, models, GenerationConfig(wpm=100))
        labels = [r.span.label for r in result.spans]
        assert labels == [GestureType.Beat, GestureType.NoGesture, GestureType.Imagistic]
        b, nog, im = result.spans
        prev_last = result.clip.frames[b.clip_range[1] - 1]
        next_first = result.clip.frames[im.clip_range[0]]
        n = nog.clip_range[1] - nog.clip_range[0]
        expect = query_nogesture(fixture_lib, laban.encode(prev_last), laban.encode(next_first), n)
        assert nog.sources == (expect.id,)


class TestDeterminism:
    def test_repeat_identical(self, fixture_lib, models):
        text = "really the donut is so very big and it must rise"
        a = generate(text, fixture_lib, models, GenerationConfig(seed=11))
        b = generate(text, fixture_lib, models, GenerationConfig(seed=11))
        assert a.clip.frames.tobytes() == b.clip.frames.tobytes()
        assert [r.sources for r in a.spans] == [r.sources for r in b.spans]


def test_ten_second_input(fixture_lib, models):
    text = random_text(np.random.default_rng(0), 25)
    result = generate(text, fixture_lib, models)
    assert result.duration == pytest.approx(10.0)
    assert result.clip.n_frames == 250
    check_contract(result, fixture_lib)


class TestBeat:
    def test_three_bursts_two_seconds(self, fixture_lib, models):
        audio = burst_waveform(np.random.default_rng(1), 2.0, [(0.2, 0.5), (0.8, 1.1), (1.4, 1.7)])
        result = generate("really very must never always", fixture_lib, models, audio=audio)
        (rep,) = result.spans
        assert result.clip.n_frames == 50
        assert rep.keyframe_source == "audio"
        assert len(rep.targets) == 3
        entry = query_beat(fixture_lib, 3, 50)
        assert rep.sources == (entry.id,)
        src = fixture_lib.clip(entry.id)
        for m in rep.alignment:
            assert abs(m.achieved - m.target) <= 1
            assert np.array_equal(result.clip.frames[m.achieved], src.frames[m.source_frame])
        for t, (a, b) in zip(rep.targets, [(0.2, 0.5), (0.8, 1.1), (1.4, 1.7)]):
            assert a * 25 - 1 <= t <= b * 25 + 1

    def test_identity_when_keyframes_coincide(self, fixture_lib):
        entry = max(fixture_lib.beat, key=lambda e: e.n_keyframes)
        clip = fixture_lib.clip(entry.id)
        times = [k / 25.0 for k in entry.keyframes]
        out, src, matches, origin, _ = generate_beat(plan_for(entry.n_frames), times, fixture_lib, GenerationConfig())
        assert src == (entry.id,) and origin == "audio"
        assert np.array_equal(out.frames, clip.frames)
        assert all(m.achieved == m.target for m in matches)

    def test_silence_uses_one_keyframe_per_word(self, fixture_lib, models):
        words = "really very must never"
        result = generate(words, fixture_lib, models, audio=Waveform(16000, np.zeros(32000)))
        (rep,) = result.spans
        assert rep.keyframe_source == "words"
        assert len(rep.targets) == 4
        assert query_beat(fixture_lib, 4, result.clip.n_frames).id in rep.sources

    def test_no_audio_uses_words(self, fixture_lib, models):
        result = generate("really very must", fixture_lib, models)
        assert result.spans[0].keyframe_source == "words"
        assert len(result.spans[0].targets) == 3

    def test_audio_sets_duration(self, fixture_lib, models):
        audio = Waveform(16000, np.zeros(int(3.3 * 16000)))
        result = generate("really very", fixture_lib, models, audio=audio)
        assert result.duration == pytest.approx(3.3)
        assert abs(result.clip.n_frames - 3.3 * 25) <= 1
        assert result.word_times[-1][1] == pytest.approx(3.3)


class TestImagistic:
    def test_single_word_single_member(self, fixture_lib_k4, models):
        config = GenerationConfig(wpm=30)
        result = generate("donut", fixture_lib_k4, models, config)
        (rep,) = result.spans
        assert rep.span.label is GestureType.Imagistic
        assert len(rep.sources) == 1
        src = fixture_lib_k4.clip(rep.sources[0])
        cluster = [c for c in fixture_lib_k4.imagistic if rep.sources[0] in c.members][0]
        assert cluster.members == rep.sources
        expect = fit_length(src, result.clip.n_frames, _max_speedup(src, fixture_lib_k4, config))
        assert np.array_equal(result.clip.frames, expect.frames)

    def test_two_clusters(self, fixture_lib_k4, models):
        result = generate("donut tall", fixture_lib_k4, models, GenerationConfig(wpm=20))
        (rep,) = result.spans
        assert len(rep.sources) == 2
        owners = [next(c.cluster_id for c in fixture_lib_k4.imagistic if s in c.members) for s in rep.sources]
        assert owners[0] != owners[1]
        assert result.clip.n_frames == rep.frame_range[1]
        check_contract(result, fixture_lib_k4)

    def test_seeded_sampling(self, fixture_lib, models):
        text = "big circle tall"
        runs = [generate(text, fixture_lib, models, GenerationConfig(seed=4, wpm=40)).spans[0].sources for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]


class TestEndAtRest:
    def test_final_pose_is_rest(self, fixture_lib, models):
        result = generate("really big donut so", fixture_lib, models, GenerationConfig(end_at_rest=True))
        assert np.array_equal(result.clip.frames[-1], fixture_lib.skeleton.rest_pose())
        assert result.clip.n_frames == generate("really big donut so", fixture_lib, models).clip.n_frames
        check_contract(result, fixture_lib)


class TestErrors:
    def test_missing_partition(self, fixture_records, table, models):
        beat_only = build([r for r in fixture_records if r.gesture_type is GestureType.Beat], table)
        with pytest.raises(EmptyIndexError, match="NoGesture"):
            generate("the um of and", beat_only, models)

    def test_empty_text(self, fixture_lib, models):
        with pytest.raises(ValueError):
            generate(" ... ", fixture_lib, models)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GenerationConfig(window=4)
        with pytest.raises(ValueError):
            GenerationConfig(fps=0)


def test_random_pipelines_hold_contract(fixture_lib, models):
    rng = np.random.default_rng(2)
    for i in range(30):
        text = random_text(rng, int(rng.integers(1, 30)))
        config = GenerationConfig(seed=i, wpm=float(rng.uniform(90, 200)), end_at_rest=bool(rng.random() < 0.3))
        check_contract(generate(text, fixture_lib, models, config), fixture_lib)
