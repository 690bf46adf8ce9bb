import numpy as np
import pytest

from gesture_synth.series import ScalarSeries, find_peaks, gaussian_filter, gaussian_kernel
from gesture_synth.signal import (
    DB_FLOOR,
    Waveform,
    audio_keyframes,
    estimate_duration,
    intensity,
    read_wav,
    write_wav,
)

SR = 16000


def burst_waveform(rng, duration, bursts, sr=SR, noise=1e-3):
    """Low noise floor with Hann-windowed tone bursts at the given (start, end) seconds."""
    n = int(duration * sr)
    x = noise * rng.standard_normal(n)
    t = np.arange(n) / sr
    for a, b in bursts:
        i, j = int(a * sr), int(b * sr)
        env = np.hanning(j - i)
        x[i:j] += 0.5 * env * np.sin(2 * np.pi * 220.0 * t[i:j])
    return Waveform(sr, np.clip(x, -1, 1))


class TestIntensity:
    def test_silence_hits_floor(self):
        s = intensity(Waveform(SR, np.zeros(SR)))
        assert np.all(s.values == DB_FLOOR)
        assert s.rate == pytest.approx(100.0)

    def test_full_scale_sine(self):
        t = np.arange(SR) / SR
        # 400 Hz: the 25 ms window spans exactly 10 periods
        s = intensity(Waveform(SR, np.sin(2 * np.pi * 400 * t)))
        np.testing.assert_allclose(s.values, 20 * np.log10(1 / np.sqrt(2)), atol=1e-6)

    def test_sine_long_window(self):
        t = np.arange(SR) / SR
        s = intensity(Waveform(SR, np.sin(2 * np.pi * 1003 * t)), win=0.2, hop=0.05)
        np.testing.assert_allclose(s.values, -3.0103, atol=0.01)

    def test_ones(self):
        s = intensity(Waveform(SR, np.ones(SR // 2)))
        np.testing.assert_allclose(s.values, 0.0, atol=1e-12)

    def test_frame_count(self):
        s = intensity(Waveform(SR, np.ones(SR)), win=0.025, hop=0.010)
        assert len(s) == 1 + (SR - 400) // 160

    def test_polarity_invariant(self):
        x = np.random.default_rng(0).uniform(-1, 1, SR)
        assert intensity(Waveform(SR, x)) == intensity(Waveform(SR, -x))

    def test_errors(self):
        with pytest.raises(ValueError):
            intensity(Waveform(SR, []))
        with pytest.raises(ValueError):
            intensity(Waveform(SR, np.ones(10)), win=0.01, hop=0.02)


class TestGaussian:
    def test_zero_sigma_identity(self):
        s = ScalarSeries(100, np.random.default_rng(1).normal(size=50))
        assert gaussian_filter(s, 0) == s

    def test_constant_preserved(self):
        s = ScalarSeries(100, np.full(40, -7.5))
        np.testing.assert_allclose(gaussian_filter(s, 0.05).values, -7.5, rtol=1e-14)

    def test_impulse_center_tap(self):
        # 1 / (1 + 2 (e^-1/2 + e^-2 + e^-9/2)), taps truncated at +-3
        values = np.zeros(21)
        values[10] = 1.0
        out = gaussian_filter(ScalarSeries(100, values), 0.01)
        assert out.values[10] == pytest.approx(0.39905027965245493, rel=1e-12)
        assert gaussian_kernel(1.0).size == 7

    def test_mean_preserved_away_from_edges(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            values = np.zeros(200)
            # support kept more than one kernel radius (24 samples) from both edges
            values[60:140] = rng.normal(size=80)
            s = ScalarSeries(100, values)
            out = gaussian_filter(s, 0.08)
            assert abs(out.values.mean() - values.mean()) < 1e-9

    def test_range_not_widened(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            values = rng.normal(size=int(rng.integers(1, 80)))
            out = gaussian_filter(ScalarSeries(100, values), float(rng.uniform(0, 0.2))).values
            assert out.min() >= values.min() - 1e-12
            assert out.max() <= values.max() + 1e-12


class TestAudioKeyframes:
    def test_silence(self):
        assert audio_keyframes(Waveform(SR, np.zeros(SR))) == []

    @pytest.mark.parametrize("bursts", [[(0.4, 0.7)], [(0.3, 0.6), (1.2, 1.5)]])
    def test_bursts(self, bursts):
        w = burst_waveform(np.random.default_rng(4), 2.0, bursts)
        times = audio_keyframes(w, sigma=0.1)
        assert len(times) == len(bursts)
        for t, (a, b) in zip(times, bursts):
            assert a <= t <= b
        # oracle: peak-picking straight on the smoothed envelope
        env = gaussian_filter(intensity(w), 0.1).values
        level = np.median(env) + 3.0
        oracle = [i * 0.01 for i in find_peaks(env) if env[i] >= level]
        assert times == oracle

    def test_count_nonincreasing_in_sigma(self):
        rng = np.random.default_rng(5)
        sigmas = [0.0, 0.02, 0.05, 0.1, 0.2, 0.4]
        for _ in range(20):
            x = rng.standard_normal(SR) * np.repeat(rng.uniform(0.01, 1, 20), SR // 20)
            w = Waveform(SR, np.clip(x * 0.3, -1, 1))
            counts = [len(audio_keyframes(w, s, prominence_db=None)) for s in sigmas]
            assert all(b <= a for a, b in zip(counts, counts[1:])), counts


class TestDuration:
    def test_total(self):
        total, spans = estimate_duration(["w"] * 10, 150)
        assert total == pytest.approx(4.0)
        assert len(spans) == 10

    def test_single_word(self):
        total, spans = estimate_duration(["hello"], 120)
        assert spans == [(0.0, 0.5)]

    def test_proportional(self):
        _, spans = estimate_duration(["a", "abc"], 100)
        d = [b - a for a, b in spans]
        assert d[1] / d[0] == pytest.approx(3.0)

    def test_tiles_exactly(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            words = ["x" * int(k) for k in rng.integers(0, 12, size=int(rng.integers(1, 40)))]
            total, spans = estimate_duration(words, float(rng.uniform(60, 240)))
            assert spans[0][0] == 0.0
            assert spans[-1][1] == total
            assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
            assert all(b > a for a, b in spans)

    def test_empty(self):
        with pytest.raises(ValueError):
            estimate_duration([], 150)


class TestWav:
    def test_round_trip_mono(self, tmp_path):
        x = np.round(np.random.default_rng(7).uniform(-0.9, 0.9, 1000) * 32768) / 32768
        write_wav(tmp_path / "a.wav", Waveform(8000, x))
        w = read_wav(tmp_path / "a.wav")
        assert w.sample_rate == 8000
        np.testing.assert_array_equal(w.samples, x)

    def test_stereo_downmix(self, tmp_path):
        x = np.linspace(-0.5, 0.5, 100)
        write_wav(tmp_path / "s.wav", Waveform(8000, x), channels=2)
        w = read_wav(tmp_path / "s.wav")
        assert w.samples.size == 100
        np.testing.assert_allclose(w.samples, x, atol=1 / 32768)
