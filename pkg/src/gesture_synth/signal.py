"""Audio analysis: intensity envelope, audio keyframes and a speaking-rate duration model."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import ScalarSeries, find_peaks, gaussian_filter

__all__ = [
    "Waveform",
    "intensity",
    "gaussian_filter",
    "audio_keyframes",
    "estimate_duration",
    "read_wav",
    "write_wav",
    "DB_FLOOR",
]

DB_FLOOR = -96.0


@dataclass(frozen=True, eq=False)
class Waveform:
    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).reshape(-1)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def slice(self, start: float, end: float) -> "Waveform":
        """Sub-waveform between two times in seconds."""
        a = max(0, int(round(start * self.sample_rate)))
        b = min(self.samples.size, int(round(end * self.sample_rate)))
        return Waveform(self.sample_rate, self.samples[a:max(a, b)])


def intensity(w: Waveform, win: float = 0.025, hop: float = 0.010) -> ScalarSeries:
    """Frame-wise RMS level in dBFS, floored at -96 dB.

    Frame ``i`` covers samples ``[i*hop, i*hop + win)``; the series rate is
    ``1 / hop``. A waveform shorter than one window yields a single frame.
    """
    if not (win >= hop > 0):
        raise ValueError(f"need win >= hop > 0, got win={win}, hop={hop}")
    x = w.samples
    if x.size == 0:
        raise ValueError("cannot compute intensity of an empty waveform")
    win_n = max(1, int(round(win * w.sample_rate)))
    hop_n = max(1, int(round(hop * w.sample_rate)))
    if x.size <= win_n:
        frames = x[None, :]
    else:
        n = 1 + (x.size - win_n) // hop_n
        idx = np.arange(n)[:, None] * hop_n + np.arange(win_n)[None, :]
        frames = x[idx]
    rms = np.sqrt(np.mean(frames**2, axis=1))
    floor = 10.0 ** (DB_FLOOR / 20.0)
    return ScalarSeries(1.0 / hop, 20.0 * np.log10(np.maximum(rms, floor)))


def audio_keyframes(
    w: Waveform,
    sigma: float = 0.10,
    prominence_db: float | None = 3.0,
    win: float = 0.025,
    hop: float = 0.010,
) -> list[float]:
    """Times (seconds) of the local maxima of the smoothed intensity envelope.

    Peaks whose smoothed level is less than ``prominence_db`` above the median
    level are discarded; pass ``None`` to keep every maximum.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    smoothed = gaussian_filter(intensity(w, win, hop), sigma).values
    peaks = find_peaks(smoothed)
    if prominence_db is not None:
        level = np.median(smoothed) + prominence_db
        peaks = [i for i in peaks if smoothed[i] >= level]
    return [i * hop for i in peaks]


def estimate_duration(words, rate_wpm: float = 150.0) -> tuple[float, list[tuple[float, float]]]:
    """Speaking time for ``words`` and per-word ``(start, end)`` intervals.

    The total is ``len(words) * 60 / rate_wpm``; each word's share is
    proportional to ``max(1, len(word))``. Intervals tile ``[0, total]``.
    """
    words = list(words)
    if not words:
        raise ValueError("estimate_duration needs at least one word")
    if not rate_wpm > 0:
        raise ValueError("rate_wpm must be positive")
    total = len(words) * 60.0 / rate_wpm
    weights = np.array([max(1, len(wd)) for wd in words], dtype=float)
    bounds = np.concatenate([[0.0], np.cumsum(weights) / weights.sum() * total])
    bounds[-1] = total
    return total, [(float(bounds[i]), float(bounds[i + 1])) for i in range(len(words))]


def read_wav(path) -> Waveform:
    """Read 16-bit PCM WAV; multichannel audio is averaged down to mono."""
    with wave.open(str(path), "rb") as f:
        if f.getsampwidth() != 2:
            raise ValueError(f"{path}: only 16-bit PCM is supported")
        n_ch = f.getnchannels()
        rate = f.getframerate()
        raw = f.readframes(f.getnframes())
    data = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    if n_ch > 1:
        data = data.reshape(-1, n_ch).mean(axis=1)
    return Waveform(rate, data)


def write_wav(path, w: Waveform, channels: int = 1) -> Path:
    pcm = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    if channels > 1:
        pcm = np.repeat(pcm[:, None], channels, axis=1).reshape(-1)
    with wave.open(str(path), "wb") as f:
        f.setnchannels(channels)
        f.setsampwidth(2)
        f.setframerate(int(w.sample_rate))
        f.writeframes(pcm.tobytes())
    return Path(path)
