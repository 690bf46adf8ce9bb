"""Uniformly sampled 1-D signals, Gaussian smoothing and peak picking.

Shared by the motion side (motion energy) and the audio side (intensity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ScalarSeries:
    """A uniformly sampled scalar signal.

    Parameters
    ----------
    rate : float
        Samples per second.
    values : np.ndarray, shape (N,)
        Finite sample values, N >= 1.
    """

    rate: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("ScalarSeries needs a non-empty 1-D array of values")
        if not np.all(np.isfinite(values)):
            raise ValueError("ScalarSeries values must be finite")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "rate", float(self.rate))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, ScalarSeries):
            return NotImplemented
        return self.rate == other.rate and np.array_equal(self.values, other.values)

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.rate


def gaussian_kernel(sigma_samples: float) -> np.ndarray:
    """Normalized Gaussian taps truncated at +-3 sigma (at least one tap)."""
    if sigma_samples < 0:
        raise ValueError("sigma must be non-negative")
    if sigma_samples == 0:
        return np.ones(1)
    radius = int(np.ceil(3.0 * sigma_samples))
    k = np.arange(-radius, radius + 1, dtype=float)
    w = np.exp(-0.5 * (k / sigma_samples) ** 2)
    return w / w.sum()


def gaussian_filter(series: ScalarSeries, sigma: float) -> ScalarSeries:
    """Smooth ``series`` with a Gaussian of width ``sigma`` seconds.

    Taps falling outside the series are dropped and the remaining weights
    renormalized, so constants are preserved and the value range never widens.
    ``sigma == 0`` returns the series unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return series
    w = gaussian_kernel(sigma * series.rate)
    radius = (w.size - 1) // 2
    n = len(series)
    num = np.convolve(series.values, w, mode="full")[radius:radius + n]
    den = np.convolve(np.ones(n), w, mode="full")[radius:radius + n]
    return ScalarSeries(series.rate, num / den)


def find_peaks(values) -> list[int]:
    """Interior local maxima of a 1-D sequence.

    Index ``i`` qualifies when ``v[i-1] < v[i]`` and the run of values equal to
    ``v[i]`` starting at ``i`` ends in a strict decrease. A plateau therefore
    reports its first index, and plateaus touching either end never count.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    peaks = []
    i = 1
    while i < n - 1:
        if v[i - 1] < v[i]:
            j = i
            while j + 1 < n and v[j + 1] == v[i]:
                j += 1
            if j + 1 < n and v[j + 1] < v[i]:
                peaks.append(i)
            i = j + 1
        else:
            i += 1
    return peaks


def extract_keyframes(series: ScalarSeries, sigma: float) -> list[int]:
    """Indices of local maxima of ``series`` after Gaussian smoothing (sigma in seconds)."""
    return find_peaks(gaussian_filter(series, sigma).values)
