"""Quantitative comparison of observable time series.

Turns the visual back-end comparisons into numbers: windowed RMS and
maximum deviations, the dominant oscillation frequency, and the
collapse / revival landmarks of an imbalance signal.
"""

from __future__ import annotations

import numpy as np


def window_mask(times: np.ndarray, window: tuple[float, float] | None
                ) -> np.ndarray:
    if window is None:
        return np.ones(len(times), dtype=bool)
    t0, t1 = window
    if t0 > times[-1] or t1 < times[0]:
        raise ValueError(f"window [{t0}, {t1}] lies outside the time grid")
    return (times >= t0) & (times <= t1)


def rms(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


def dominant_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """Angular frequency of the largest FFT peak (mean removed).

    The peak position is refined by quadratic interpolation of the
    spectrum around the maximum bin, which matters on short windows.
    """
    y = np.asarray(series, float)
    y = y - y.mean()
    spec = np.abs(np.fft.rfft(y))
    freqs = 2 * np.pi * np.fft.rfftfreq(len(y), times[1] - times[0])
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < len(spec) - 1:
        s0, s1, s2 = spec[k - 1], spec[k], spec[k + 1]
        denom = s0 - 2 * s1 + s2
        shift = 0.5 * (s0 - s2) / denom if denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return float(freqs[k] + shift * (freqs[1] - freqs[0]))


def envelope(times: np.ndarray, series: np.ndarray,
             half_width: float) -> np.ndarray:
    """Running maximum of |series| over +-half_width around each point."""
    y = np.abs(np.asarray(series, float))
    dt = times[1] - times[0]
    k = max(1, int(round(half_width / dt)))
    return np.array([y[max(0, i - k):i + k + 1].max() for i in range(len(y))])


def collapse_time(times: np.ndarray, series: np.ndarray, amplitude: float,
                  period: float, frac: float = 0.1) -> float:
    """Earliest time at which the oscillation envelope stays below
    frac * amplitude; the envelope window is one oscillation period."""
    env = envelope(times, series, period)
    below = env < frac * abs(amplitude)
    if not below.any():
        return float(times[-1])
    return float(times[np.argmax(below)])


def revival_amplitude(times: np.ndarray, series: np.ndarray,
                      window: tuple[float, float]) -> float:
    """max |series| over a post-collapse window."""
    m = window_mask(times, window)
    return float(np.max(np.abs(np.asarray(series)[m])))


def compare_metrics(times: np.ndarray, series_a: np.ndarray,
                    series_b: np.ndarray,
                    window: tuple[float, float] | None = None,
                    revival_window: tuple[float, float] | None = None
                    ) -> dict[str, float]:
    """Deviation and landmark metrics of series_a vs series_b.

    Both series must share ``times``.  ``revival_amplitude`` refers to
    series_a over ``revival_window`` (defaults to the comparison
    window).
    """
    times = np.asarray(times, float)
    if len(series_a) != len(times) or len(series_b) != len(times):
        raise ValueError("series do not share the time grid")
    m = window_mask(times, window)
    a = np.asarray(series_a, float)[m]
    b = np.asarray(series_b, float)[m]
    return {
        "rms": rms(a, b),
        "max_abs_dev": float(np.max(np.abs(a - b))),
        "revival_amplitude": revival_amplitude(
            times, series_a, revival_window if revival_window is not None
            else (times[m][0], times[m][-1])),
        "dominant_frequency": dominant_frequency(times[m], a),
    }
