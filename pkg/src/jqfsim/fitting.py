"""Rate and frequency extraction from sampled trajectories."""

from __future__ import annotations

import numpy as np
from scipy.optimize import curve_fit


def fit_exponential_rate(times, values, t_min=None, t_max=None) -> float:
    """Decay rate from a log-linear least-squares fit of values ~ exp(-r t).

    Restricted to the window [t_min, t_max] when given; values must be
    positive there.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = np.ones(t.shape, dtype=bool)
    if t_min is not None:
        mask &= t >= t_min
    if t_max is not None:
        mask &= t <= t_max
    t, v = t[mask], v[mask]
    if t.size < 2:
        raise ValueError("fit window contains fewer than two samples")
    if np.any(v <= 0.0):
        raise ValueError("values must be positive for a log-linear fit")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return -float(slope)


def envelope_peaks(times, values):
    """Times and heights of strict local maxima of |values|."""
    t = np.asarray(times, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    idx = np.nonzero(interior)[0] + 1
    return t[idx], v[idx]


def fit_envelope_decay(times, values, stationary=None) -> float:
    """Decay rate of the oscillation envelope of ``values``.

    Peaks of |values - stationary| are fit log-linearly; ``stationary``
    defaults to the mean of the last 10% of samples.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if stationary is None:
        tail = max(2, v.size // 10)
        stationary = float(v[-tail:].mean())
    pt, pv = envelope_peaks(t, v - stationary)
    if pt.size < 3:
        raise ValueError("too few envelope peaks to fit a decay rate")
    return fit_exponential_rate(pt, pv)


def fit_oscillation(times, values):
    """Fit values ~ C + A exp(-k t) cos(w t + phi); returns (w, k).

    Initial frequency from the sample spectrum, then refined by nonlinear
    least squares.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 8:
        raise ValueError("too few samples for an oscillation fit")
    dt = t[1] - t[0]
    centered = v - v.mean()
    spec = np.abs(np.fft.rfft(centered * np.hanning(v.size)))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(v.size, dt)
    w0 = freqs[np.argmax(spec[1:]) + 1]
    a0 = centered.max() - centered.min()

    def model(tt, c, a, k, w, phi):
        return c + a * np.exp(-k * tt) * np.cos(w * tt + phi)

    p0 = [v.mean(), 0.5 * a0, 0.1 * w0, w0, 0.0]
    popt, _ = curve_fit(model, t, v, p0=p0, maxfev=20000)
    return abs(popt[3]), abs(popt[2])
