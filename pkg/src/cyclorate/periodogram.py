"""Windowed point-process periodograms over uniform frequency grids.

H(nu) = (1/T) sum_j w(t_j) e^{-2 pi i nu t_j}; the centralized variant
subtracts the spectrum of the empirical mean rate,
H_c(nu) = H(nu) - (N(T)/T) w~(nu)/T, which removes the peak at the origin.
Grids restrict to nu >= 0: H(-nu) is the conjugate of H(nu) for real data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._nudft import direct_nudft, nudft_point, nudft_uniform
from .windows import WindowSpec, window_transform, window_value

_GOLDEN_TOL_FACTOR = 1e-4  # refinement tolerance is this / T


class Peak(NamedTuple):
    frequency: float
    magnitude: float
    refined: bool


@dataclass
class SpectrumGrid:
    """Periodogram samples on a uniform grid over [0, band]."""

    frequencies: np.ndarray
    values: np.ndarray
    grid_step: float
    centralized: bool
    window: WindowSpec
    _times: np.ndarray = field(repr=False)
    _weights: np.ndarray = field(repr=False)
    _mean_rate: float = field(repr=False)

    @property
    def magnitudes(self):
        return np.abs(self.values)

    @property
    def horizon(self):
        return self.window.horizon

    @property
    def band(self):
        return float(self.frequencies[-1])

    def exact_value(self, nu):
        """Direct-sum H(nu) (centralized if the grid is), full precision."""
        T = self.horizon
        h = nudft_point(self._times, self._weights, nu) / T
        if self.centralized:
            h -= self._mean_rate * window_transform(self.window, nu) / T
        return h

    def exact_magnitude(self, nu):
        return abs(self.exact_value(nu))

    def to_csv(self, path_or_file):
        """Columns freq, re, im, mag."""
        if hasattr(path_or_file, "write"):
            self._to_csv(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._to_csv(fh)

    def _to_csv(self, fh):
        writer = csv.writer(fh)
        writer.writerow(["freq", "re", "im", "mag"])
        for nu, h in zip(self.frequencies, self.values):
            writer.writerow([repr(float(nu)), repr(float(h.real)),
                             repr(float(h.imag)), repr(float(abs(h)))])


def evaluate_periodogram(events, window, band, oversample=16, centralized=False,
                         method="auto"):
    """Sample the windowed periodogram on a uniform grid over [0, band].

    ``oversample`` grid points per 1/T of frequency (at least 8, so the Hann
    main lobe is covered by 30+ samples).  ``method`` selects the evaluation
    path: "fast" (gridded NUFFT), "direct" (literal sums), or "auto".
    """
    if abs(events.horizon - window.horizon) > 1e-9 * max(events.horizon, window.horizon):
        raise ValueError(
            f"event horizon {events.horizon} does not match window horizon {window.horizon}"
        )
    if not (band > 0):
        raise ValueError("band must be positive")
    oversample = int(oversample)
    if oversample < 8:
        raise ValueError("oversample must be at least 8")
    T = window.horizon
    step = 1.0 / (oversample * T)
    n_freqs = int(math.floor(band / step + 1e-9)) + 1
    if n_freqs < 3:
        raise ValueError("frequency grid is empty; enlarge band or oversample")
    freqs = step * np.arange(n_freqs)

    weights = window_value(window, events.timestamps)
    if method == "direct":
        values = direct_nudft(events.timestamps, weights, freqs) / T
    elif method in ("fast", "auto"):
        values = nudft_uniform(events.timestamps, weights, step, n_freqs) / T
    else:
        raise ValueError(f"unknown evaluation method {method!r}")

    mean_rate = events.mean_rate
    if centralized:
        values = values - mean_rate * window_transform(window, freqs) / T
    return SpectrumGrid(
        frequencies=freqs, values=values, grid_step=step, centralized=centralized,
        window=window, _times=events.timestamps, _weights=weights, _mean_rate=mean_rate,
    )


# -- frequency regions ------------------------------------------------------


def region_complement(intervals, lo, hi):
    """Subtract the open interval (lo, hi) from a list of closed intervals."""
    out = []
    for a, b in intervals:
        if b <= lo or a >= hi:
            out.append((a, b))
            continue
        if a < lo:
            out.append((a, lo))
        if b > hi:
            out.append((hi, b))
    return out


def _in_region(points, intervals):
    points = np.asarray(points)
    mask = np.zeros(points.shape, dtype=bool)
    for a, b in intervals:
        mask |= (points >= a) & (points <= b)
    return mask


def _containing_interval(nu, intervals):
    for a, b in intervals:
        if a <= nu <= b:
            return a, b
    return None


# -- peak hunting -----------------------------------------------------------


def find_peaks(grid, region, refine=True):
    """Stationary peaks of |H| inside ``region`` (a list of intervals).

    A grid point is a stationary peak when its magnitude is >= both
    neighbours' and the point plus both neighbouring midpoints lie in the
    region, so maxima created by a region boundary are excluded.  Peaks are
    refined by golden-section maximization of the exact magnitude within
    their grid bracket (clipped to the region) and returned sorted by
    magnitude, ties broken toward lower frequency.
    """
    mags = grid.magnitudes
    freqs = grid.frequencies
    if len(freqs) < 3 or not region:
        return []
    inner = slice(1, -1)
    stationary = (mags[inner] >= mags[:-2]) & (mags[inner] >= mags[2:])
    mid = 0.5 * (freqs[:-1] + freqs[1:])
    ok = (
        stationary
        & _in_region(freqs[inner], region)
        & _in_region(mid[:-1], region)
        & _in_region(mid[1:], region)
    )
    idx = np.where(ok)[0] + 1

    peaks = []
    tol = _GOLDEN_TOL_FACTOR / grid.horizon
    for i in idx:
        if refine:
            lo, hi = freqs[i - 1], freqs[i + 1]
            hold = _containing_interval(freqs[i], region)
            if hold is not None:
                lo, hi = max(lo, hold[0]), min(hi, hold[1])
            nu, mag = _golden_refine(grid, lo, hi, tol)
            if mag < mags[i]:
                nu, mag = freqs[i], mags[i]
                peaks.append(Peak(float(nu), float(mag), False))
            else:
                peaks.append(Peak(float(nu), float(mag), True))
        else:
            peaks.append(Peak(float(freqs[i]), float(mags[i]), False))
    peaks.sort(key=lambda p: (-p.magnitude, p.frequency))
    return _dedupe_plateau(peaks, grid.grid_step)


def _dedupe_plateau(peaks, step):
    # Exact magnitude ties on adjacent grid points refine to the same
    # optimum; keep one representative per step-width cluster.
    out = []
    for p in peaks:
        if any(abs(p.frequency - q.frequency) <= step * (1 + 1e-9) and
               abs(p.magnitude - q.magnitude) <= 1e-12 * max(1.0, q.magnitude)
               for q in out):
            continue
        out.append(p)
    return out


def _golden_refine(grid, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    a, b = float(lo), float(hi)
    h = b - a
    c = a + invphi2 * h
    d = a + invphi * h
    fc = grid.exact_magnitude(c)
    fd = grid.exact_magnitude(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = grid.exact_magnitude(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = grid.exact_magnitude(d)
    if fc >= fd:
        return c, fc
    return d, fd


def sup_magnitude(grid, refine="golden"):
    """sup over the band of |H|, from the grid max plus local refinement.

    ``refine``: "golden" maximizes the exact magnitude in the argmax bracket;
    "parabolic" interpolates the three points around the argmax (cheap, used
    by the noise calibration); None returns the raw grid maximum.
    """
    mags = grid.magnitudes
    if mags.size == 0:
        raise ValueError("empty spectrum grid")
    i = int(np.argmax(mags))
    best = float(mags[i])
    if refine is None or mags.size < 3:
        return best
    lo = grid.frequencies[max(i - 1, 0)]
    hi = grid.frequencies[min(i + 1, mags.size - 1)]
    if refine == "golden":
        _, val = _golden_refine(grid, lo, hi, _GOLDEN_TOL_FACTOR / grid.horizon)
        return max(best, val)
    if refine == "parabolic":
        if 0 < i < mags.size - 1:
            y0, y1, y2 = mags[i - 1], mags[i], mags[i + 1]
            denom = y0 - 2.0 * y1 + y2
            if denom < 0:
                peak = y1 - 0.125 * (y2 - y0) ** 2 / denom
                return float(max(best, peak))
        return best
    raise ValueError(f"unknown refinement {refine!r}")
