"""Cyclic intensity models: a DC level plus a finite sum of cosine waves.

The canonical object is :class:`RateModel`, which stores the cosine view
(frequency, amplitude, phase) and exposes the equivalent complex-exponential
view through :meth:`RateModel.complex_coefficients`.  The exact piecewise
linear sawtooth used by the misspecification experiment lives here too, since
only the simulator is allowed to see it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Grid size for the numerical nonnegativity check at construction.
_NONNEG_GRID = 100_000
_NONNEG_TOL = -1e-9
# Components closer than this (relative) are rejected as duplicates.
_DUP_RTOL = 1e-12


@dataclass(frozen=True)
class Component:
    """One cosine wave: amp * cos(2*pi*freq*t + phase)."""

    freq: float
    amp: float
    phase: float


@dataclass(frozen=True)
class SeparationReport:
    """Frequency-gap and amplitude-range diagnostics for a model.

    ``min_gap`` is the smallest pairwise distance in the full symmetric
    frequency set {0} U {+/-freq_j}; ``g_value = min_gap * T`` is the gap in
    resolution units, and ``satisfies_a1`` records whether it clears the
    minimum of 4.  ``dynamic_range`` is max|c_k| / min|c_k| over the complex
    amplitudes including the DC level.
    """

    min_gap: float
    g_value: float
    satisfies_a1: bool
    dynamic_range: float


class RateModel:
    """Intensity dc + sum_j amp_j * cos(2*pi*freq_j*t + phase_j).

    Construction validates that all frequencies are positive, distinct and
    within ``band_limit``, normalizes phases into [0, 2*pi), and checks
    nonnegativity of the intensity on a dense grid.  Models produced by the
    coefficient estimator may dip below zero; build those through
    :meth:`from_estimate`, which records the grid minimum instead of raising.
    """

    def __init__(self, dc, components=(), band_limit=None, check_horizon=None):
        comps = [Component(float(f), float(a), _wrap_phase(p)) for f, a, p in components]
        comps.sort(key=lambda c: c.freq)
        if dc < 0:
            raise ValueError(f"dc level must be nonnegative, got {dc}")
        for c in comps:
            if not (c.freq > 0):
                raise ValueError(f"component frequency must be positive, got {c.freq}")
            if not (c.amp > 0):
                raise ValueError(f"component amplitude must be positive, got {c.amp}")
        for a, b in zip(comps, comps[1:]):
            if abs(b.freq - a.freq) <= _DUP_RTOL * max(abs(a.freq), abs(b.freq)):
                raise ValueError(f"duplicate component frequencies {a.freq} and {b.freq}")
        if band_limit is None:
            band_limit = comps[-1].freq if comps else 1.0
        if not (band_limit > 0):
            raise ValueError("band_limit must be positive")
        for c in comps:
            if c.freq > band_limit * (1 + 1e-12):
                raise ValueError(f"frequency {c.freq} exceeds band limit {band_limit}")

        self.dc = float(dc)
        self.components = tuple(comps)
        self.band_limit = float(band_limit)
        self.min_value = None

        if check_horizon is None:
            check_horizon = self._default_check_horizon()
        self._check_horizon = float(check_horizon)
        grid_min = self._grid_min(self._check_horizon)
        if grid_min < _NONNEG_TOL:
            raise ValueError(
                f"intensity dips to {grid_min:.3e} on [0, {check_horizon:g}]; "
                "model is not a valid Poisson rate"
            )
        self.min_value = grid_min

    @classmethod
    def from_estimate(cls, dc, components=(), band_limit=None, check_horizon=None):
        """Build a fitted model without the nonnegativity gate.

        The grid minimum is still computed and stored in ``min_value`` so a
        caller can see how far below zero the estimate dips.
        """
        model = cls.__new__(cls)
        comps = [Component(float(f), float(a), _wrap_phase(p)) for f, a, p in components]
        comps.sort(key=lambda c: c.freq)
        for a, b in zip(comps, comps[1:]):
            if abs(b.freq - a.freq) <= _DUP_RTOL * max(abs(a.freq), abs(b.freq)):
                raise ValueError(f"duplicate component frequencies {a.freq} and {b.freq}")
        model.dc = float(dc)
        model.components = tuple(comps)
        if band_limit is None:
            band_limit = comps[-1].freq if comps else 1.0
        model.band_limit = float(band_limit)
        if check_horizon is None:
            check_horizon = model._default_check_horizon()
        model._check_horizon = float(check_horizon)
        model.min_value = model._grid_min(model._check_horizon)
        return model

    def _default_check_horizon(self):
        if not self.components:
            return 1.0
        freqs = np.array([0.0] + [c.freq for c in self.components])
        gaps = np.diff(np.sort(freqs))
        min_gap = gaps.min() if len(gaps) else self.components[0].freq
        # Cover the slowest beat between neighbouring components as well as
        # several cycles of the slowest component.
        return max(10.0 / min_gap, 3.0 / self.components[0].freq)

    def _grid_min(self, horizon):
        t = np.linspace(0.0, horizon, _NONNEG_GRID)
        return float(self.evaluate(t).min())

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, t):
        """Intensity at time(s) t."""
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.dc)
        for c in self.components:
            out += c.amp * np.cos(TWO_PI * c.freq * t + c.phase)
        return out if out.ndim else float(out)

    def cumulative(self, t):
        """Integral of the intensity over [0, t], in closed form."""
        t = np.asarray(t, dtype=float)
        out = self.dc * t.astype(float)
        for c in self.components:
            w = TWO_PI * c.freq
            out = out + (c.amp / w) * (np.sin(w * t + c.phase) - math.sin(c.phase))
        return out if out.ndim else float(out)

    def max_intensity(self):
        """Upper bound dc + sum of amplitudes, valid for all t."""
        return self.dc + sum(c.amp for c in self.components)

    # -- views --------------------------------------------------------------

    def complex_coefficients(self):
        """Full symmetric complex view (freqs, coeffs).

        Returns frequencies [0, +f1, -f1, +f2, -f2, ...] and coefficients
        [dc, (a1/2)e^{i phi1}, conj, ...] so that
        lambda(t) = sum_k c_k exp(2*pi*i*f_k*t).
        """
        freqs = [0.0]
        coeffs = [complex(self.dc)]
        for c in self.components:
            ck = 0.5 * c.amp * complex(math.cos(c.phase), math.sin(c.phase))
            freqs.extend([c.freq, -c.freq])
            coeffs.extend([ck, ck.conjugate()])
        return np.array(freqs), np.array(coeffs)

    def separation_report(self, horizon):
        """A1/A2 diagnostics at observation length ``horizon``."""
        if not self.components:
            raise ValueError("separation report needs at least one component")
        freqs = [0.0]
        for c in self.components:
            freqs.extend([c.freq, -c.freq])
        freqs = np.array(freqs)
        diff = np.abs(freqs[:, None] - freqs[None, :])
        min_gap = float(diff[~np.eye(len(freqs), dtype=bool)].min())
        mags = [self.dc] + [0.5 * c.amp for c in self.components]
        low = min(mags)
        rng = math.inf if low == 0 else max(mags) / low
        g = min_gap * horizon
        return SeparationReport(min_gap=min_gap, g_value=g, satisfies_a1=g >= 4.0, dynamic_range=rng)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "dc": self.dc,
            "components": [{"freq": c.freq, "amp": c.amp, "phase": c.phase} for c in self.components],
            "band_limit": self.band_limit,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d, validate=True):
        comps = [(c["freq"], c["amp"], c["phase"]) for c in d["components"]]
        maker = cls if validate else cls.from_estimate
        return maker(d["dc"], comps, band_limit=d.get("band_limit"))

    @classmethod
    def from_json(cls, s, validate=True):
        return cls.from_dict(json.loads(s), validate=validate)

    def __eq__(self, other):
        if not isinstance(other, RateModel):
            return NotImplemented
        return (
            self.dc == other.dc
            and self.components == other.components
            and self.band_limit == other.band_limit
        )

    def __repr__(self):
        return f"RateModel(dc={self.dc!r}, components={list(self.components)!r}, band_limit={self.band_limit!r})"


def _wrap_phase(phase):
    p = math.fmod(float(phase), TWO_PI)
    return p + TWO_PI if p < 0 else p


class SawtoothRate:
    """Exact rate 0.1 + 0.5 * mod(t, 2*pi), for simulation only.

    This is deliberately not a :class:`RateModel`: the estimators never get
    to see the truth, only event data drawn from it.  ``fourier_truncation``
    returns the K-term sinusoidal approximation for documentation and error
    baselines.
    """

    period = TWO_PI

    def __init__(self, base=0.1, slope=0.5):
        self.base = float(base)
        self.slope = float(slope)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = self.base + self.slope * np.mod(t, self.period)
        return out if out.ndim else float(out)

    def max_intensity(self):
        return self.base + self.slope * self.period

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        full, frac = np.divmod(t, self.period)
        per_period = self.base * self.period + 0.5 * self.slope * self.period**2
        out = full * per_period + self.base * frac + 0.5 * self.slope * frac**2
        return out if out.ndim else float(out)

    def breakpoints(self, horizon):
        """Discontinuity locations in (0, horizon)."""
        n = int(math.floor(horizon / self.period))
        pts = self.period * np.arange(1, n + 1)
        return pts[pts < horizon]

    def fourier_truncation(self, n_terms, band_limit=None):
        """First ``n_terms`` of the Fourier series as a RateModel.

        mod(t, 2*pi) = pi - sum_k 2 sin(k t)/k, so the truncated rate is
        base + slope*pi + sum_k (2*slope/k) cos(k t + pi/2).
        """
        if n_terms < 1:
            raise ValueError("need at least one Fourier term")
        comps = [(k / TWO_PI, 2.0 * self.slope / k, 0.5 * math.pi) for k in range(1, n_terms + 1)]
        return RateModel.from_estimate(
            self.base + self.slope * math.pi, comps,
            band_limit=band_limit or (n_terms / TWO_PI),
        )


# -- experiment presets -----------------------------------------------------


def preset(name, **params):
    """Named experiment rates.

    ``convergence``: five equal-spaced cosines starting at 0.1 with spacing
    g/T, amplitudes U[1, 1.5] and phases U[0, 2*pi) drawn from ``seed``.
    Params: horizon, g (gap in resolution units), seed.

    ``sawtooth``: K-term Fourier truncation of the sawtooth (the exact rate is
    available as :class:`SawtoothRate`).  Params: n_terms.

    ``lunar``: two close cycles at 1/30 and 1/28 with a dynamic-range knob r.
    Params: r.
    """
    if name == "convergence":
        return _convergence_preset(**params)
    if name == "sawtooth":
        n_terms = int(params.pop("n_terms", params.pop("K", 6)))
        if params:
            raise ValueError(f"unknown sawtooth params {sorted(params)}")
        return SawtoothRate().fourier_truncation(n_terms)
    if name == "lunar":
        return _lunar_preset(**params)
    raise ValueError(f"unknown preset {name!r}; expected convergence, sawtooth or lunar")


def _convergence_preset(horizon, g, seed, n_components=5, base_freq=0.1, dc=7.5):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(0xC0,)))
    amps = rng.uniform(1.0, 1.5, size=n_components)
    phases = rng.uniform(0.0, TWO_PI, size=n_components)
    spacing = float(g) / float(horizon)
    comps = [(base_freq + k * spacing, amps[k], phases[k]) for k in range(n_components)]
    top = base_freq + (n_components - 1) * spacing
    return RateModel(dc, comps, band_limit=max(2 * top, 0.5))


def _lunar_preset(r):
    r = float(r)
    if r <= 0:
        raise ValueError("dynamic-range parameter r must be positive")
    comps = [(1.0 / 30.0, 2.0 * r, 2.6), (1.0 / 28.0, 2.0, 4.5)]
    return RateModel(2.0 * r + 2.0, comps, band_limit=0.2)
