"""Amplitude/phase estimation at a fixed frequency set.

Given estimated frequencies, the complex coefficients solve Gram * c = y
where y holds the rectangle-window periodogram values at the frequencies and
the Gram matrix entries are (1/T) integral e^{-2 pi i (nu_j - nu_k) t} dt =
e^{-i pi T (nu_j - nu_k)} sinc(T (nu_j - nu_k)).  With the full symmetric
frequency set the solution comes in conjugate pairs, so the reconstructed
rate is real-valued.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._nudft import direct_nudft
from .rates import RateModel

_CONDITION_LIMIT = 1e12
_CONJUGATE_TOL = 1e-10


class SingularGramError(RuntimeError):
    """Frequencies too close together for a stable coefficient solve."""


@dataclass
class CoefficientFit:
    """Complex least-squares fit at a symmetric frequency set.

    ``frequencies`` is ordered [0, +nu_1, -nu_1, +nu_2, -nu_2, ...]; the
    coefficient at -nu_k is the conjugate of the one at +nu_k (up to solver
    roundoff, checked at reconstruction).
    """

    frequencies: np.ndarray
    coefficients: np.ndarray
    condition: float
    residual: float
    gamma_identity: bool = False

    @property
    def positive_frequencies(self):
        return self.frequencies[1::2]

    def pair_coefficients(self):
        """Coefficients at the positive frequencies."""
        return self.coefficients[1::2]

    def to_dict(self):
        model = reconstruct_rate(self)
        return {
            "model": model.to_dict(),
            "frequencies": [float(f) for f in self.frequencies],
            "coefficients": [[z.real, z.imag] for z in self.coefficients],
            "condition": self.condition,
            "residual": self.residual,
            "gamma_identity": self.gamma_identity,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def symmetric_frequencies(positive_freqs):
    """[0, +nu_1, -nu_1, ...] from a list of positive frequencies."""
    pos = np.sort(np.asarray(positive_freqs, dtype=float))
    if pos.size and pos[0] <= 0:
        raise ValueError("frequencies must be strictly positive")
    if pos.size > 1 and np.any(np.diff(pos) == 0):
        raise ValueError("frequencies must be distinct")
    full = np.zeros(1 + 2 * pos.size)
    full[1::2] = pos
    full[2::2] = -pos
    return full


def gram_matrix(full_freqs, horizon):
    """(1/T) Fourier transform of the rectangle at all frequency differences."""
    delta = horizon * (full_freqs[:, None] - full_freqs[None, :])
    return np.exp(-1j * np.pi * delta) * np.sinc(delta)


def solve_coefficients(full_freqs, y, horizon, gamma_identity=False):
    """Solve the normal equations Gram * c = y (or c = y with identity Gram)."""
    y = np.asarray(y, dtype=complex)
    if gamma_identity:
        return y.copy(), 1.0, 0.0
    gram = gram_matrix(full_freqs, horizon)
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > _CONDITION_LIMIT:
        raise SingularGramError(
            f"Gram matrix condition {cond:.3e} exceeds {_CONDITION_LIMIT:.0e}; "
            "frequencies are too close for a stable fit"
        )
    coeffs = scipy.linalg.solve(gram, y)
    residual = float(np.abs(gram @ coeffs - y).max()) if y.size else 0.0
    return coeffs, cond, residual


def periodogram_values(events, full_freqs):
    """Rectangle-window periodogram values y at the given frequencies.

    Exploits that event weights are real: values at -nu are conjugates of
    the values at +nu, so only nonnegative frequencies are summed.
    """
    full_freqs = np.asarray(full_freqs, dtype=float)
    pos = np.abs(full_freqs)
    uniq, inverse = np.unique(pos, return_inverse=True)
    vals = direct_nudft(events.timestamps, np.ones(len(events)), uniq) / events.horizon
    out = vals[inverse]
    return np.where(full_freqs < 0, np.conj(out), out)


def fit_coefficients(events, frequencies, gamma_identity=False):
    """Fit complex amplitudes to event data at the given positive frequencies.

    ``frequencies`` may be a FrequencySet-like object (with a ``frequencies``
    attribute) or a plain sequence of positive frequencies; the symmetric
    set with DC is always used.  Setting ``gamma_identity`` skips the Gram
    correction, which reproduces the classical uncorrected estimator.
    """
    pos = getattr(frequencies, "frequencies", frequencies)
    full = symmetric_frequencies(pos)
    y = periodogram_values(events, full)
    coeffs, cond, residual = solve_coefficients(full, y, events.horizon, gamma_identity)
    return CoefficientFit(
        frequencies=full, coefficients=coeffs, condition=cond,
        residual=residual, gamma_identity=gamma_identity,
    )


def reconstruct_rate(fit, band_limit=None):
    """Convert a symmetric coefficient fit to a cosine rate model.

    Raises if the conjugate-pair structure is broken; the resulting model may
    dip below zero (it is an estimate), so it is built without the
    nonnegativity gate and records its grid minimum.
    """
    c = fit.coefficients
    scale = max(1.0, float(np.abs(c).max()) if c.size else 1.0)
    if abs(c[0].imag) > _CONJUGATE_TOL * scale:
        raise ValueError(f"DC coefficient has imaginary part {c[0].imag:.3e}")
    comps = []
    for k in range(1, len(c), 2):
        plus, minus = c[k], c[k + 1]
        if abs(plus - minus.conjugate()) > _CONJUGATE_TOL * scale:
            raise ValueError(
                f"coefficients at +/-{fit.frequencies[k]:g} are not conjugate "
                f"({plus:.6e} vs {minus:.6e})"
            )
        amp = 2.0 * abs(plus)
        if amp > 0:
            comps.append((fit.frequencies[k], amp, math.atan2(plus.imag, plus.real)))
    return RateModel.from_estimate(c[0].real, comps, band_limit=band_limit)


def rate_mse(true_rate, fitted, horizon, breakpoints=None):
    """(1/T) integral of (lambda - lambda_hat)^2 over [0, T].

    Composite 16-node Gauss-Legendre with at least 64 nodes per period of the
    fastest component; ``breakpoints`` (e.g. sawtooth corners) become panel
    boundaries so discontinuities do not degrade the quadrature.
    """
    freqs = []
    for model in (true_rate, fitted):
        comps = getattr(model, "components", ())
        freqs.extend(c.freq for c in comps)
    nu_max = max(freqs) if freqs else 1.0 / horizon
    panel = min(0.25 / nu_max, horizon)

    edges = [0.0]
    if breakpoints is not None:
        edges.extend(float(b) for b in breakpoints if 0.0 < b < horizon)
    edges.append(horizon)
    edges = np.unique(edges)

    nodes, weights = np.polynomial.legendre.leggauss(16)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        n_panels = max(1, int(math.ceil((b - a) / panel)))
        bounds = np.linspace(a, b, n_panels + 1)
        mid = 0.5 * (bounds[:-1] + bounds[1:])
        half = 0.5 * (bounds[1:] - bounds[:-1])
        t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        diff = np.asarray(true_rate.evaluate(t)) - np.asarray(fitted.evaluate(t))
        w = (half[:, None] * weights[None, :]).ravel()
        total += float(w @ (diff * diff))
    return total / horizon


@dataclass
class CovarianceDiagnostic:
    """Asymptotic covariance of the scaled frequency-estimate errors.

    Entry (k, k') is the limit covariance of T^{3/2}(nu_hat - nu) for the
    k-th and k'-th positive-frequency components.
    """

    matrix: np.ndarray
    frequencies: np.ndarray
    note: str = (
        "harmonic-match indicator on the k-k' term read as nu_j = nu_k - nu_k' "
        "(subscript typo in the source display), and the DC term carries the "
        "nu_k = nu_k' indicator"
    )


def asymptotic_frequency_covariance(model):
    """Large-sample covariance matrix of the frequency estimates.

    Evaluated from the model's amplitudes and phases; frequency-match
    indicators use exact equality within 1e-12 relative.
    """
    comps = model.components
    if not comps:
        raise ValueError("covariance diagnostic needs at least one component")
    p2 = len(comps)
    d = np.array([c.amp for c in comps])
    phi = np.array([c.phase for c in comps])
    nu = np.array([c.freq for c in comps])
    c0 = model.dc
    pi2 = math.pi**2

    def match(a, b):
        return abs(a - b) <= 1e-12 * max(abs(a), abs(b), 1e-300)

    cov = np.zeros((p2, p2))
    for k in range(p2):
        for kp in range(k, p2):
            acc = 0.0
            if match(nu[k], nu[kp]):
                acc += (4.0 * pi2 - 30.0) * math.cos(phi[k] - phi[kp]) * c0
            for j in range(p2):
                if match(nu[j], nu[k] + nu[kp]):
                    acc += d[j] * (15.0 - 2.0 * pi2) * math.cos(phi[j] - phi[k] - phi[kp])
                if match(nu[j], nu[k] - nu[kp]):
                    acc += d[j] * (
                        (8.0 * pi2 - 15.0) * math.cos(phi[j] - phi[k] + phi[kp])
                        - 6.0 * pi2 * math.cos(phi[j] + phi[k] - phi[kp])
                    )
                if match(nu[j], nu[kp] - nu[k]):
                    acc += d[j] * (
                        (8.0 * pi2 - 15.0) * math.cos(phi[j] + phi[k] - phi[kp])
                        - 6.0 * pi2 * math.cos(phi[j] - phi[k] + phi[kp])
                    )
            val = 9.0 / (1600.0 * d[k] * d[kp]) * acc
            cov[k, kp] = val
            cov[kp, k] = val
    return CovarianceDiagnostic(matrix=cov, frequencies=nu)
