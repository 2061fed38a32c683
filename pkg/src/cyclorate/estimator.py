"""Scikit-learn style front end for the full estimation pipeline."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .coefficients import fit_coefficients, reconstruct_rate
from .recovery import RecoveryConfig, run_bic_recovery, run_threshold_recovery
from .simulate import EventSeries, RngStream


def check_timestamps(X):
    """Validate and flatten raw event timestamps to a sorted 1-D float array."""
    t = np.asarray(X, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    if t.ndim != 1:
        raise ValueError(f"timestamps must be one-dimensional, got shape {t.shape}")
    if t.size and not np.all(np.isfinite(t)):
        raise ValueError("timestamps must be finite")
    if np.any(np.diff(t) < 0):
        t = np.sort(t)
    return t


def as_event_series(X, horizon=None):
    """Coerce timestamps (or an EventSeries) into an EventSeries."""
    if isinstance(X, EventSeries):
        return X
    t = check_timestamps(X)
    if horizon is None:
        raise ValueError(
            "horizon is required when fitting raw timestamps; pass horizon= "
            "to the estimator or provide an EventSeries"
        )
    if not isinstance(horizon, numbers.Real) or not horizon > 0:
        raise ValueError(f"horizon must be a positive number, got {horizon!r}")
    return EventSeries(t, float(horizon))


class CyclicRateEstimator(BaseEstimator):
    """Estimate a sinusoidal Poisson intensity from raw event timestamps.

    Runs the windowed-periodogram pipeline: frequency recovery (threshold or
    BIC selection) followed by the complex least-squares amplitude/phase fit.
    ``fit`` accepts an :class:`EventSeries` or a 1-D array of timestamps (in
    which case ``horizon`` must be set).

    Parameters mirror :class:`~cyclorate.recovery.RecoveryConfig`; ``band``
    is the frequency search limit, ``mode`` one of "tau", "tau_xi", "bic".

    Attributes (after fit): ``frequencies_`` (recovered positive
    frequencies), ``coefficients_`` (complex, over the symmetric set),
    ``rate_model_``, ``threshold_``, ``sup_h_``, ``n_events_``.
    """

    def __init__(self, band=1.0, window="hann", mode="tau_xi", horizon=None,
                 radius_factor=3.0, xi=1e-4, alpha=2.0, beta=None, gamma=4.0,
                 oversample=16, centralized=True, noise_replicates=100,
                 max_pairs=30, gamma_identity=False, random_state=0):
        self.band = band
        self.window = window
        self.mode = mode
        self.horizon = horizon
        self.radius_factor = radius_factor
        self.xi = xi
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.oversample = oversample
        self.centralized = centralized
        self.noise_replicates = noise_replicates
        self.max_pairs = max_pairs
        self.gamma_identity = gamma_identity
        self.random_state = random_state

    def _config(self):
        return RecoveryConfig(
            band=self.band, window=self.window, mode=self.mode,
            radius_factor=self.radius_factor, xi=self.xi, alpha=self.alpha,
            beta=self.beta, gamma=self.gamma, oversample=self.oversample,
            centralized=self.centralized, noise_replicates=self.noise_replicates,
            max_pairs=self.max_pairs,
        )

    def fit(self, X, y=None):
        events = as_event_series(X, self.horizon)
        cfg = self._config()
        rng = RngStream(int(self.random_state) if self.random_state is not None else 0)
        if cfg.mode == "bic":
            freq_set = run_bic_recovery(events, cfg)
        else:
            freq_set = run_threshold_recovery(events, cfg, rng)
        fit = fit_coefficients(events, freq_set, gamma_identity=self.gamma_identity)

        self.events_ = events
        self.frequency_set_ = freq_set
        self.coefficient_fit_ = fit
        self.frequencies_ = freq_set.frequencies
        self.coefficients_ = fit.coefficients
        self.rate_model_ = reconstruct_rate(fit)
        self.threshold_ = freq_set.threshold_used
        self.sup_h_ = freq_set.sup_h
        self.n_events_ = len(events)
        return self

    def predict(self, X):
        """Fitted intensity evaluated at the given times."""
        check_is_fitted(self, "rate_model_")
        t = np.asarray(X, dtype=float)
        if t.ndim == 2 and t.shape[1] == 1:
            t = t[:, 0]
        return np.asarray(self.rate_model_.evaluate(t))

    def score(self, X, y=None):
        """Poisson log-likelihood of held-out timestamps under the fit."""
        check_is_fitted(self, "rate_model_")
        events = as_event_series(X, self.horizon or getattr(self, "events_", None).horizon)
        lam = np.maximum(np.asarray(self.rate_model_.evaluate(events.timestamps)), 1e-12)
        return float(np.sum(np.log(lam)) - self.rate_model_.cumulative(events.horizon))
