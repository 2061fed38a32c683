"""Event generation for NHPPs (thinning) and homogeneous processes.

All randomness flows through :class:`RngStream`, a (seed, stream) pair that
maps deterministically onto a numpy generator, so replicate runs can be
parallelized and reproduced exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream identified by (seed, stream).

    The same pair yields the same draw sequence on any platform.  ``child``
    derives an unrelated stream for sub-tasks (e.g. noise replicates); the
    derivation key becomes part of the stream identity.
    """

    seed: int
    stream: int = 0
    subkey: tuple = ()

    def generator(self):
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *self.subkey))
        )

    def child(self, *key):
        return RngStream(self.seed, self.stream, self.subkey + tuple(int(k) for k in key))


class EventSeries:
    """Strictly increasing arrival times in (0, T] with horizon T."""

    def __init__(self, timestamps, horizon):
        t = np.asarray(timestamps, dtype=float)
        if t.ndim != 1:
            raise ValueError("timestamps must be one-dimensional")
        if not (horizon > 0):
            raise ValueError("horizon must be positive")
        if t.size:
            if t[0] <= 0 or t[-1] > horizon:
                raise ValueError("timestamps must lie in (0, horizon]")
            if np.any(np.diff(t) <= 0):
                raise ValueError("timestamps must be strictly increasing")
        self.timestamps = t
        self.horizon = float(horizon)

    def __len__(self):
        return self.timestamps.size

    @property
    def mean_rate(self):
        """Empirical average rate N(T) / T."""
        return self.timestamps.size / self.horizon

    def write(self, path_or_file):
        """Plain-text format: header '# T=<horizon>', one timestamp per line."""
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w") as fh:
                self._write(fh)

    def _write(self, fh):
        fh.write(f"# T={self.horizon!r}\n")
        for t in self.timestamps:
            fh.write(f"{float(t)!r}\n")

    @classmethod
    def read(cls, path_or_file):
        if hasattr(path_or_file, "read"):
            return cls._read(path_or_file)
        with open(path_or_file) as fh:
            return cls._read(fh)

    @classmethod
    def _read(cls, fh):
        header = fh.readline().strip()
        if not header.startswith("# T="):
            raise ValueError("missing '# T=<horizon>' header line")
        horizon = float(header[4:])
        values = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError(f"bad timestamp on line {line_no}: {line!r}") from exc
        return cls(np.array(values), horizon)


def simulate_homogeneous(rate, horizon, rng):
    """Homogeneous Poisson events on (0, T] via exponential gaps."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if not (horizon > 0):
        raise ValueError("horizon must be positive")
    if rate == 0:
        return EventSeries(np.empty(0), horizon)
    gen = rng.generator()
    block = max(64, int(rate * horizon * 1.1) + 32)
    times = []
    total = 0.0
    while True:
        gaps = gen.exponential(1.0 / rate, size=block)
        cum = total + np.cumsum(gaps)
        if cum[-1] > horizon:
            times.append(cum[cum <= horizon])
            break
        times.append(cum)
        total = cum[-1]
    t = np.concatenate(times) if times else np.empty(0)
    t = t[t > 0]
    return EventSeries(t, horizon)


def simulate_nhpp(rate, horizon, rng, rate_max=None):
    """NHPP events by thinning a dominating homogeneous stream.

    ``rate`` needs an ``evaluate(t)`` method (vectorized) and, if ``rate_max``
    is not given, a ``max_intensity()`` bound.  Raises if the bound is seen to
    be violated at a candidate point.
    """
    if rate_max is None:
        rate_max = rate.max_intensity()
    if rate_max < 0:
        raise ValueError("rate bound must be nonnegative")
    candidates = simulate_homogeneous(rate_max, horizon, rng.child(0))
    if len(candidates) == 0:
        return EventSeries(np.empty(0), horizon)
    values = np.asarray(rate.evaluate(candidates.timestamps), dtype=float)
    if np.any(values > rate_max * (1 + 1e-12)):
        raise ValueError(
            f"rate exceeds the supplied bound {rate_max} at a candidate point; "
            "thinning would be biased"
        )
    gen = rng.child(1).generator()
    keep = gen.uniform(size=len(candidates)) * rate_max < values
    t = candidates.timestamps[keep]
    t = _break_ties(t, horizon)
    return EventSeries(t, horizon)


def _break_ties(t, horizon):
    # Exact collisions have probability zero but would violate the strict
    # monotonicity invariant; re-jitter any colliding pair.
    while t.size > 1 and np.any(np.diff(t) <= 0):
        dup = np.where(np.diff(t) <= 0)[0] + 1
        t[dup] = np.nextafter(t[dup], horizon)
        t = np.sort(t)
    return t
