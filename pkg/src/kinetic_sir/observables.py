"""Measurements on a population and the time series a run produces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import Population


class InsufficientData(ValueError):
    pass


@dataclass
class TimeSeries:
    """Label counts sampled over a run, plus per-step event counters and diagnostics.

    Fractions are always recomputed from the integer counts.
    """

    n_particles: int
    t: np.ndarray
    counts: np.ndarray
    step_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    events: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / self.n_particles

    @property
    def S(self) -> np.ndarray:
        return self.counts[:, 0] / self.n_particles

    @property
    def I(self) -> np.ndarray:
        return self.counts[:, 1] / self.n_particles

    @property
    def R(self) -> np.ndarray:
        return self.counts[:, 2] / self.n_particles

    def tail_mean(self, channel: str = "S", fraction: float = 0.1) -> float:
        values = getattr(self, channel)
        k = max(1, int(round(len(values) * fraction)))
        return float(np.mean(values[-k:]))


def sample_fractions(population) -> tuple[float, float, float]:
    labels = population.label if isinstance(population, Population) else np.asarray(population)
    c = np.bincount(labels, minlength=3)
    n = len(labels)
    return (c[0] / n, c[1] / n, c[2] / n)


def kinetic_energy(v) -> float:
    return 0.5 * float(np.einsum("ij,ij->", v, v))


def momentum(v) -> np.ndarray:
    return np.asarray(v).sum(axis=0)


class VelocityMoments(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray
    mean_speed: float
    mean_relative_speed: float


def velocity_moments(population, rng: np.random.Generator | None = None,
                     n_pairs: int = 20_000) -> VelocityMoments:
    """Sample moments of the velocity distribution.

    The mean relative speed is estimated from ``n_pairs`` random distinct pairs
    instead of all N^2 pairs.
    """
    v = population.v if isinstance(population, Population) else np.asarray(population)
    n = len(v)
    if n < 2:
        raise InsufficientData("need at least two particles")
    rng = np.random.default_rng(0) if rng is None else rng
    i = rng.integers(0, n, n_pairs)
    j = rng.integers(0, n - 1, n_pairs)
    j[j >= i] += 1
    rel = np.linalg.norm(v[i] - v[j], axis=1)
    return VelocityMoments(
        v.mean(axis=0),
        v.var(axis=0),
        float(np.linalg.norm(v, axis=1).mean()),
        float(rel.mean()),
    )


def mean_free_time_estimate(collisions_per_step, n_particles: int, t_step: float) -> float:
    """tau_hat = N dt / (2 <collisions per step>); each collision ends two free flights."""
    c = np.asarray(collisions_per_step, dtype=float)
    if len(c) < 100 or c.sum() == 0:
        raise InsufficientData(f"need >= 100 steps with collisions, got {len(c)} steps, {c.sum():g} collisions")
    return n_particles * t_step / (2.0 * c.mean())


def spatial_profile(population: Population, bins: int = 50, side_length: float = 1000.0):
    """Per-bin particle counts and infected fraction on a ``bins x bins`` grid.

    Returns ``(counts, infected_fraction)``, both indexed ``[ix, iy]``; empty
    bins get a NaN fraction.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    edges = np.linspace(0.0, side_length, bins + 1)
    x, y = population.x[:, 0], population.x[:, 1]
    counts, _, _ = np.histogram2d(x, y, bins=(edges, edges))
    inf = population.label == 1
    icounts, _, _ = np.histogram2d(x[inf], y[inf], bins=(edges, edges))
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(counts > 0, icounts / counts, np.nan)
    return counts.astype(np.int64), frac


def wave_peaks(values, prominence: float) -> list[int]:
    """Indices of the maxima of completed waves in ``values``.

    A wave is a rise of at least ``prominence`` above the preceding minimum
    followed by a fall of at least ``prominence`` below its peak, so sampling
    noise smaller than ``prominence`` never splits or creates a wave. A peak
    still rising at the end of the series is not counted.
    """
    if prominence <= 0:
        raise ValueError("prominence must be positive")
    v = np.asarray(values, dtype=float)
    peaks = []
    if v.size == 0:
        return peaks
    low, high, rising = v[0], 0, True
    for i, x in enumerate(v):
        if rising:
            if x < low:
                low, high = x, i
            elif x > v[high]:
                high = i
            if x < v[high] - prominence and v[high] - low >= prominence:
                peaks.append(high)
                rising, low = False, x
        else:
            low = min(low, x)
            if x > low + prominence:
                rising, high = True, i
    return peaks


def count_waves(values, prominence: float) -> int:
    return len(wave_peaks(values, prominence))
