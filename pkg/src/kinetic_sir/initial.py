"""Initial particle configurations."""

from __future__ import annotations

import math

import numpy as np

from .core import I, InitialCondition, Population, SimConfig, S

# Infected seed disk covers this fraction of the domain area.
DISK_AREA_FRACTION = 0.005


def n_initial_infected(cfg: SimConfig) -> int:
    return int(math.floor(cfg.n_particles * cfg.i0 + 0.5))


def disk_radius(side_length: float) -> float:
    return side_length * math.sqrt(DISK_AREA_FRACTION / math.pi)


def sample_disk(rng: np.random.Generator, n: int, center, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.asarray(center) + np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def build_population(cfg: SimConfig, rng: np.random.Generator) -> Population:
    """Uniform positions, unit speeds with uniform direction, and the seeded infection.

    ``HOMOGENEOUS`` picks the infected uniformly at random; ``CONCENTRATED_DISK``
    additionally moves them into a disk of area ``0.005 L^2`` at the domain center.
    """
    n, L = cfg.n_particles, cfg.side_length
    x = L * rng.random((n, 2))
    theta = 2.0 * np.pi * rng.random(n)
    v = np.column_stack((np.cos(theta), np.sin(theta)))
    label = np.full(n, int(S), dtype=np.int8)
    infected = rng.choice(n, size=n_initial_infected(cfg), replace=False)
    label[infected] = int(I)
    if cfg.initial_condition == InitialCondition.CONCENTRATED_DISK:
        x[infected] = sample_disk(rng, len(infected), (L / 2.0, L / 2.0), disk_radius(L))
    return Population(x, v, label)
