"""Label dynamics: S + I -> I + I on collision, I -> R at constant rate."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import Population

_S, _I, _R = 0, 1, 2


def _labels(particles) -> np.ndarray:
    return particles.label if isinstance(particles, Population) else particles


@njit(cache=True)
def _infect(pairs, labels, beta, u):
    count = 0
    for k in range(pairs.shape[0]):
        a = pairs[k, 0]
        b = pairs[k, 1]
        la = labels[a]
        lb = labels[b]
        if la == _S and lb == _I:
            if u[k] < beta:
                labels[a] = _I
                count += 1
        elif la == _I and lb == _S:
            if u[k] < beta:
                labels[b] = _I
                count += 1
    return count


def apply_infection(pairs, particles, beta: float, rng: np.random.Generator) -> int:
    """Apply infection to collided pairs, in collision order.

    Each ``{S, I}`` pair turns its S member into I with probability ``beta``;
    one uniform is consumed per pair whatever its labels. Returns the number of
    S -> I flips.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    u = rng.random(len(pairs))
    return int(_infect(pairs, _labels(particles), float(beta), u))


def apply_recovery(particles, gamma: float, t_step: float, rng: np.random.Generator) -> int:
    """Each infected particle recovers with probability ``1 - exp(-gamma * t_step)``."""
    labels = _labels(particles)
    if gamma <= 0.0:
        return 0
    infected = np.flatnonzero(labels == _I)
    p = -math.expm1(-gamma * t_step)
    hit = infected[rng.random(len(infected)) < p]
    labels[hit] = _R
    return len(hit)
