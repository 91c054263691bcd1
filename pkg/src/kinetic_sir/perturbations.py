"""External actions on the population: supermarket, airport and diffuse jets.

All three act once per time step, triggering each eligible particle with
probability ``1 - exp(-gamma1 * dt)``. None of them changes N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GeometryError, Population, SimConfig

_S, _I, _R = 0, 1, 2


@dataclass(frozen=True)
class BoxD:
    """Axis-aligned square meeting point inside the domain."""

    center: tuple[float, float]
    side: float

    @classmethod
    def from_config(cls, cfg: SimConfig) -> "BoxD":
        c = cfg.box_center or (cfg.side_length / 2.0, cfg.side_length / 2.0)
        box = cls((float(c[0]), float(c[1])), cfg.box_side)
        box.check_inside(cfg.side_length)
        return box

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.center) - self.side / 2.0

    @property
    def area(self) -> float:
        return self.side**2

    def check_inside(self, side_length: float) -> None:
        lo = self.origin
        hi = lo + self.side
        if (lo < 0).any() or (hi > side_length).any():
            raise GeometryError(f"box {self} does not fit in [0, {side_length})^2")

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        lo = self.origin
        return np.all((x >= lo) & (x < lo + self.side), axis=-1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.origin + self.side * rng.random((n, 2))


def _trigger_prob(gamma1: float, t_step: float) -> float:
    return -math.expm1(-gamma1 * t_step)


def _draw_labels(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    """I with probability alpha, S and R with (1 - alpha) / 2 each."""
    u = rng.random(n)
    half = (1.0 - alpha) / 2.0
    out = np.full(n, _R, dtype=np.int8)
    out[u < alpha + half] = _S
    out[u < alpha] = _I
    return out


def supermarket_step(particles: Population, box: BoxD, gamma1: float, t_step: float,
                     rng: np.random.Generator) -> int:
    """Relocate triggered particles uniformly into ``box``; velocity and label are kept."""
    if gamma1 <= 0.0:
        return 0
    hit = np.flatnonzero(rng.random(len(particles)) < _trigger_prob(gamma1, t_step))
    particles.x[hit] = box.sample(rng, len(hit))
    return len(hit)


def airport_step(particles: Population, box: BoxD, gamma1: float, alpha: float, t_step: float,
                 rng: np.random.Generator) -> tuple[int, int]:
    """Replace triggered S/R particles by arrivals placed uniformly in ``box``.

    The arrival keeps the slot and the velocity of the departing particle and
    gets a fresh label. Infected particles never fly. Returns
    ``(jumps, injected_infected)``.
    """
    if gamma1 <= 0.0:
        return 0, 0
    eligible = np.flatnonzero(particles.label != _I)
    hit = eligible[rng.random(len(eligible)) < _trigger_prob(gamma1, t_step)]
    particles.x[hit] = box.sample(rng, len(hit))
    new = _draw_labels(rng, len(hit), alpha)
    particles.label[hit] = new
    return len(hit), int(np.count_nonzero(new == _I))


def diffuse_jet_step(particles: Population, gamma1: float, alpha: float, t_step: float,
                     rng: np.random.Generator) -> dict:
    """Relabel triggered S/R particles in place (no relocation).

    Returns counts per outcome channel: ``{"S": ..., "I": ..., "R": ...}``.
    """
    if gamma1 <= 0.0:
        return {"S": 0, "I": 0, "R": 0}
    eligible = np.flatnonzero(particles.label != _I)
    hit = eligible[rng.random(len(eligible)) < _trigger_prob(gamma1, t_step)]
    new = _draw_labels(rng, len(hit), alpha)
    particles.label[hit] = new
    c = np.bincount(new, minlength=3)
    return {"S": int(c[_S]), "I": int(c[_I]), "R": int(c[_R])}
