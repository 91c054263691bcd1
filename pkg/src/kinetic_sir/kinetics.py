"""Binary collision laws and the per-cell no-time-counter collision sweep.

Three kernels are supported: hard spheres, the unit-speed semidiscrete
reflection model, and Maxwellian molecules. Candidate pairs per cell are
drawn with a majorant ``vmax`` and accepted with probability
``|v - v*| / vmax`` (hard spheres, semidiscrete) or always (Maxwellian).
The expected number of candidates in a cell holding ``n`` particles is

    n (n - 1) / (2 nbar) * (dt / tau) * (vmax / <|v - v*|>_eq)

with ``nbar`` the mean occupancy, so the per-particle collision frequency is
``1 / tau`` at uniform density and equilibrium, and scales with local density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import CrossSection, SimConfig

HARD_SPHERE, SEMIDISCRETE, MAXWELLIAN = 0, 1, 2

KERNEL_CODE = {
    CrossSection.HARD_SPHERE: HARD_SPHERE,
    CrossSection.SEMIDISCRETE: SEMIDISCRETE,
    CrossSection.MAXWELLIAN: MAXWELLIAN,
}

# Uniforms consumed per candidate pair: first index, second index, acceptance, impact angle.
UNIFORMS_PER_CANDIDATE = 4


class DegenerateRelativeVelocity(ValueError):
    pass


@dataclass(frozen=True)
class CollisionOutcome:
    v_prime: np.ndarray
    v_star_prime: np.ndarray
    omega: np.ndarray


def collide_elastic(v, v_star, omega) -> CollisionOutcome:
    """Momentum- and energy-conserving exchange along the unit vector ``omega``."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    omega = np.asarray(omega, dtype=float)
    transfer = omega * np.dot(v - v_star, omega)
    return CollisionOutcome(v - transfer, v_star + transfer, omega)


def collide_semidiscrete(v, v_star, omega) -> CollisionOutcome:
    """Reflect both unit velocities across the line orthogonal to ``omega``."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    omega = np.asarray(omega, dtype=float)
    vp = v - 2.0 * omega * np.dot(v, omega)
    vsp = v_star - 2.0 * omega * np.dot(v_star, omega)
    return CollisionOutcome(vp / np.linalg.norm(vp), vsp / np.linalg.norm(vsp), omega)


@njit(cache=True, inline="always")
def _omega(kind, gx, gy, g, u):
    if kind == MAXWELLIAN:
        theta = 2.0 * math.pi * u
        return math.cos(theta), math.sin(theta)
    # Density cos(theta)/2 on (-pi/2, pi/2) about g: sin(theta) = 2u - 1.
    s = 2.0 * u - 1.0
    c = math.sqrt(max(0.0, 1.0 - s * s))
    ex, ey = gx / g, gy / g
    return c * ex - s * ey, c * ey + s * ex


@njit(cache=True)
def _omega_batch(kind, gx, gy, u):
    out = np.empty((u.shape[0], 2))
    g = math.hypot(gx, gy)
    for k in range(u.shape[0]):
        wx, wy = _omega(kind, gx, gy, g, u[k])
        out[k, 0] = wx
        out[k, 1] = wy
    return out


def sample_omega(v_rel, cross_section, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw impact directions for relative velocity ``v_rel``.

    Hard spheres and the semidiscrete model use the density proportional to
    ``max(omega . v_rel, 0)``; Maxwellian molecules draw uniformly on the circle.
    Returns shape (2,) or (size, 2).
    """
    kind = KERNEL_CODE[CrossSection(cross_section)]
    gx, gy = (float(c) for c in v_rel)
    if kind != MAXWELLIAN and gx == 0.0 and gy == 0.0:
        raise DegenerateRelativeVelocity("impact direction undefined for zero relative velocity")
    u = rng.random(1 if size is None else size)
    out = _omega_batch(kind, gx, gy, u)
    return out[0] if size is None else out


@njit(cache=True, parallel=True)
def collide_cells(order, starts, v, kind, cand_start, vmax, uniforms, pair_a, pair_b, accepted):
    """Process every cell's candidate pairs in place.

    ``order[starts[c]:starts[c+1]]`` lists the particles of cell ``c``; candidate
    ``k`` of that cell reads ``uniforms[k]`` and writes slot ``k`` of the pair
    buffers. Cells touch disjoint particles and disjoint slots, so the result does
    not depend on the thread count.
    """
    n_cells = starts.shape[0] - 1
    for c in prange(n_cells):
        s0 = starts[c]
        nc = starts[c + 1] - s0
        vm = vmax[c]
        for k in range(cand_start[c], cand_start[c + 1]):
            accepted[k] = False
            if nc < 2:
                continue
            i = int(uniforms[k, 0] * nc)
            if i >= nc:
                i = nc - 1
            j = int(uniforms[k, 1] * (nc - 1))
            if j >= nc - 1:
                j = nc - 2
            if j >= i:
                j += 1
            a = order[s0 + i]
            b = order[s0 + j]
            gx = v[a, 0] - v[b, 0]
            gy = v[a, 1] - v[b, 1]
            g = math.sqrt(gx * gx + gy * gy)
            if kind != MAXWELLIAN:
                if g <= 0.0 or uniforms[k, 2] * vm >= g:
                    continue
            elif g <= 0.0:
                gx, gy, g = 1.0, 0.0, 1.0
            wx, wy = _omega(kind, gx, gy, g, uniforms[k, 3])
            if kind == SEMIDISCRETE:
                da = v[a, 0] * wx + v[a, 1] * wy
                db = v[b, 0] * wx + v[b, 1] * wy
                ax = v[a, 0] - 2.0 * wx * da
                ay = v[a, 1] - 2.0 * wy * da
                bx = v[b, 0] - 2.0 * wx * db
                by = v[b, 1] - 2.0 * wy * db
                na = math.sqrt(ax * ax + ay * ay)
                nb = math.sqrt(bx * bx + by * by)
                v[a, 0] = ax / na
                v[a, 1] = ay / na
                v[b, 0] = bx / nb
                v[b, 1] = by / nb
            else:
                d = gx * wx + gy * wy
                v[a, 0] -= wx * d
                v[a, 1] -= wy * d
                v[b, 0] += wx * d
                v[b, 1] += wy * d
            pair_a[k] = a
            pair_b[k] = b
            accepted[k] = True


@njit(cache=True)
def cell_max_speed(order, starts, v):
    n_cells = starts.shape[0] - 1
    out = np.zeros(n_cells)
    for c in range(n_cells):
        m = 0.0
        for p in range(starts[c], starts[c + 1]):
            q = order[p]
            s = v[q, 0] * v[q, 0] + v[q, 1] * v[q, 1]
            if s > m:
                m = s
        out[c] = math.sqrt(m)
    return out


def candidate_counts(occupancy, vmax, cfg: SimConfig, rng: np.random.Generator, mean_occupancy=None):
    """Number of candidate pairs per cell, stochastically rounded so the mean is exact."""
    n = np.asarray(occupancy, dtype=np.float64)
    nbar = cfg.mean_occupancy if mean_occupancy is None else mean_occupancy
    mean = n * (n - 1.0) / (2.0 * nbar) * (cfg.t_step / cfg.tau)
    if cfg.cross_section != CrossSection.MAXWELLIAN:
        mean = mean * (np.asarray(vmax) / cfg.mean_relative_speed)
    base = np.floor(mean)
    extra = rng.random(len(mean)) < (mean - base)
    return (base + extra).astype(np.int64)


def sweep(order, starts, v, cfg: SimConfig, rng: np.random.Generator, mean_occupancy=None):
    """One collision sweep over all cells. Returns accepted pairs as an (M, 2) index array."""
    occupancy = np.diff(starts)
    vmax = 2.0 * cell_max_speed(order, starts, v)
    counts = candidate_counts(occupancy, vmax, cfg, rng, mean_occupancy)
    cand_start = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=cand_start[1:])
    k = int(cand_start[-1])
    uniforms = rng.random((k, UNIFORMS_PER_CANDIDATE))
    pair_a = np.empty(k, dtype=np.int64)
    pair_b = np.empty(k, dtype=np.int64)
    accepted = np.zeros(k, dtype=np.bool_)
    collide_cells(
        order, starts, v, KERNEL_CODE[cfg.cross_section], cand_start, vmax, uniforms,
        pair_a, pair_b, accepted,
    )
    return np.column_stack((pair_a[accepted], pair_b[accepted]))


def collision_step(v_cell, cfg: SimConfig, rng: np.random.Generator, mean_occupancy=None):
    """Collide the particles of a single cell in place.

    ``v_cell`` is the (n, 2) velocity block of the cell. Returns the number of
    accepted collisions and the list of collided local index pairs, in the order
    they happened.
    """
    v_cell = np.asarray(v_cell)
    n = len(v_cell)
    if n < 2:
        return 0, []
    order = np.arange(n, dtype=np.int64)
    starts = np.array([0, n], dtype=np.int64)
    work = np.ascontiguousarray(v_cell, dtype=np.float64)
    pairs = sweep(order, starts, work, cfg, rng, mean_occupancy)
    if work is not v_cell:
        v_cell[...] = work
    return len(pairs), [(int(a), int(b)) for a, b in pairs]
