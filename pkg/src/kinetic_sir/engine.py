"""Time stepping: free flight on the torus, cell binning, and the per-step sub-steps.

One step of length ``dt = tau / 4`` runs, in this fixed order:
stream -> rebin -> collide + infect -> recover -> perturb -> observe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numba
import numpy as np
from numba import njit

from . import epidemic, kinetics, perturbations
from .core import Perturbation, Population, SimConfig, rng_stream, validate_config
from .initial import build_population
from .observables import TimeSeries, kinetic_energy

log = logging.getLogger(__name__)

# Stream indices under the master seed.
STREAM_INIT, STREAM_COLLIDE, STREAM_INFECT, STREAM_RECOVER, STREAM_PERTURB = range(5)

EVENT_KEYS = ("collisions", "infections", "recoveries", "injected", "jumps")
DIAGNOSTIC_SAMPLES = 100


class InvariantViolation(RuntimeError):
    pass


@dataclass
class CellGrid:
    """Particle indices bucketed by cell; cell ``c = iy * n + ix`` (row-major)."""

    cells_per_side: int
    side_length: float
    order: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    starts: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))

    @property
    def cell_side(self) -> float:
        return self.side_length / self.cells_per_side

    @property
    def n_cells(self) -> int:
        return self.cells_per_side**2

    def bucket(self, c: int) -> np.ndarray:
        return self.order[self.starts[c]:self.starts[c + 1]]

    def bucket_of(self, ix: int, iy: int) -> np.ndarray:
        return self.bucket(iy * self.cells_per_side + ix)

    def occupancy(self) -> np.ndarray:
        return np.diff(self.starts)


@njit(cache=True)
def _counting_sort(x, n, h):
    npart = x.shape[0]
    cell = np.empty(npart, dtype=np.int64)
    counts = np.zeros(n * n + 1, dtype=np.int64)
    for p in range(npart):
        ix = int(x[p, 0] / h)
        iy = int(x[p, 1] / h)
        if ix >= n:
            ix = n - 1
        if iy >= n:
            iy = n - 1
        c = iy * n + ix
        cell[p] = c
        counts[c + 1] += 1
    for c in range(n * n):
        counts[c + 1] += counts[c]
    starts = counts.copy()
    fill = counts[:-1].copy()
    order = np.empty(npart, dtype=np.int64)
    for p in range(npart):
        c = cell[p]
        order[fill[c]] = p
        fill[c] += 1
    return order, starts


def stream(particles: Population, t_step: float, side_length: float) -> None:
    """Free flight for ``t_step`` with periodic wrap into ``[0, L)``."""
    x = particles.x
    x += particles.v * t_step
    np.mod(x, side_length, out=x)
    # fmod of tiny negatives can round up to exactly L.
    x[x >= side_length] -= side_length


def rebin(particles: Population, grid: CellGrid) -> None:
    grid.order, grid.starts = _counting_sort(particles.x, grid.cells_per_side, grid.cell_side)


def set_threads(threads: Optional[int]) -> None:
    if threads is None:
        return
    numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


class Simulation:
    """A single DSMC run that can be advanced step by step."""

    def __init__(self, cfg: SimConfig, population: Optional[Population] = None, debug: bool = False):
        self.cfg = validate_config(cfg)
        self.debug = debug
        self.population = population if population is not None else build_population(
            cfg, rng_stream(cfg.seed, STREAM_INIT)
        )
        if len(self.population) != cfg.n_particles:
            raise ValueError("population size does not match n_particles")
        self.grid = CellGrid(cfg.cells_per_side, cfg.side_length)
        self.rng_collide = rng_stream(cfg.seed, STREAM_COLLIDE)
        self.rng_infect = rng_stream(cfg.seed, STREAM_INFECT)
        self.rng_recover = rng_stream(cfg.seed, STREAM_RECOVER)
        self.rng_perturb = rng_stream(cfg.seed, STREAM_PERTURB)
        self.box = perturbations.BoxD.from_config(cfg) if cfg.localized else None
        self.step_index = 0

    @property
    def t(self) -> float:
        return self.step_index * self.cfg.t_step

    def step(self) -> dict:
        cfg, pop = self.cfg, self.population
        dt = cfg.t_step
        before = pop.counts() if self.debug else None

        stream(pop, dt, cfg.side_length)
        rebin(pop, self.grid)
        pairs = kinetics.sweep(self.grid.order, self.grid.starts, pop.v, cfg, self.rng_collide)
        infections = epidemic.apply_infection(pairs, pop, cfg.beta, self.rng_infect)
        recoveries = epidemic.apply_recovery(pop, cfg.gamma, dt, self.rng_recover)

        jumps = injected = 0
        if cfg.perturbation == Perturbation.SUPERMARKET:
            jumps = perturbations.supermarket_step(pop, self.box, cfg.gamma1, dt, self.rng_perturb)
        elif cfg.perturbation == Perturbation.AIRPORT:
            jumps, injected = perturbations.airport_step(
                pop, self.box, cfg.gamma1, cfg.alpha, dt, self.rng_perturb
            )
        elif cfg.perturbation == Perturbation.DIFFUSE_JET:
            channels = perturbations.diffuse_jet_step(pop, cfg.gamma1, cfg.alpha, dt, self.rng_perturb)
            jumps = sum(channels.values())
            injected = channels["I"]

        self.step_index += 1
        events = {
            "collisions": len(pairs),
            "infections": infections,
            "recoveries": recoveries,
            "injected": injected,
            "jumps": jumps,
        }
        if self.debug:
            self._check(before, events)
        return events

    def _check(self, before, events) -> None:
        pop, cfg = self.population, self.cfg
        after = pop.counts()
        if after.sum() != cfg.n_particles:
            raise InvariantViolation(f"label counts {after} do not sum to N={cfg.n_particles}")
        d_i = after[1] - before[1]
        expected = events["infections"] - events["recoveries"] + events["injected"]
        if d_i != expected:
            raise InvariantViolation(f"step {self.step_index}: dI={d_i} but events give {expected}")
        if not ((pop.x >= 0).all() and (pop.x < cfg.side_length).all()):
            raise InvariantViolation(f"step {self.step_index}: particle outside [0, L)")


def run(cfg: SimConfig, observers: Iterable[Callable] = (), population: Optional[Population] = None,
        threads: Optional[int] = None, debug: bool = False) -> TimeSeries:
    """Run ``cfg`` to ``t_end`` and return the sampled time series.

    ``observers`` are called as ``obs(t, sim)`` at every fraction sample.
    Velocity diagnostics are taken about ``DIAGNOSTIC_SAMPLES`` times per run.
    """
    set_threads(threads)
    sim = Simulation(cfg, population, debug=debug)
    pop = sim.population
    n_steps = cfg.n_steps
    diag_every = max(1, n_steps // DIAGNOSTIC_SAMPLES)
    observers = list(observers)

    t, counts = [], []
    events = {k: np.zeros(n_steps, dtype=np.int64) for k in EVENT_KEYS}
    diag = {k: [] for k in ("t", "energy", "momentum_x", "momentum_y", "var_vx", "var_vy", "mean_speed")}

    def sample():
        t.append(sim.t)
        counts.append(pop.counts())
        for obs in observers:
            obs(sim.t, sim)

    def diagnose():
        v = pop.v
        p = v.sum(axis=0)
        var = v.var(axis=0)
        diag["t"].append(sim.t)
        diag["energy"].append(kinetic_energy(v))
        diag["momentum_x"].append(p[0])
        diag["momentum_y"].append(p[1])
        diag["var_vx"].append(var[0])
        diag["var_vy"].append(var[1])
        diag["mean_speed"].append(float(np.sqrt(np.einsum("ij,ij->i", v, v)).mean()))

    sample()
    diagnose()
    for k in range(n_steps):
        ev = sim.step()
        for key in EVENT_KEYS:
            events[key][k] = ev[key]
        if sim.step_index % cfg.sample_every == 0 or sim.step_index == n_steps:
            sample()
        if sim.step_index % diag_every == 0:
            diagnose()
    log.debug("run finished: %d steps, %d collisions", n_steps, events["collisions"].sum())

    return TimeSeries(
        n_particles=cfg.n_particles,
        t=np.asarray(t),
        counts=np.asarray(counts, dtype=np.int64),
        step_t=cfg.t_step * np.arange(1, n_steps + 1),
        events=events,
        diagnostics={k: np.asarray(v) for k, v in diag.items()},
    )
