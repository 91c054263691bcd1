import math

import numba
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinetic_sir.core import I, Population, SimConfig
from kinetic_sir.engine import CellGrid, Simulation, rebin, run, stream

SMALL = SimConfig(n_particles=20_000, mean_free_path=100.0, t_end=1500.0)


def one(x, v=(0.0, 0.0)):
    return Population(np.array([x], dtype=float), np.array([v], dtype=float), [0])


def test_stream_periodic_wrap():
    p = one((999.0, 0.0), (2.0, 0.0))
    stream(p, 1.0, 1000.0)
    np.testing.assert_allclose(p.x[0], [1.0, 0.0])


def test_stream_at_rest():
    p = one((12.5, 700.25))
    stream(p, 3.0, 1000.0)
    assert list(p.x[0]) == [12.5, 700.25]


@given(st.floats(0, 999.999), st.floats(0, 999.999), st.floats(-50, 50), st.floats(-50, 50),
       st.floats(0, 100))
def test_stream_stays_in_domain(x, y, vx, vy, dt):
    p = one((x, y), (vx, vy))
    stream(p, dt, 1000.0)
    assert (p.x >= 0).all() and (p.x < 1000.0).all()


def test_stream_tiny_negative_wraps_inside():
    p = one((0.0, 5.0), (-1e-20, 0.0))
    stream(p, 1.0, 1000.0)
    assert 0.0 <= p.x[0, 0] < 1000.0


def test_rebin_corner_cases():
    grid = CellGrid(30, 1000.0)
    x = np.array([[0.1, 0.1], [1000.0 - 1e-9, 510.0], [510.0, 1000.0 - 1e-9]])
    pop = Population(x, np.zeros_like(x), [0, 0, 0])
    rebin(pop, grid)
    assert list(grid.bucket_of(0, 0)) == [0]
    assert list(grid.bucket_of(29, 15)) == [1]
    assert list(grid.bucket_of(15, 29)) == [2]
    assert grid.occupancy().sum() == 3


def test_rebin_uniform_poisson():
    rng = np.random.default_rng(0)
    n, cells = 200_000, 60
    pop = Population(1000 * rng.random((n, 2)), np.zeros((n, 2)), np.zeros(n))
    grid = CellGrid(cells, 1000.0)
    rebin(pop, grid)
    occ = grid.occupancy()
    mean = n / cells**2
    assert occ.max() <= mean + 6 * math.sqrt(mean)
    assert occ.min() >= mean - 6 * math.sqrt(mean)
    # Every particle listed once, in its own cell.
    assert np.array_equal(np.sort(grid.order), np.arange(n))
    c = 37 * cells + 11
    ix = (pop.x[grid.bucket(c)] // (1000 / cells)).astype(int)
    assert (ix[:, 0] == 11).all() and (ix[:, 1] == 37).all()


def test_no_reactions_keeps_fractions():
    ts = run(SMALL.replace(beta=0.0, gamma=0.0))
    assert (ts.counts == ts.counts[0]).all()
    assert ts.t[-1] == pytest.approx(SMALL.n_steps * SMALL.t_step)


def test_disease_free_state_is_absorbing():
    ts = run(SMALL.replace(i0=0.0, perturbation="diffuse_jet", gamma1=0.01, alpha=0.0))
    assert (ts.counts[:, 1] == 0).all()


def test_disease_free_free_model_constant():
    ts = run(SMALL.replace(i0=0.0))
    assert (ts.counts == [SMALL.n_particles, 0, 0]).all()


@pytest.mark.parametrize("kind", ["none", "supermarket", "airport", "diffuse_jet"])
def test_debug_invariants_hold(kind):
    cfg = SMALL.replace(perturbation=kind, gamma1=0.01, alpha=0.1, t_end=600.0)
    ts = run(cfg, debug=True)
    assert (ts.counts.sum(axis=1) == cfg.n_particles).all()
    di = np.diff(ts.counts[:, 1])
    ev = ts.events
    assert di.sum() == ev["infections"].sum() - ev["recoveries"].sum() + ev["injected"].sum()


def test_same_seed_same_run():
    a = run(SMALL.replace(seed=5))
    b = run(SMALL.replace(seed=5))
    c = run(SMALL.replace(seed=6))
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


@pytest.mark.skipif(numba.config.NUMBA_NUM_THREADS < 2, reason="needs at least two numba threads")
def test_thread_count_does_not_change_result():
    a = run(SMALL, threads=1)
    b = run(SMALL, threads=2)
    assert np.array_equal(a.counts, b.counts)


def test_observers_and_sampling():
    seen = []
    cfg = SMALL.replace(sample_every=7)
    ts = run(cfg, observers=[lambda t, sim: seen.append(t)])
    assert len(seen) == len(ts.t)
    assert ts.t[1] == pytest.approx(7 * cfg.t_step)
    assert ts.t[-1] == pytest.approx(cfg.n_steps * cfg.t_step)
    assert len(ts.step_t) == cfg.n_steps


def test_energy_and_momentum_conserved():
    ts = run(SMALL.replace(t_end=3000.0))
    d = ts.diagnostics
    assert np.abs(d["energy"] / d["energy"][0] - 1).max() <= 1e-10
    assert np.abs(d["momentum_x"] - d["momentum_x"][0]).max() <= 1e-8 * math.sqrt(SMALL.n_particles)


def test_population_size_mismatch():
    pop = Population(np.zeros((10, 2)), np.zeros((10, 2)), np.zeros(10))
    with pytest.raises(ValueError):
        Simulation(SMALL, pop)


def test_epidemic_takes_off():
    ts = run(SimConfig(n_particles=20_000, mean_free_path=100.0, beta=1.0, gamma=1 / 200, t_end=4000.0))
    assert ts.I.max() > 0.05
    assert ts.counts[-1, I] < ts.counts.max(axis=0)[I]
