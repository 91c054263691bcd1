import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinetic_sir.ode_ref import (
    NoEpidemicRoot,
    OdeParams,
    OdeState,
    StepTooLarge,
    final_size,
    integrate,
    jet_rhs,
    jet_stationary,
    sir_rhs,
)

# Frozen from scipy.optimize.brentq at xtol=1e-15 (independent of this package).
FINAL_SIZE_K2 = 0.20318786997998
# Frozen from scipy brentq, cross-checked by solve_ivp(DOP853, rtol=1e-12) to t=400 in units of 1/gamma.
FINAL_SIZE_FIG2 = 0.3478960946181023

TABLE1 = {
    10: (0.373059, 0.157384, 0.469556),
    20: (0.385659, 0.101855, 0.512484),
    50: (0.394638, 0.0508194, 0.554544),
    100: (0.397964, 0.0278859, 0.574149),
    300: (0.400297, 0.00996697, 0.589736),
    1000: (0.401138, 0.00306936, 0.595793),
    5000: (0.401429, 0.000619549, 0.597951),
    10000: (0.401466, 0.000310134, 0.598224),
}


def table1_params(inv):
    return OdeParams(beta=3 / 40, gamma=1 / 30, m=1.0, gamma1=1 / inv, alpha=0.01)


def test_disease_free_rhs():
    assert np.array_equal(sir_rhs((0.7, 0.0, 0.3), OdeParams(0.5, 0.1)), [0, 0, 0])


def test_rhs_substitution():
    np.testing.assert_allclose(sir_rhs((0.5, 0.5, 0.0), OdeParams(1.0, 0.0)), [-0.25, 0.25, 0.0])


def test_jet_without_jumps_is_sir():
    p = OdeParams(0.3, 0.05, 2.0, 0.0, 0.4)
    y = (0.6, 0.1, 0.3)
    assert np.array_equal(jet_rhs(y, p), sir_rhs(y, p))


def test_table1_first_row_is_stationary():
    assert np.abs(jet_rhs((0.373059, 0.157384, 0.469556), table1_params(10))).max() <= 1e-5


states = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda t: t[0] + t[1] <= 1)
params = st.builds(OdeParams, st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 5),
                   st.floats(0, 1), st.floats(0, 1))


@given(states, params)
def test_rhs_sums_to_zero(si, p):
    y = (si[0], si[1], 1 - si[0] - si[1])
    assert abs(jet_rhs(y, p).sum()) <= 1e-14
    assert abs(sir_rhs(y, p).sum()) <= 1e-14


def test_integrate_constant_without_infection():
    tr = integrate(sir_rhs, (0.9, 0.0, 0.1), OdeParams(0.75, 1 / 120, 1 / 55.85), 100.0, dt=1.0)
    assert np.array_equal(tr.y, np.tile([0.9, 0.0, 0.1], (len(tr.t), 1)))


def test_integrate_fig2_final_size():
    p = OdeParams(0.75, 1 / 120, 1 / 55.85)
    s = integrate(sir_rhs, (0.995, 0.005, 0.0), p, 60_000.0, dt=1.0).final.S
    assert abs(s - 0.347) <= 1e-3
    assert s == pytest.approx(FINAL_SIZE_FIG2, abs=1e-6)


def test_integrate_jet_last_table_row():
    y = integrate(jet_rhs, (0.995, 0.005, 0.0), table1_params(10000), 1e6, dt=1.0).final
    np.testing.assert_allclose(y, TABLE1[10000], atol=1e-4)


def test_integrate_hits_t_end_and_saves():
    tr = integrate(sir_rhs, (0.99, 0.01, 0.0), OdeParams(0.5, 0.1), 10.0, dt=0.3, save_every=5)
    assert tr.t[0] == 0.0 and tr.t[-1] == pytest.approx(10.0)
    assert tr.y.shape == (len(tr.t), 3)


def test_python_fallback_matches_numba_path():
    p = OdeParams(0.5, 0.1, 1.0, 0.01, 0.1)
    a = integrate(jet_rhs, (0.99, 0.01, 0.0), p, 50.0, dt=0.5)
    b = integrate(lambda y, q: jet_rhs(y, q), (0.99, 0.01, 0.0), p, 50.0, dt=0.5)
    np.testing.assert_allclose(a.y, b.y, atol=1e-13)


def test_step_too_large():
    with pytest.raises(StepTooLarge):
        integrate(sir_rhs, (0.5, 0.5, 0.0), OdeParams(1.0, 1.0, 50.0), 10.0, dt=1.0)


@given(states, params, st.floats(0.1, 50))
def test_integration_conserves_total(si, p, t_end):
    y0 = (si[0], si[1], 1 - si[0] - si[1])
    tr = integrate(jet_rhs, y0, p, t_end)
    assert np.abs(tr.y.sum(axis=1) - 1.0).max() <= 1e-12
    assert (tr.y >= -1e-12).all()


def test_final_size_small_seed_oracle():
    assert final_size(2.0, 0.0) == pytest.approx(FINAL_SIZE_K2, abs=1e-9)
    assert final_size(2.0, 0.0) == pytest.approx(0.203188, abs=1e-6)


def test_final_size_fig2():
    k = 0.75 * (1 / 55.85) / (1 / 120)
    assert k == pytest.approx(1.6115, abs=1e-4)
    s = final_size(k, 0.005)
    assert abs(s - 0.347) <= 1e-3
    assert s == pytest.approx(FINAL_SIZE_FIG2, abs=1e-9)


def test_final_size_subcritical_flags():
    with pytest.warns(NoEpidemicRoot):
        s = final_size(0.8, 1e-3)
    assert 0.99 < s < 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoEpidemicRoot)
        assert final_size(0.5, 0.0) == 1.0


@pytest.mark.parametrize("inv", sorted(TABLE1))
def test_jet_stationary_table1(inv):
    st_ = jet_stationary(table1_params(inv))
    assert isinstance(st_, OdeState)
    np.testing.assert_allclose(st_, TABLE1[inv], atol=1e-5)
    assert np.abs(jet_rhs(st_, table1_params(inv))).max() <= 1e-12


def test_jet_stationary_row5_infected():
    assert abs(jet_stationary(table1_params(300)).I - 0.00996697) <= 1e-6


def test_table1_monotone_in_gamma1():
    rows = [jet_stationary(table1_params(inv)) for inv in sorted(TABLE1)]
    s = [r.S for r in rows]
    i = [r.I for r in rows]
    assert all(a < b for a, b in zip(s, s[1:]))
    assert all(a > b for a, b in zip(i, i[1:]))


def test_jet_stationary_alpha_one():
    st_ = jet_stationary(OdeParams(0.5, 0.1, 1.0, 0.2, 1.0))
    np.testing.assert_allclose(st_, (0.0, 0.2 / 0.3, 0.1 / 0.3), atol=1e-14)


def test_invalid_params():
    with pytest.raises(ValueError):
        OdeParams(-0.1, 0.1)
    with pytest.raises(ValueError):
        jet_stationary(OdeParams(0.1, 0.1, 1.0, 0.0, 0.1))
    with pytest.raises(ValueError):
        final_size(2.0, 1.0)
