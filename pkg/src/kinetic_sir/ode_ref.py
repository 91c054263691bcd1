"""Mean-field reference systems for the label fractions.

Free SIR flow with collision frequency ``m``::

    S' = -beta m I S,  I' = beta m I S - gamma I,  R' = gamma I

and the diffuse-jet flow, which adds S/R -> {S, I, R} relabelling at rate
``gamma1`` (I with probability alpha, S and R with (1 - alpha) / 2 each).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from numba import njit


class StepTooLarge(RuntimeError):
    pass


class NoConvergence(RuntimeError):
    pass


class NoEpidemicRoot(RuntimeWarning):
    """beta/gamma <= 1: the free flow has no outbreak, S stays on the 1 - i0 branch."""


class OdeState(NamedTuple):
    S: float
    I: float
    R: float


@dataclass(frozen=True)
class OdeParams:
    beta: float
    gamma: float
    m: float = 1.0
    gamma1: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("beta", "gamma", "m", "gamma1", "alpha"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.alpha > 1:
            raise ValueError("alpha must be <= 1")

    @property
    def packed(self) -> np.ndarray:
        return np.array([self.beta * self.m, self.gamma, self.gamma1, self.alpha])

    def default_dt(self) -> float:
        rates = [r for r in (self.beta * self.m, self.gamma, self.gamma1) if r > 0]
        return (1.0 / max(rates) if rates else 1.0) / 50.0


@njit(cache=True, inline="always")
def _field(s, i, r, bm, g, g1, a):
    infection = bm * i * s
    ds = -infection + g1 * (-(1.0 + a) / 2.0 * s + (1.0 - a) / 2.0 * r)
    di = infection - g * i + g1 * a * (s + r)
    dr = g * i + g1 * (-(1.0 + a) / 2.0 * r + (1.0 - a) / 2.0 * s)
    return ds, di, dr


def jet_rhs(state, p: OdeParams) -> np.ndarray:
    s, i, r = state
    return np.array(_field(float(s), float(i), float(r), p.beta * p.m, p.gamma, p.gamma1, p.alpha))


def sir_rhs(state, p: OdeParams) -> np.ndarray:
    """Free SIR vector field; ``gamma1`` and ``alpha`` in ``p`` are ignored."""
    s, i, r = state
    return np.array(_field(float(s), float(i), float(r), p.beta * p.m, p.gamma, 0.0, 0.0))


@njit(cache=True)
def _rk4(y0, bm, g, g1, a, dt, n_steps, save_every, lo, hi):
    n_out = n_steps // save_every + 1
    if n_steps % save_every:
        n_out += 1
    out = np.empty((n_out, 3))
    steps = np.empty(n_out, dtype=np.int64)
    s, i, r = y0[0], y0[1], y0[2]
    out[0, 0], out[0, 1], out[0, 2] = s, i, r
    steps[0] = 0
    k = 1
    for n in range(1, n_steps + 1):
        a1, b1, c1 = _field(s, i, r, bm, g, g1, a)
        h = 0.5 * dt
        a2, b2, c2 = _field(s + h * a1, i + h * b1, r + h * c1, bm, g, g1, a)
        a3, b3, c3 = _field(s + h * a2, i + h * b2, r + h * c2, bm, g, g1, a)
        a4, b4, c4 = _field(s + dt * a3, i + dt * b3, r + dt * c3, bm, g, g1, a)
        s += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        i += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        r += dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        if not (lo <= s <= hi and lo <= i <= hi and lo <= r <= hi):
            return out[:k], steps[:k], n
        if n % save_every == 0 or n == n_steps:
            out[k, 0], out[k, 1], out[k, 2] = s, i, r
            steps[k] = n
            k += 1
    return out[:k], steps[:k], -1


class Trajectory(NamedTuple):
    t: np.ndarray
    y: np.ndarray

    @property
    def final(self) -> OdeState:
        return OdeState(*map(float, self.y[-1]))


_BOUND = 1e-9


def integrate(rhs: Callable, state0, p: OdeParams, t_end: float, dt: Optional[float] = None,
              save_every: int = 1) -> Trajectory:
    """Classical fixed-step RK4 from ``state0`` over ``[0, t_end]``.

    ``dt`` is shrunk slightly so that ``t_end`` is hit exactly. Only every
    ``save_every``-th step is stored (plus the last). Raises StepTooLarge if a
    fraction leaves ``[-1e-9, 1 + 1e-9]``.
    """
    if dt is None:
        dt = p.default_dt()
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(math.ceil(t_end / dt - 1e-12)))
    dt = t_end / n_steps
    y0 = np.asarray(state0, dtype=float)

    if rhs is sir_rhs or rhs is jet_rhs:
        g1, a = (p.gamma1, p.alpha) if rhs is jet_rhs else (0.0, 0.0)
        y, steps, bad = _rk4(y0, p.beta * p.m, p.gamma, g1, a, dt, n_steps, save_every,
                             -_BOUND, 1.0 + _BOUND)
    else:
        y, steps, bad = _rk4_python(rhs, y0, p, dt, n_steps, save_every)
    if bad >= 0:
        raise StepTooLarge(f"state left the simplex at step {bad} (t={bad * dt:g}); reduce dt={dt:g}")
    return Trajectory(steps * dt, y)


def _rk4_python(rhs, y0, p, dt, n_steps, save_every):
    ys, steps = [y0.copy()], [0]
    y = y0.copy()
    for n in range(1, n_steps + 1):
        k1 = rhs(y, p)
        k2 = rhs(y + 0.5 * dt * k1, p)
        k3 = rhs(y + 0.5 * dt * k2, p)
        k4 = rhs(y + dt * k3, p)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(y < -_BOUND) or np.any(y > 1 + _BOUND):
            return np.array(ys), np.array(steps), n
        if n % save_every == 0 or n == n_steps:
            ys.append(y.copy())
            steps.append(n)
    return np.array(ys), np.array(steps), -1


def _bisect(f, lo, hi, tol=1e-10, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def final_size(beta_over_gamma: float, i0: float) -> float:
    """Asymptotic susceptible fraction of the free flow started from ``(1 - i0, i0, 0)``.

    Solves ``S exp(-k S) = (1 - i0) exp(-k)`` with ``k = beta m / gamma`` by
    bisection. For ``k > 1`` the root below ``1/k`` is returned (the one the
    flow reaches); for ``k <= 1`` a NoEpidemicRoot warning is issued and the
    root near ``1 - i0`` is returned.
    """
    k = float(beta_over_gamma)
    if not k > 0:
        raise ValueError("beta_over_gamma must be positive")
    if not 0.0 <= i0 < 1.0:
        raise ValueError("i0 must lie in [0, 1)")
    target = (1.0 - i0) * math.exp(-k)

    def g(s):
        return s * math.exp(-k * s) - target

    if k <= 1.0:
        warnings.warn(f"beta/gamma = {k:g} <= 1: no outbreak branch", NoEpidemicRoot, stacklevel=2)
        if i0 == 0.0:
            return 1.0
        return _bisect(g, 0.0, 1.0)
    return _bisect(g, 0.0, 1.0 / k)


def jet_stationary(p: OdeParams, tol: float = 1e-12, max_iter: int = 200) -> OdeState:
    """Stationary fractions of the diffuse-jet flow.

    The infected balance gives ``I(S) = gamma1 alpha / (gamma + gamma1 alpha - beta m S)``;
    substituting into the S equation leaves a scalar root, which seeds a damped
    Newton iteration on the full (S, I) system.
    """
    bm, g, g1, a = p.beta * p.m, p.gamma, p.gamma1, p.alpha
    if not (g1 > 0 and 0 < a <= 1):
        raise ValueError("need gamma1 > 0 and alpha in (0, 1]")
    if a == 1.0:
        i = g1 / (g + g1)
        return OdeState(0.0, i, 1.0 - i)

    s_cap = (g + g1 * a) / bm if bm > 0 else math.inf

    def i_of(s):
        return g1 * a / (g + g1 * a - bm * s)

    # Largest admissible S keeps R = 1 - S - I(S) >= 0; _bisect never evaluates the upper end.
    s_hi = _bisect(lambda s: s + i_of(s) - 1.0, 0.0, min(1.0, s_cap), tol=1e-15)

    def ds(s):
        i = i_of(s)
        return _field(s, i, 1.0 - s - i, bm, g, g1, a)[0]

    s = _bisect(ds, 0.0, s_hi, tol=1e-13)
    x = np.array([s, i_of(s)])

    def residual(x):
        s, i = x
        d = _field(s, i, 1.0 - s - i, bm, g, g1, a)
        return np.array([d[0], d[1]])

    def jacobian(x):
        s, i = x
        r = 1.0 - s - i
        # Partial derivatives with R = 1 - S - I eliminated.
        return np.array([
            [-bm * i - g1 * (1 + a) / 2 - g1 * (1 - a) / 2, -bm * s - g1 * (1 - a) / 2],
            [bm * i, bm * s - g - g1 * a],
        ])

    f = residual(x)
    for _ in range(max_iter):
        norm = np.linalg.norm(f)
        if norm <= tol:
            return OdeState(float(x[0]), float(x[1]), float(1.0 - x[0] - x[1]))
        step = np.linalg.solve(jacobian(x), -f)
        lam = 1.0
        while lam > 1e-8:
            trial = x + lam * step
            ft = residual(trial)
            if np.linalg.norm(ft) < norm or np.linalg.norm(ft) <= tol:
                break
            lam *= 0.5
        else:
            break
        x, f = trial, ft
    raise NoConvergence(f"jet_stationary: residual {np.linalg.norm(f):.3e} after {max_iter} iterations")
