"""Named experiment presets: fig1 ... fig8bottom and the ODE-only table1.

Each preset is a set of DSMC variants plus the mean-field curves drawn next to
them (with collision frequency ``m = 1 / tau``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

from .core import SimConfig
from .ode_ref import OdeParams

TABLE1_INV_GAMMA1 = (10, 20, 50, 100, 300, 1000, 5000, 10000)
TABLE1_PARAMS = dict(beta=3.0 / 40.0, gamma=1.0 / 30.0, alpha=0.01, m=1.0)


@dataclass(frozen=True)
class OdeCurve:
    system: str  # "sir" or "jet"
    params: OdeParams
    t_end: float
    i0: float = 0.005


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    runs: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    # Mean-field companion derived from one of the runs: (run name, "sir" | "jet").
    ode_from: Optional[tuple[str, str]] = None

    @property
    def ode(self) -> dict:
        out = dict(self.curves)
        if self.ode_from is not None:
            run, system = self.ode_from
            out[system] = ode_curve(self.runs[run], system)
        return out

    def scaled(self, factor: float) -> "Preset":
        """Same physics with every N multiplied by ``factor`` (occupancy re-checked)."""
        runs = {
            k: cfg.replace(n_particles=max(2, int(round(cfg.n_particles * factor))))
            for k, cfg in self.runs.items()
        }
        return dataclasses.replace(self, runs=runs)

    def with_overrides(self, **changes) -> "Preset":
        if not changes:
            return self
        runs = {k: cfg.replace(**changes) for k, cfg in self.runs.items()}
        return dataclasses.replace(self, runs=runs)


def ode_curve(cfg: SimConfig, system: str = "sir") -> OdeCurve:
    p = OdeParams(cfg.beta, cfg.gamma, 1.0 / cfg.tau, cfg.gamma1 if system == "jet" else 0.0,
                  cfg.alpha if system == "jet" else 0.0)
    return OdeCurve(system, p, cfg.t_end, cfg.i0)


def _free_pair(base: SimConfig) -> dict:
    return {
        "homogeneous": base,
        "concentrated": base.replace(initial_condition="concentrated_disk"),
    }


def _fig1():
    base = SimConfig(n_particles=1_800_000, beta=1.0, gamma=1 / 20, mean_free_path=9.8,
                     cross_section="maxwellian", t_end=1000.0)
    return Preset("fig1", "Maxwellian molecules, homogeneous vs concentrated, free model",
                  _free_pair(base), ode_from=("homogeneous", "sir"))


def _fig2():
    base = SimConfig(n_particles=180_000, beta=0.75, gamma=1 / 120, mean_free_path=49.5,
                     cross_section="hard_sphere", t_end=5000.0)
    return Preset("fig2", "hard spheres, homogeneous vs concentrated, free model",
                  _free_pair(base), ode_from=("homogeneous", "sir"))


def _fig3():
    base = SimConfig(n_particles=300_000, beta=0.5, gamma=1 / 75, mean_free_path=25.0,
                     cross_section="semidiscrete", t_end=4000.0)
    return Preset("fig3", "semidiscrete unit-speed model, free model",
                  _free_pair(base), ode_from=("homogeneous", "sir"))


def _fig4(side: str):
    base = SimConfig(n_particles=180_000, beta=0.7, gamma=1 / 75, mean_free_path=33.5,
                     cross_section="hard_sphere", t_end=5000.0)
    if side == "L":
        base = base.replace(d_area_fraction=0.01)
    else:
        base = base.replace(d_area_fraction=0.006, initial_condition="concentrated_disk")
    runs = {"h": base}
    for i in (1, 2, 3):
        runs[f"gamma1_1_{i}000"] = base.replace(perturbation="supermarket", gamma1=1 / (i * 1000))
    desc = "supermarket, |D| = 1% of the domain, homogeneous" if side == "L" else \
        "supermarket, |D| = 0.6% of the domain, concentrated"
    return Preset(f"fig4{side}", desc, runs, ode_from=("h", "sir"))


def _airport_base(**kw):
    return SimConfig(n_particles=180_000, beta=0.9, gamma=1 / 100, mean_free_path=33.4,
                     cross_section="hard_sphere", d_area_fraction=0.01,
                     initial_condition="concentrated_disk", **kw)


def _fig5():
    base = _airport_base(alpha=0.0, t_end=40_000.0)
    runs = {f"gamma1_1_{i}000": base.replace(perturbation="airport", gamma1=1 / (i * 1000))
            for i in (2, 4, 6)}
    runs["free"] = base
    return Preset("fig5", "airport without infected arrivals (alpha = 0)", runs)


def _fig6():
    base = _airport_base(alpha=2e-5, t_end=60_000.0)
    return Preset("fig6", "airport, alpha = 2e-5, gamma1 = 1e-4 (recurrent waves)",
                  {"airport": base.replace(perturbation="airport", gamma1=1e-4)})


def _fig7():
    base = _airport_base(alpha=1e-4, t_end=30_000.0).replace(gamma=1 / 80)
    runs = {"c": base}
    for i in (1, 2, 3, 4):
        runs[f"gamma1_1_{i}000"] = base.replace(perturbation="airport", gamma1=1 / (i * 1000))
    return Preset("fig7", "airport, alpha = 1e-4, recurrent waves without extinction", runs)


def _fig8(part: str):
    gamma1, t_end = (1 / 2000, 20_000.0) if part == "top" else (1 / 4000, 35_000.0)
    base = SimConfig(n_particles=200_000, beta=0.95, gamma=1 / 100, mean_free_path=29.9,
                     cross_section="hard_sphere", perturbation="diffuse_jet", gamma1=gamma1,
                     alpha=2e-4, t_end=t_end)
    return Preset(f"fig8{part}", f"diffuse jets, gamma1 = {gamma1:g}, damped waves",
                  _free_pair(base), ode_from=("homogeneous", "jet"))


def _table1():
    curves = {}
    for inv in TABLE1_INV_GAMMA1:
        p = OdeParams(TABLE1_PARAMS["beta"], TABLE1_PARAMS["gamma"], TABLE1_PARAMS["m"],
                      1.0 / inv, TABLE1_PARAMS["alpha"])
        curves[f"gamma1_1_{inv}"] = OdeCurve("jet", p, 10_000.0)
    return Preset("table1", "stationary diffuse-jet fractions vs gamma1 (ODE only)", curves=curves)


_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4L": lambda: _fig4("L"),
    "fig4R": lambda: _fig4("R"),
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8top": lambda: _fig8("top"),
    "fig8bottom": lambda: _fig8("bottom"),
    "table1": _table1,
}

PRESET_NAMES = tuple(_BUILDERS)


def get_preset(name: str) -> Preset:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None


def desk_scale(preset: Preset, n_target: int) -> Preset:
    """Scale a preset so its largest run has about ``n_target`` particles."""
    n_max = max(cfg.n_particles for cfg in preset.runs.values())
    return preset.scaled(n_target / n_max)


def min_particles(cfg: SimConfig) -> int:
    """Smallest N this config accepts (occupancy floor with cells no wider than lambda)."""
    from .core import MIN_OCCUPANCY

    n = math.ceil(cfg.side_length / cfg.mean_free_path - 1e-9)
    return int(math.ceil(MIN_OCCUPANCY * n * n))
