"""Domain types, run configuration and the random-stream contract."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

# Mean occupancy floor (particles per collision cell).
MIN_OCCUPANCY = 20.0


class ConfigError(ValueError):
    """Base class for rejected run configurations."""


class OccupancyTooLow(ConfigError):
    pass


class InvalidRate(ConfigError):
    pass


class GeometryError(ConfigError):
    pass


class Label(enum.IntEnum):
    SUSCEPTIBLE = 0
    INFECTED = 1
    RECOVERED = 2


S, I, R = Label.SUSCEPTIBLE, Label.INFECTED, Label.RECOVERED


class CrossSection(str, enum.Enum):
    HARD_SPHERE = "hard_sphere"
    SEMIDISCRETE = "semidiscrete"
    MAXWELLIAN = "maxwellian"


class Perturbation(str, enum.Enum):
    NONE = "none"
    SUPERMARKET = "supermarket"
    AIRPORT = "airport"
    DIFFUSE_JET = "diffuse_jet"


class InitialCondition(str, enum.Enum):
    HOMOGENEOUS = "homogeneous"
    CONCENTRATED_DISK = "concentrated_disk"


# Thermalized mean speed for sigma^2 = 1/2 is sqrt(pi)/2; unit-speed model is exactly 1.
MEAN_SPEED = {
    CrossSection.HARD_SPHERE: math.sqrt(math.pi) / 2.0,
    CrossSection.MAXWELLIAN: math.sqrt(math.pi) / 2.0,
    CrossSection.SEMIDISCRETE: 1.0,
}

# Equilibrium mean |v - v*|: Rayleigh(1) mean for the Maxwellian, 4/pi for uniform unit vectors.
MEAN_RELATIVE_SPEED = {
    CrossSection.HARD_SPHERE: math.sqrt(math.pi / 2.0),
    CrossSection.MAXWELLIAN: math.sqrt(math.pi / 2.0),
    CrossSection.SEMIDISCRETE: 4.0 / math.pi,
}


@dataclass(frozen=True)
class Particle:
    x: np.ndarray
    v: np.ndarray
    label: Label


@dataclass
class Population:
    """Structure-of-arrays particle store: positions (N, 2), velocities (N, 2), labels (N,)."""

    x: np.ndarray
    v: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.v = np.ascontiguousarray(self.v, dtype=np.float64)
        self.label = np.ascontiguousarray(self.label, dtype=np.int8)
        n = len(self.label)
        if self.x.shape != (n, 2) or self.v.shape != (n, 2):
            raise ValueError("x and v must have shape (N, 2) matching labels")

    def __len__(self) -> int:
        return len(self.label)

    def __getitem__(self, i: int) -> Particle:
        return Particle(self.x[i].copy(), self.v[i].copy(), Label(int(self.label[i])))

    def counts(self) -> np.ndarray:
        return np.bincount(self.label, minlength=3).astype(np.int64)

    def copy(self) -> "Population":
        return Population(self.x.copy(), self.v.copy(), self.label.copy())


def _coerce_enum(cls, value):
    if isinstance(value, cls):
        return value
    try:
        return cls(str(value).strip().lower())
    except ValueError:
        names = ", ".join(m.value for m in cls)
        raise ConfigError(f"unknown {cls.__name__} {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of one DSMC run.

    Rates are per unit time, lengths in domain units. Everything downstream
    (cell side, time step, grid size) is derived, see the properties below.
    """

    side_length: float = 1000.0
    n_particles: int = 180_000
    beta: float = 0.75
    gamma: float = 1.0 / 120.0
    gamma1: float = 0.0
    alpha: float = 0.0
    cross_section: CrossSection = CrossSection.HARD_SPHERE
    perturbation: Perturbation = Perturbation.NONE
    mean_free_path: float = 49.5
    d_area_fraction: float = 0.01
    box_center: Optional[tuple[float, float]] = None
    initial_condition: InitialCondition = InitialCondition.HOMOGENEOUS
    i0: float = 0.005
    t_end: float = 1000.0
    seed: int = 0
    sample_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cross_section", _coerce_enum(CrossSection, self.cross_section))
        object.__setattr__(self, "perturbation", _coerce_enum(Perturbation, self.perturbation))
        object.__setattr__(
            self, "initial_condition", _coerce_enum(InitialCondition, self.initial_condition)
        )
        if self.box_center is not None:
            object.__setattr__(self, "box_center", tuple(float(c) for c in self.box_center))
        validate_config(self)

    # -- derived quantities -------------------------------------------------

    @property
    def mean_speed(self) -> float:
        return MEAN_SPEED[self.cross_section]

    @property
    def mean_relative_speed(self) -> float:
        return MEAN_RELATIVE_SPEED[self.cross_section]

    @property
    def tau(self) -> float:
        """Configured mean free time, lambda / <v>."""
        return self.mean_free_path / self.mean_speed

    @property
    def t_step(self) -> float:
        return self.tau / 4.0

    @property
    def delta(self) -> float:
        """Nominal cell side lambda / 3 (the grid actually uses :attr:`cell_side`)."""
        return self.mean_free_path / 3.0

    @property
    def cells_per_side(self) -> int:
        ratio = self.side_length / self.delta
        fine = round(ratio) if abs(ratio - round(ratio)) < 1e-9 else math.ceil(ratio)
        # Coarsen only as far as needed to keep the occupancy floor.
        return int(max(1, min(fine, math.floor(math.sqrt(self.n_particles / MIN_OCCUPANCY)))))

    @property
    def cell_side(self) -> float:
        return self.side_length / self.cells_per_side

    @property
    def n_cells(self) -> int:
        return self.cells_per_side**2

    @property
    def mean_occupancy(self) -> float:
        return self.n_particles / self.n_cells

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.t_step - 1e-9))

    @property
    def box_side(self) -> float:
        return self.side_length * math.sqrt(self.d_area_fraction)

    @property
    def box_origin(self) -> tuple[float, float]:
        cx, cy = self.box_center or (self.side_length / 2.0, self.side_length / 2.0)
        h = self.box_side / 2.0
        return (cx - h, cy - h)

    @property
    def localized(self) -> bool:
        return self.perturbation in (Perturbation.SUPERMARKET, Perturbation.AIRPORT)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def derived(self) -> dict:
        return {
            "mean_speed": self.mean_speed,
            "tau": self.tau,
            "t_step": self.t_step,
            "delta": self.delta,
            "cell_side": self.cell_side,
            "cells_per_side": self.cells_per_side,
            "mean_occupancy": self.mean_occupancy,
            "n_steps": self.n_steps,
        }


def validate_config(cfg: SimConfig) -> SimConfig:
    """Check every constraint on ``cfg`` and return it unchanged.

    Raises InvalidRate, GeometryError or OccupancyTooLow (all ConfigError).
    """
    if not cfg.side_length > 0:
        raise GeometryError(f"side_length must be positive, got {cfg.side_length}")
    if not cfg.mean_free_path > 0:
        raise GeometryError(f"mean_free_path must be positive, got {cfg.mean_free_path}")
    if cfg.n_particles < 2:
        raise OccupancyTooLow(f"need at least 2 particles, got {cfg.n_particles}")
    if not 0.0 <= cfg.beta <= 1.0:
        raise InvalidRate(f"beta must lie in [0, 1], got {cfg.beta}")
    if not cfg.gamma >= 0.0:
        raise InvalidRate(f"gamma must be non-negative, got {cfg.gamma}")
    if not cfg.gamma1 >= 0.0:
        raise InvalidRate(f"gamma1 must be non-negative, got {cfg.gamma1}")
    if not 0.0 <= cfg.alpha <= 1.0:
        raise InvalidRate(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if not 0.0 <= cfg.i0 < 1.0:
        raise InvalidRate(f"i0 must lie in [0, 1), got {cfg.i0}")
    if not cfg.t_end > 0:
        raise InvalidRate(f"t_end must be positive, got {cfg.t_end}")
    if cfg.sample_every < 1:
        raise InvalidRate(f"sample_every must be >= 1, got {cfg.sample_every}")
    if cfg.localized:
        if not 0.0 < cfg.d_area_fraction < 1.0:
            raise GeometryError(
                f"d_area_fraction must lie in (0, 1) for {cfg.perturbation.value}, "
                f"got {cfg.d_area_fraction}"
            )
        x0, y0 = cfg.box_origin
        s = cfg.box_side
        eps = 1e-9 * cfg.side_length
        if x0 < -eps or y0 < -eps or x0 + s > cfg.side_length + eps or y0 + s > cfg.side_length + eps:
            raise GeometryError("box D does not fit inside the domain without wrapping")

    n = cfg.cells_per_side
    occupancy = cfg.n_particles / n**2
    if occupancy < MIN_OCCUPANCY or cfg.cell_side > cfg.mean_free_path:
        raise OccupancyTooLow(
            f"N={cfg.n_particles} gives {cfg.n_particles / (cfg.side_length / cfg.delta) ** 2:.2f} "
            f"particles per lambda/3 cell; coarsening to keep {MIN_OCCUPANCY:g} per cell "
            f"would need cells of side {cfg.side_length * math.sqrt(MIN_OCCUPANCY / cfg.n_particles):.3g} "
            f"> mean free path {cfg.mean_free_path:g}"
        )
    return cfg


# -- key = value config files ----------------------------------------------

_ALIASES = {"l": "side_length", "n": "n_particles", "lambda": "mean_free_path"}


def _format_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _parse_value(name: str, text: str):
    f = {f.name: f for f in dataclasses.fields(SimConfig)}[name]
    text = text.strip()
    if name == "box_center":
        if text.lower() in ("none", ""):
            return None
        parts = [p for p in text.replace(",", " ").split()]
        if len(parts) != 2:
            raise ConfigError(f"box_center needs two coordinates, got {text!r}")
        return (_parse_number(parts[0]), _parse_number(parts[1]))
    if f.type in ("int", int):
        value = _parse_number(text)
        if value != int(value):
            raise ConfigError(f"{name} must be an integer, got {text!r}")
        return int(value)
    if f.type in ("float", float):
        return _parse_number(text)
    return text


def config_to_text(cfg: SimConfig, with_derived: bool = False) -> str:
    lines = [f"{f.name} = {_format_value(getattr(cfg, f.name))}" for f in dataclasses.fields(cfg)]
    if with_derived:
        lines.append("# derived (ignored on input)")
        lines += [f"# {k} = {_format_value(v)}" for k, v in cfg.derived().items()]
    return "\n".join(lines) + "\n"


def parse_overrides(pairs) -> dict:
    """Turn ``key=value`` strings (or a ``{key: text}`` mapping) into SimConfig kwargs."""
    known = {f.name for f in dataclasses.fields(SimConfig)}
    items = pairs.items() if isinstance(pairs, dict) else (p.split("=", 1) for p in pairs)
    out = {}
    for item in items:
        if len(item) != 2:
            raise ConfigError(f"expected key=value, got {'='.join(item)!r}")
        key, text = item
        key = key.strip()
        key = _ALIASES.get(key.lower(), key)
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _parse_value(key, str(text))
    return out


def config_from_text(text: str, base: Optional[SimConfig] = None) -> SimConfig:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value
    kwargs = parse_overrides(pairs)
    if base is None:
        return SimConfig(**kwargs)
    return base.replace(**kwargs)


def load_config(path) -> SimConfig:
    return config_from_text(Path(path).read_text())


def save_config(cfg: SimConfig, path, with_derived: bool = True) -> None:
    Path(path).write_text(config_to_text(cfg, with_derived=with_derived))


# -- random streams --------------------------------------------------------


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, index)``; same pair, same sequence."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))
