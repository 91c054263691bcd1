"""Command-line entry point: ``kinetic-sir run | compare | table1``."""

from __future__ import annotations

import logging
import shutil
import tempfile
import time
from pathlib import Path

import click

from . import output
from .core import ConfigError, config_from_text, parse_overrides, save_config
from .engine import run as run_engine
from .observables import InsufficientData, mean_free_time_estimate
from .ode_ref import integrate, jet_rhs, jet_stationary, sir_rhs
from .presets import PRESET_NAMES, TABLE1_INV_GAMMA1, OdeCurve, Preset, get_preset

log = logging.getLogger("kinetic_sir")


def resolve_target(target: str, scale: float, overrides: dict) -> Preset:
    if target in PRESET_NAMES:
        preset = get_preset(target)
    else:
        path = Path(target)
        if not path.is_file():
            raise click.ClickException(
                f"{target!r} is neither a preset ({', '.join(PRESET_NAMES)}) nor a config file"
            )
        cfg = config_from_text(path.read_text())
        system = "jet" if cfg.perturbation.value == "diffuse_jet" else "sir"
        preset = Preset(path.stem, f"config file {path}", {"": cfg},
                        ode_from=None if cfg.localized else ("", system))
    if scale != 1.0:
        preset = preset.scaled(scale)
    return preset.with_overrides(**overrides)


def integrate_curve(curve: OdeCurve, dt: float = 0.5):
    rhs = jet_rhs if curve.system == "jet" else sir_rhs
    n = max(1, int(round(curve.t_end / dt / 2000)))
    return integrate(rhs, (1.0 - curve.i0, curve.i0, 0.0), curve.params, curve.t_end, dt=dt,
                     save_every=n)


def _write_table1(outdir: Path) -> list:
    rows = []
    for inv in TABLE1_INV_GAMMA1:
        curve = get_preset("table1").ode[f"gamma1_1_{inv}"]
        st = jet_stationary(curve.params)
        rows.append((inv, 1.0 / inv, st.S, st.I, st.R))
    cols = list(zip(*rows))
    output.write_csv(outdir / "table1.csv", ("inv_gamma1", "gamma1", "S", "I", "R"), cols)
    return rows


def execute(preset: Preset, outdir: Path, threads=None, only=(), echo=click.echo) -> None:
    """Run every variant and curve of ``preset`` into ``outdir``; cleans up on failure."""
    outdir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".partial-", dir=outdir))
    try:
        panels_dsmc, panels_ode = [], []
        for name, cfg in preset.runs.items():
            if only and name not in only:
                continue
            sub = staging / name if name else staging
            sub.mkdir(parents=True, exist_ok=True)
            echo(f"[{preset.name}{'/' + name if name else ''}] N={cfg.n_particles} "
                 f"tau={cfg.tau:.4g} dt={cfg.t_step:.4g} cells={cfg.cells_per_side}^2 "
                 f"steps={cfg.n_steps}")
            t0 = time.perf_counter()
            ts = run_engine(cfg, threads=threads)
            output.write_run(sub, ts)
            save_config(cfg, sub / "config.resolved")
            msg = f"    done in {time.perf_counter() - t0:.1f}s; final S,I,R = " + \
                ", ".join(f"{x:.4f}" for x in ts.fractions[-1])
            coll = ts.events["collisions"][len(ts.step_t) // 10:]
            try:
                msg += f"; measured tau = {mean_free_time_estimate(coll, cfg.n_particles, cfg.t_step):.4g}"
            except InsufficientData:
                pass
            echo(msg)
            rel = f"{name}/series.csv" if name else "series.csv"
            panels_dsmc.append((rel, name or preset.name, "concentrated" in name))
        for name, curve in preset.ode.items():
            sub = staging / "ode" / name
            sub.mkdir(parents=True, exist_ok=True)
            tr = integrate_curve(curve)
            output.write_series(sub / "series.csv", tr.t, tr.y)
            panels_ode.append((f"ode/{name}/series.csv", f"ODE {name}", False))
        if preset.name == "table1":
            for inv, g1, s, i, r in _write_table1(staging):
                echo(f"1/gamma1={inv:>6d}  S={s:.6f}  I={i:.6g}  R={r:.6f}")
        panels = [p for p in (("particle system", panels_dsmc), ("mean field", panels_ode)) if p[1]]
        (staging / "plot.gp").write_text(output.plot_script(preset.description, panels))
        for item in staging.iterdir():
            dest = outdir / item.name
            if dest.is_dir():
                shutil.rmtree(dest)
            elif dest.exists():
                dest.unlink()
            shutil.move(str(item), str(dest))
    finally:
        shutil.rmtree(staging, ignore_errors=True)


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """DSMC simulator for the kinetic Boltzmann-SIR model."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@main.command("run")
@click.argument("target")
@click.argument("overrides", nargs=-1)
@click.option("--scale", type=float, default=1.0, show_default=True,
              help="Multiply N by this factor (lambda, tau, rates and L fixed).")
@click.option("--threads", type=int, default=None, envvar="KINETIC_SIR_THREADS",
              help="Worker threads for the collision sweep (output does not depend on it).")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--only", multiple=True, help="Run only the named variant(s) of a preset.")
def run_cmd(target, overrides, scale, threads, seed, out, only):
    """Run a preset (fig1 ... fig8bottom, table1) or a key = value config file."""
    try:
        changes = parse_overrides(list(overrides))
        if seed is not None:
            changes["seed"] = seed
        preset = resolve_target(target, scale, changes)
        execute(preset, Path(out), threads=threads, only=only)
    except (ConfigError, KeyError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("compare")
@click.argument("a", type=click.Path(exists=True, dir_okay=False))
@click.argument("b", type=click.Path(exists=True, dir_okay=False))
def compare_cmd(a, b):
    """Sup-norm distance and tail averages between two t,S,I,R series."""
    try:
        click.echo(output.compare_files(a, b).report())
    except (output.SchemaMismatch, output.EmptySeries) as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


@main.command("table1")
@click.option("--out", "out", type=click.Path(file_okay=False), default="out", show_default=True)
def table1_cmd(out):
    """Stationary diffuse-jet fractions for the eight tabulated jump rates."""
    try:
        execute(get_preset("table1"), Path(out))
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc


if __name__ == "__main__":
    main()
