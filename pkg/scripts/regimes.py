"""Qualitative regimes of the localized perturbations.

supermarket: seed-averaged asymptotic S per jump rate (more shopping, lower S).
airport: count of I-waves after the primary peak, per seed.
"""

import click
import numpy as np

from kinetic_sir.engine import run
from kinetic_sir.observables import wave_peaks
from kinetic_sir.presets import get_preset


@click.group()
def main():
    pass


@main.command()
@click.option("--n", "n_particles", default=60_000, show_default=True)
@click.option("--seeds", default=5, show_default=True)
@click.option("--side", type=click.Choice(["L", "R"]), default="L")
def supermarket(n_particles, seeds, side):
    pre = get_preset(f"fig4{side}")
    for name, cfg in pre.runs.items():
        cfg = cfg.replace(n_particles=n_particles)
        tails = [run(cfg.replace(seed=s)).tail_mean("S") for s in range(seeds)]
        click.echo(f"{name:>15}: S_bar = {np.mean(tails):.4f}  seeds {np.round(tails, 4).tolist()}")


@main.command()
@click.option("--n", "n_particles", default=180_000, show_default=True)
@click.option("--seeds", default=5, show_default=True)
@click.option("--prominence", default=1e-3, show_default=True)
def airport(n_particles, seeds, prominence):
    cfg = get_preset("fig6").runs["airport"].replace(n_particles=n_particles)
    for seed in range(seeds):
        ts = run(cfg.replace(seed=seed))
        pk = wave_peaks(ts.I, prominence)
        waves = ", ".join(f"t={ts.t[k]:.0f} I={ts.I[k]:.4f}" for k in pk)
        click.echo(f"seed {seed}: {len(pk)} waves [{waves}]  infected arrivals {ts.events['injected'].sum()}")


if __name__ == "__main__":
    main()
