"""Measured mean free time against the configured tau for each collision kernel."""

import click

from kinetic_sir.core import SimConfig
from kinetic_sir.engine import run
from kinetic_sir.observables import mean_free_time_estimate
from kinetic_sir.presets import min_particles


@click.command()
@click.option("--lambda", "mfp", type=float, default=25.0, show_default=True)
@click.option("--n", "n_particles", type=int, default=None, help="Default: smallest N the grid accepts, at least 45000.")
@click.option("--taus", default=60, show_default=True, help="Run length in units of tau.")
def main(mfp, n_particles, taus):
    for cs in ("hard_sphere", "maxwellian", "semidiscrete"):
        cfg = SimConfig(cross_section=cs, mean_free_path=mfp, beta=0.0, gamma=0.0, n_particles=10**7)
        cfg = cfg.replace(n_particles=n_particles or max(45_000, min_particles(cfg)))
        cfg = cfg.replace(t_end=taus * cfg.tau)
        ts = run(cfg)
        coll = ts.events["collisions"][ts.step_t > 10 * cfg.tau]
        tau_hat = mean_free_time_estimate(coll, cfg.n_particles, cfg.t_step)
        click.echo(f"{cs:>13}: tau = {cfg.tau:8.3f}  measured = {tau_hat:8.3f}  "
                   f"({100 * (tau_hat / cfg.tau - 1):+.2f}%)  N = {cfg.n_particles}")


if __name__ == "__main__":
    main()
