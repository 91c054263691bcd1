"""DSMC simulator for the three-species Boltzmann-SIR kinetic model."""

import os

# Skip numba's TBB probe (noisy warning on old TBB); omp or workqueue are fine.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

__version__ = "0.1.0"
