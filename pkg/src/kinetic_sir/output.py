"""CSV files, series comparison and gnuplot script emission."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .observables import TimeSeries

SERIES_HEADER = ("t", "S", "I", "R")
DIAGNOSTIC_HEADER = ("t", "energy", "momentum_x", "momentum_y", "var_vx", "var_vy", "mean_speed")
EVENT_HEADER = ("t", "collisions", "infections", "recoveries", "injected", "jumps")


class SchemaMismatch(ValueError):
    pass


class EmptySeries(ValueError):
    pass


def _fmt(x) -> str:
    # repr-free fixed formatting; Python float formatting ignores the C locale.
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(path, header, columns) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_series(path, t, fractions) -> None:
    fractions = np.asarray(fractions)
    write_csv(path, SERIES_HEADER, (t, fractions[:, 0], fractions[:, 1], fractions[:, 2]))


def write_run(outdir, ts: TimeSeries) -> None:
    outdir = Path(outdir)
    write_series(outdir / "series.csv", ts.t, ts.fractions)
    d = ts.diagnostics
    write_csv(outdir / "diagnostics.csv", DIAGNOSTIC_HEADER, [d[k] for k in DIAGNOSTIC_HEADER])
    write_csv(outdir / "events.csv", EVENT_HEADER, [ts.step_t] + [ts.events[k] for k in EVENT_HEADER[1:]])


def read_series(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(t, fractions)`` from a ``t,S,I,R`` CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySeries(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != SERIES_HEADER:
            raise SchemaMismatch(f"{path}: header {','.join(header)!r}, expected {','.join(SERIES_HEADER)!r}")
        rows = [list(map(float, r)) for r in reader if r]
    if not rows:
        raise EmptySeries(f"{path}: no data rows")
    data = np.asarray(rows)
    if data.shape[1] != 4:
        raise SchemaMismatch(f"{path}: expected 4 columns")
    return data[:, 0], data[:, 1:]


@dataclass(frozen=True)
class Comparison:
    max_abs_diff: dict
    tail_a: dict
    tail_b: dict
    t_range: tuple

    def report(self) -> str:
        lines = [f"common time range: [{self.t_range[0]:g}, {self.t_range[1]:g}]"]
        for ch in "SIR":
            lines.append(
                f"{ch}: max|diff| = {self.max_abs_diff[ch]:.6g}   "
                f"tail mean A = {self.tail_a[ch]:.6g}   tail mean B = {self.tail_b[ch]:.6g}"
            )
        return "\n".join(lines)


def _tail(t, y, t0):
    mask = t >= t0
    return y[mask].mean(axis=0) if mask.any() else y[-1]


def compare_series(ta, ya, tb, yb) -> Comparison:
    """Compare two fraction series on A's sample times within the overlapping range.

    Tail means are taken over the last 10% of the common horizon.
    """
    if len(ta) == 0 or len(tb) == 0:
        raise EmptySeries("cannot compare an empty series")
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    mask = (ta >= lo) & (ta <= hi)
    if not mask.any():
        raise EmptySeries("series do not overlap in time")
    grid = ta[mask]
    yb_i = np.column_stack([np.interp(grid, tb, yb[:, k]) for k in range(3)])
    diff = np.abs(ya[mask] - yb_i).max(axis=0)
    t0 = hi - 0.1 * (hi - lo)
    tail_a = _tail(ta, ya, t0)
    tail_b = _tail(tb, yb, t0)
    keys = "SIR"
    return Comparison(
        {k: float(diff[n]) for n, k in enumerate(keys)},
        {k: float(tail_a[n]) for n, k in enumerate(keys)},
        {k: float(tail_b[n]) for n, k in enumerate(keys)},
        (float(lo), float(hi)),
    )


def compare_files(path_a, path_b) -> Comparison:
    ta, ya = read_series(path_a)
    tb, yb = read_series(path_b)
    return compare_series(ta, ya, tb, yb)


_COLORS = {"S": "#1f77b4", "I": "#d62728", "R": "#2ca02c"}


def plot_script(title: str, panels: list, output: str = "plot.png") -> str:
    """Gnuplot script drawing each panel from its series CSVs.

    ``panels`` is a list of ``(panel_title, [(csv_path, style_label, dashed), ...])``.
    """
    lines = [
        "# gnuplot script; run with: gnuplot plot.gp",
        "set datafile separator ','",
        f"set terminal pngcairo size {600 * max(1, len(panels))},450",
        f"set output '{output}'",
        f"set multiplot layout 1,{max(1, len(panels))} title '{title}'",
        "set key outside bottom center horizontal",
        "set xlabel 't'",
        "set yrange [0:1]",
    ]
    for panel_title, curves in panels:
        lines.append(f"set title '{panel_title}'")
        plots = []
        for path, label, dashed in curves:
            dt = "dt 2" if dashed else "dt 1"
            for col, ch in ((2, "S"), (3, "I"), (4, "R")):
                plots.append(
                    f"'{path}' using 1:{col} skip 1 with lines lw 2 {dt} lc rgb '{_COLORS[ch]}' "
                    f"title '{ch} {label}'"
                )
        lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"
