import csv

import numpy as np
import pytest
from click.testing import CliRunner
from hypothesis import given
from hypothesis import strategies as st

from kinetic_sir import cli
from kinetic_sir.core import OccupancyTooLow, load_config
from kinetic_sir.output import (
    EmptySeries,
    SchemaMismatch,
    _fmt,
    compare_files,
    compare_series,
    read_series,
    write_series,
)
from kinetic_sir.presets import PRESET_NAMES, desk_scale, get_preset, min_particles

SMALL_CONF = "n_particles = 20000\nmean_free_path = 100\nbeta = 0.9\ngamma = 1/200\nt_end = 1500\n"


@pytest.fixture
def small_conf(tmp_path):
    path = tmp_path / "small.conf"
    path.write_text(SMALL_CONF)
    return path


def test_series_round_trip(tmp_path):
    t = np.linspace(0, 10, 11)
    y = np.column_stack([np.linspace(1, 0.5, 11), np.full(11, 0.1), np.linspace(0, 0.4, 11)])
    write_series(tmp_path / "a.csv", t, y)
    text = (tmp_path / "a.csv").read_text()
    assert text.startswith("t,S,I,R\n") and "\r" not in text
    t2, y2 = read_series(tmp_path / "a.csv")
    np.testing.assert_allclose(t2, t, rtol=1e-12)
    np.testing.assert_allclose(y2, y, rtol=1e-12)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=20))
def test_csv_numbers_are_plain(values):
    for v in values:
        s = _fmt(v)
        assert "," not in s and float(s) == pytest.approx(v, rel=1e-11, abs=1e-300)


def test_header_mismatch(tmp_path):
    (tmp_path / "bad.csv").write_text("time,S,I,R\n0,1,0,0\n")
    with pytest.raises(SchemaMismatch):
        read_series(tmp_path / "bad.csv")


def test_empty_series(tmp_path):
    (tmp_path / "empty.csv").write_text("t,S,I,R\n")
    with pytest.raises(EmptySeries):
        read_series(tmp_path / "empty.csv")


def test_compare_self_is_zero(tmp_path):
    t = np.arange(5.0)
    y = np.random.default_rng(0).dirichlet([1, 1, 1], 5)
    write_series(tmp_path / "a.csv", t, y)
    c = compare_files(tmp_path / "a.csv", tmp_path / "a.csv")
    assert all(v == 0 for v in c.max_abs_diff.values())
    assert c.tail_a == c.tail_b


def test_compare_interpolates():
    ta = np.array([0.0, 1.0, 2.0])
    tb = np.array([0.0, 2.0])
    ya = np.array([[1.0, 0, 0], [0.5, 0.5, 0], [0, 1, 0]])
    yb = np.array([[1.0, 0, 0], [0, 1, 0]])
    assert compare_series(ta, ya, tb, yb).max_abs_diff == {"S": 0.0, "I": 0.0, "R": 0.0}


def test_cli_run_config_file(tmp_path, small_conf):
    out = tmp_path / "out"
    res = CliRunner().invoke(cli.main, ["run", str(small_conf), "t_end=15000", "--out", str(out), "--seed", "3"])
    assert res.exit_code == 0, res.output
    for name in ("series.csv", "diagnostics.csv", "events.csv", "config.resolved", "plot.gp",
                 "ode/sir/series.csv"):
        assert (out / name).is_file(), name
    assert "measured tau" in res.output
    assert load_config(out / "config.resolved").seed == 3
    assert not list(out.glob(".partial-*"))


def test_config_resolved_reproduces_series(tmp_path, small_conf):
    runner = CliRunner()
    a, b = tmp_path / "a", tmp_path / "b"
    assert runner.invoke(cli.main, ["run", str(small_conf), "--threads", "1", "--out", str(a)]).exit_code == 0
    res = runner.invoke(cli.main, ["run", str(a / "config.resolved"), "--threads", "1", "--out", str(b)])
    assert res.exit_code == 0, res.output
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_cli_overrides_and_env_threads(tmp_path, small_conf):
    out = tmp_path / "o"
    res = CliRunner().invoke(cli.main, ["run", str(small_conf), "beta=0", "gamma=0", "--out", str(out)],
                             env={"KINETIC_SIR_THREADS": "1"})
    assert res.exit_code == 0, res.output
    _, y = read_series(out / "series.csv")
    assert (y == y[0]).all()


def test_cli_bad_override(tmp_path, small_conf):
    res = CliRunner().invoke(cli.main, ["run", str(small_conf), "beta=2", "--out", str(tmp_path)])
    assert res.exit_code != 0 and "beta" in res.output


def test_cli_unknown_target(tmp_path):
    res = CliRunner().invoke(cli.main, ["run", "fig99", "--out", str(tmp_path)])
    assert res.exit_code != 0 and "preset" in res.output


def test_failed_run_leaves_no_partial_output(tmp_path, small_conf, monkeypatch):
    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(cli.output, "write_run", boom)
    out = tmp_path / "out"
    res = CliRunner().invoke(cli.main, ["run", str(small_conf), "--out", str(out)])
    assert res.exit_code != 0
    assert list(out.iterdir()) == []


def test_cli_table1(tmp_path):
    res = CliRunner().invoke(cli.main, ["table1", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    with open(tmp_path / "table1.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    row = next(r for r in rows if r["inv_gamma1"] == "20")
    assert abs(float(row["S"]) - 0.385659) <= 1e-4
    assert abs(float(row["I"]) - 0.101855) <= 1e-4
    assert abs(float(row["R"]) - 0.512484) <= 1e-4
    assert (tmp_path / "ode" / "gamma1_1_10" / "series.csv").is_file()


def test_cli_compare(tmp_path):
    t = np.arange(4.0)
    y = np.tile([0.5, 0.25, 0.25], (4, 1))
    write_series(tmp_path / "a.csv", t, y)
    (tmp_path / "b.csv").write_text("t,S,I\n0,1,0\n")
    runner = CliRunner()
    res = runner.invoke(cli.main, ["compare", str(tmp_path / "a.csv"), str(tmp_path / "a.csv")])
    assert res.exit_code == 0 and "max|diff| = 0 " in res.output
    res = runner.invoke(cli.main, ["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")])
    assert res.exit_code != 0 and "SchemaMismatch" in res.output


def test_fig2_preset():
    pre = get_preset("fig2")
    cfg = pre.runs["homogeneous"]
    assert (cfg.n_particles, cfg.beta, cfg.gamma, cfg.mean_free_path) == (180_000, 0.75, 1 / 120, 49.5)
    assert set(pre.runs) == {"homogeneous", "concentrated"}
    assert pre.ode["sir"].params.m == pytest.approx(1 / 55.85, rel=1e-3)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_validate(name):
    pre = get_preset(name)
    for cfg in pre.runs.values():
        assert cfg.mean_occupancy >= 20


def test_scale_keeps_physics():
    pre = get_preset("fig2").scaled(0.25)
    cfg = pre.runs["homogeneous"]
    assert cfg.n_particles == 45_000
    assert cfg.tau == get_preset("fig2").runs["homogeneous"].tau


def test_fig1_tenth_scale_rejected():
    # fig1 at 180000 particles would need cells wider than its mean free path.
    with pytest.raises(OccupancyTooLow):
        get_preset("fig1").scaled(0.1)
    assert min_particles(get_preset("fig1").runs["homogeneous"]) == 212_180


def test_desk_scale():
    pre = desk_scale(get_preset("fig3"), 60_000)
    assert {c.n_particles for c in pre.runs.values()} == {60_000}


def test_overrides_reach_ode_curve():
    pre = get_preset("fig8top").with_overrides(t_end=500.0)
    assert pre.ode["jet"].t_end == 500.0
