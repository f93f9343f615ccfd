import json
import math

import numpy as np
import pytest

from dbec.config import RunConfig, parse_config
from dbec.experiments import (
    SCENARIOS,
    ExperimentReport,
    orbit_distance,
    run_experiment,
    sigma_norm,
    smooth_perturbation,
    trapped_grid,
)
from dbec.grid import WaveField, iso_gaussian, make_grid


@pytest.fixture(scope="module")
def g32():
    return iso_gaussian(make_grid(32, 8.0))


def test_sigma_norm_gaussian(g32):
    # mass + A + D = 1 + 1.5 + 1.5
    assert sigma_norm(g32) == pytest.approx(2.0, rel=1e-9)


def test_orbit_distance_phase_invariant(g32):
    w = WaveField(g32.grid, g32.values * np.exp(1.234j))
    assert orbit_distance(w, g32) == pytest.approx(0.0, abs=1e-7)
    w = WaveField(g32.grid, 1.1 * g32.values * np.exp(-0.5j))
    assert orbit_distance(w, g32) == pytest.approx(0.1 * 2.0, rel=1e-7)


def test_smooth_perturbation_size(g32):
    rng = np.random.default_rng(0)
    du = smooth_perturbation(g32, 0.01, rng)
    assert sigma_norm(du) == pytest.approx(0.01 * sigma_norm(g32), rel=1e-12)
    assert sigma_norm(smooth_perturbation(g32, 0.0, rng)) == 0.0


def test_trapped_grid_sizing():
    cfg = RunConfig()
    assert trapped_grid(cfg, 0.25).L[0] == pytest.approx(16.0)
    assert trapped_grid(cfg, 4.0).L[0] == pytest.approx(8.0)
    assert trapped_grid(cfg, 0.25, 32).n == (32, 32, 32)


def test_regime_sweep(tmp_path):
    cfg = parse_config(overrides={"resolution": "21"})
    rep = run_experiment("regime-sweep", cfg, tmp_path)
    assert rep.passed
    data = json.loads((tmp_path / "regime-sweep.json").read_text())
    assert data["passed"] is True
    assert {a["name"] for a in data["assertions"]} == {a.name for a in rep.assertions}
    header = (tmp_path / "regime-sweep.csv").read_text().splitlines()[0].split(",")
    assert list(rep.table_header) == header


def test_report_bookkeeping(tmp_path):
    rep = ExperimentReport("demo", {"x": 1})
    rep.check("ok", True)
    assert rep.passed
    rep.check("bad", False, "detail")
    assert not rep.passed
    rep.series("s", [0, 1], [2.0, math.nan])
    rep.write(tmp_path)
    d = json.loads((tmp_path / "demo.json").read_text())
    assert d["passed"] is False
    assert (tmp_path / "demo_plot.csv").read_text().splitlines() == [
        "scenario,series,x,y", "demo,s,0,2", "demo,s,1,nan"]


def test_unknown_experiment():
    with pytest.raises(ValueError):
        run_experiment("nope")
    assert set(SCENARIOS) == {"instability", "trapped-stability", "gap", "mu-sign", "border",
                              "small-mass", "regime-sweep"}
