from pathlib import Path

import pytest

import lorentz_index as li

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_kinds():
    assert "index-check" in li.experiment_kinds()


def test_eta_closed_form():
    for b in (0.1, 0.25, 0.5, 0.9):
        h = li.eta(b)["value"]
        z = li.eta(b, "partial_sum_zeta")["value"]
        assert abs(h - (1 - 2 * b)) < 1e-12
        assert abs(z - h) < 1e-6
    assert abs(li.eta(0.25, "partial_sum_zeta")["value"] - 0.5) < 1e-6


def test_crossing_count():
    assert li.crossing_count(0.25, 2.25) == 2
    assert li.crossing_count(2.25, 0.25) == -2
    assert li.crossing_count(0.0, 0.0) == 0


def test_equal_index():
    r = li.equal_index(8, 3, 5, 0)
    assert r["equal"] and not r["rank_ambiguous"]
    assert r["factorization_residual"] < 1e-12


def test_spectral_flow_report():
    rep = li.run("[experiment]\nkind = spectral-flow\n[family]\nkind = constant\neigenvalues = -1, 2\n")
    assert rep["pass"]
    assert rep["results"]["ladder"][0]["sf"] == 0
    assert rep["csv"]["tracks_N32.csv"].startswith("s,t,eigenvalue,track\n")


def test_bundled_index_config():
    rep = li.run_file(CONFIGS / "c02_index_untwisted_alpha_half.ini", jobs=2)
    assert rep["pass"]
    row = rep["results"]["ladder"][0]
    assert row["index_block"] == 0 and row["sf"] == 0


def test_config_errors():
    with pytest.raises(ValueError):
        li.config("[family]\ndelta = 0.5\n")
    with pytest.raises(li.ConfigError):
        li.run("[experiment]\nkind = nope\n")
    assert li.config("[experiment]\nseed = 4\n")["seed"] == 4
