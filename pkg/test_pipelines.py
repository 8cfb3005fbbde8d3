#!/usr/bin/env python3

import math
from pathlib import Path

import numpy as np
import pytest

from checks import CheckStatus
from config import Settings
from errors import BartnikError
from pipelines import THEOREMS, run_scenario
from scenario import load_scenario, parse_scenario_text

SCENARIOS = Path(__file__).parent / "scenarios"


def _run(name, settings=Settings()):
    return run_scenario(load_scenario(SCENARIOS / f"{name}.scn"), settings)


def _checks(report):
    return {c.test_name: c for c in report.checks}


# -- corner positive mass ---------------------------------------------------

@pytest.fixture(scope="module")
def corner_m1():
    return _run("corner_m1")


def test_corner_with_positive_mass_passes(corner_m1):
    assert corner_m1.verdict is CheckStatus.PASS
    assert corner_m1.theorem == THEOREMS["corner_positive_mass"]
    summary = corner_m1.summary
    assert summary["original_mass"] == pytest.approx(1.0, abs=1e-6)
    assert summary["H_minus"] == pytest.approx(0.8)
    assert summary["H_plus"] == pytest.approx(2.0 * math.sqrt(0.2) / 2.5)
    assert summary["final_delta"] == 0.025
    assert abs(summary["final_mass"] - 1.0) <= 0.05


def test_corner_sweep_table(corner_m1):
    table = corner_m1.tables["sweep"]
    assert list(table["delta"]) == [0.2, 0.1, 0.05, 0.025]
    assert set(table["status"]) == {"ok"}
    assert np.all(table["min_scalar_tilde"] >= -1e-8)
    assert np.all(table["mass_tilde"] >= 1.0 - 1e-6)
    assert np.all(table["min_u"] >= 1.0 - 1e-12)
    checks = _checks(corner_m1)
    assert checks["spike integral"].passed
    assert checks["C0 distance is O(delta)"].passed
    assert "rigidity signature" not in checks


def test_negative_control_is_hypothesis_violated():
    report = _run("negative_control")
    assert report.verdict is CheckStatus.HYPOTHESIS_VIOLATED
    assert report.summary["final_mass"] == pytest.approx(-0.2, abs=1e-6)
    assert report.summary["H_plus"] > report.summary["H_minus"]
    assert report.notes
    assert "sweep" in report.tables


def test_flat_inside_flat_shows_rigidity():
    report = _run("flat_flat")
    assert report.verdict is CheckStatus.PASS
    assert abs(report.summary["final_mass"]) <= 1e-6
    checks = _checks(report)
    assert checks["rigidity signature"].passed
    assert checks["spike integral"].status is CheckStatus.INFO
    assert report.summary["max_ricci"] <= 1e-6


# -- Shi-Tam ----------------------------------------------------------------

def test_flat_ball_has_zero_brown_york_mass():
    report = _run("shi_tam_flat_ball")
    assert report.summary["brown_york_mass"] == pytest.approx(0.0, abs=1e-12)
    assert report.summary["extension_mass"] == pytest.approx(0.0, abs=1e-12)
    assert report.summary["min_scalar_fill_in"] == pytest.approx(0.0, abs=1e-8)
    checks = _checks(report)
    assert checks["min eta <= lambda"].passed
    assert checks["extension matches eta"].passed
    assert report.verdict is CheckStatus.PASS


def test_complete_cylinder_fill_in():
    report = _run("shi_tam_cylinder")
    assert report.summary["brown_york_mass"] == pytest.approx(1.0)
    assert report.summary["extension_mass"] == pytest.approx(0.5)
    assert report.summary["min_scalar_fill_in"] == pytest.approx(2.0, rel=1e-6)
    checks = _checks(report)
    assert checks["fill-in has R >= 0"].passed
    assert checks["extension mass <= Brown-York mass"].passed
    assert checks["Brown-York mass >= 0"].passed
    assert "incomplete fill-in" not in checks
    assert "shield" not in report.tables


def test_shielded_fill_in_records_the_shield():
    report = _run("shielded_fill_in")
    shield = report.tables["shield"]
    assert list(shield["status"]) == ["PASS"] * 5
    assert shield["item"].iloc[0].startswith("shield placement")
    assert "incomplete fill-in" not in _checks(report)
    assert report.summary["brown_york_mass"] == pytest.approx(1.0)


def test_unshielded_incomplete_fill_in_is_inconclusive():
    text = (SCENARIOS / "shielded_fill_in.scn").read_text(encoding="utf-8")
    head, _, tail = text.partition("[shield]")
    text = head + tail[tail.index("[sweep]"):]
    report = run_scenario(parse_scenario_text(text, "unshielded.scn"))
    assert _checks(report)["incomplete fill-in"].status is CheckStatus.INCONCLUSIVE
    assert report.verdict in (CheckStatus.INCONCLUSIVE, CheckStatus.FAIL)


def test_shield_around_the_truncated_end_is_inconclusive():
    text = (SCENARIOS / "shielded_fill_in.scn").read_text(encoding="utf-8")
    for old, new in (("u0 = -8, 0", "u0 = -10, -5"), ("u1 = -4.5, 0", "u1 = -10, -8.5"),
                     ("u2 = -3.5, 0", "u2 = -10, -9.5")):
        text = text.replace(old, new)
    report = run_scenario(parse_scenario_text(text, "mirrored.scn"))
    checks = _checks(report)
    placement = [c for name, c in checks.items() if name.startswith("shield placement")]
    assert [c.status for c in placement] == [CheckStatus.INCONCLUSIVE]
    assert all(checks[name].passed for name in checks if name.startswith("item "))
    assert report.verdict is not CheckStatus.PASS


def test_variable_eta_cannot_match_a_symmetric_fill_in(tmp_path):
    samples = tmp_path / "eta.csv"
    rows = ["theta,eta,weight", "0.0,2.0,6.283185307179586", "3.14159,2.5,6.283185307179586"]
    samples.write_text("\n".join(rows) + "\n")
    text = ("[scenario]\npipeline = shi_tam\n[bartnik]\nrho = 1\neta_table = eta.csv\n"
            "[fill_in]\nkind = flat_ball\n[sweep]\ndeltas = 0.1\n")
    path = tmp_path / "table.scn"
    path.write_text(text)
    with pytest.raises(BartnikError):
        run_scenario(load_scenario(path))


# -- shields ----------------------------------------------------------------

def test_shield_band_scenario():
    report = _run("shield_band")
    assert report.verdict is CheckStatus.PASS
    assert report.summary["D0"] == 3.5
    assert report.summary["D1"] == 1.0
    assert report.summary["alpha"] == pytest.approx(4.2)
    assert report.summary["weight_case"] == 1
    assert report.summary["barrier"] == "finite"
    assert report.summary["weight_minimum"] > 0.0
    assert len(report.tables["shield"]) == 4
    weight = report.tables["weight"]
    assert np.all(weight["min_condition"].dropna() > 0.0)


def test_flat_profile_fails_the_shield():
    text = ("[scenario]\nname = flat_shield\npipeline = shield\n"
            "[profile]\npreset = flat\ns_start = 1\ns_end = 10\nsamples = 901\n"
            "[shield]\nu0 = 1, 9\nu1 = 1, 5\nu2 = 1, 4\nkappa = 1\neta = 1\n")
    report = run_scenario(parse_scenario_text(text))
    assert report.verdict is CheckStatus.FAIL
    assert "weight" not in report.tables


def test_weight_construction_error_is_a_failure():
    text = (SCENARIOS / "shield_band.scn").read_text(encoding="utf-8").replace("end = 0", "end = -0.5")
    report = run_scenario(parse_scenario_text(text))
    assert _checks(report)["weight construction"].status is CheckStatus.FAIL
    assert report.verdict is CheckStatus.FAIL


# -- eigenvalue scans -------------------------------------------------------

def test_eigen_scan_scenario():
    report = _run("eigen_scan")
    assert report.verdict is CheckStatus.PASS
    assert report.summary["case"] == "b"
    assert report.summary["threshold"] == 0.1
    table = report.tables["eigen"]
    assert list(table["delta"]) == [0.1, 0.05]
    assert np.all(table["mu1"] > 0.0)
    equations = [c for name, c in _checks(report).items() if name.startswith("eigen equation")]
    assert len(equations) == 2
    assert all(c.status is CheckStatus.PASS for c in equations)
    assert np.all(table["eigen_residual"] < table["mu1"])


def test_eigen_scan_is_independent_of_worker_count():
    serial = _run("eigen_scan", Settings(jobs=1)).tables["eigen"]
    parallel = _run("eigen_scan", Settings(jobs=2)).tables["eigen"]
    np.testing.assert_array_equal(serial["mu1"].to_numpy(), parallel["mu1"].to_numpy())


def test_eigen_scan_with_reversed_gap():
    text = (SCENARIOS / "eigen_scan.scn").read_text(encoding="utf-8") \
        .replace("outer_mass = 1.0", "outer_mass = -0.2")
    report = run_scenario(parse_scenario_text(text))
    assert report.verdict is CheckStatus.HYPOTHESIS_VIOLATED
    assert report.summary["case"] == "none"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
