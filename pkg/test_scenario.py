#!/usr/bin/env python3

from pathlib import Path

import pytest

from errors import ScenarioError
from scenario import SCHEMA, load_scenario, parse_scenario_text

CORNER = """\
# flat ball glued to Schwarzschild
[scenario]
name = corner_m1
pipeline = corner_positive_mass

[corner]
radius = 2.5
outer_mass = 1.0   ; exterior mass

[sweep]
deltas = 0.2, 0.1, 5e-2, 0.025
"""


def _error(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "case.scn")
    return info.value


def test_parse_corner_scenario():
    scenario = parse_scenario_text(CORNER, "corner.scn")
    assert scenario.name == "corner_m1"
    assert scenario.pipeline == "corner_positive_mass"
    assert scenario.dimension == 3
    assert scenario.get("corner", "radius") == 2.5
    assert scenario.get("sweep", "deltas") == [0.2, 0.1, 0.05, 0.025]


def test_documented_defaults():
    scenario = parse_scenario_text(CORNER, "corner.scn")
    corner = scenario.section("corner")
    assert corner["inner"] == "flat"
    assert corner["outer_factor"] == 1000
    assert corner["cylinder_length"] == 10.0
    sweep = scenario.section("sweep")
    assert sweep["potential"] == "negative_part"
    assert sweep["rigidity"] is True
    assert sweep["outer_richardson"] is False
    assert sweep["mollifier"] is None
    assert scenario.get("profile", "samples") == 2001
    assert scenario.get("profile", "inner_end") == "boundary"
    assert scenario.get("fill_in", "complete") is True
    assert not scenario.has("profile")


def test_name_defaults_to_file_stem(tmp_path):
    path = tmp_path / "anonymous.scn"
    path.write_text(CORNER.replace("name = corner_m1\n", ""), encoding="utf-8")
    assert load_scenario(path).name == "anonymous"


def test_paths_are_relative_to_the_scenario(tmp_path):
    text = CORNER + "mollifier = kernels/triangle.csv\n\n[output]\ndir = out\nprefix = run_1\n"
    path = tmp_path / "nested" / "s.scn"
    path.parent.mkdir()
    path.write_text(text, encoding="utf-8")
    scenario = load_scenario(path)
    assert scenario.get("sweep", "mollifier") == path.parent / "kernels" / "triangle.csv"
    assert scenario.get("output", "dir") == path.parent / "out"
    assert scenario.get("output", "prefix") == "run_1"


def test_tolerance_overrides():
    scenario = parse_scenario_text(CORNER + "\n[tolerances]\nmass_primary = 1e-7\n")
    assert scenario.tolerances == {"mass_primary": 1e-7}
    assert set(SCHEMA["tolerances"]) >= {"mass_primary", "spike_relative", "scalar_nonneg"}


def test_all_pipelines_parse():
    shi_tam = ("[scenario]\npipeline = shi_tam\n[bartnik]\nrho = 1\neta = 2\n"
               "[fill_in]\nkind = flat_ball\n[sweep]\ndeltas = 0.1\n")
    shield = ("[scenario]\npipeline = shield\ndimension = 4\n[profile]\npreset = cylinder\n"
              "[shield]\nu0 = 0, 5\nu1 = 0, 1.5\nu2 = 0, 0.5\nkappa = 1\neta = 2.5\n")
    eigen = CORNER.replace("corner_positive_mass", "eigen_scan") + "[eigen]\ndomain = -1, 1\n"
    assert parse_scenario_text(shi_tam).pipeline == "shi_tam"
    parsed = parse_scenario_text(shield)
    assert parsed.dimension == 4
    assert parsed.get("shield", "u0") == (0.0, 5.0)
    assert parse_scenario_text(eigen).get("eigen", "domain") == (-1.0, 1.0)


@pytest.mark.parametrize("text, line, fragment", [
    (CORNER + "[mystery]\n", 12, "unknown section"),
    (CORNER + "colour = red\n", 12, "unknown key"),
    (CORNER + "deltas = 0.1\n", 12, "duplicate key"),
    (CORNER + "[corner]\nradius = 1\n", 12, "appears twice"),
    ("radius = 1\n[scenario]\npipeline = shi_tam\n", 1, "outside of any section"),
    (CORNER.replace("radius = 2.5", "radius = two"), 7, "expected a number"),
    (CORNER.replace("radius = 2.5\n", ""), 6, "missing required key 'radius'"),
    (CORNER.replace("0.2, 0.1", "0.2,,0.1"), 11, "empty list item"),
    (CORNER + "rigidity = maybe\n", 12, "true or false"),
    (CORNER.replace("pipeline = corner_positive_mass", "pipeline = magic"), 4, "must be one of"),
    (CORNER.replace("outer_mass = 1.0   ; exterior mass", "outer_mass 1.0"), 8, "key = value"),
])
def test_diagnostics_carry_the_line(text, line, fragment):
    error = _error(text)
    assert error.line == line
    assert fragment in error.message
    assert str(error).startswith(f"case.scn:{line}: ")


@pytest.mark.parametrize("text, fragment", [
    ("[corner]\nradius = 1\nouter_mass = 1\n", "missing [scenario]"),
    ("[scenario]\npipeline = shield\n[profile]\npreset = flat\n", "needs a [shield] section"),
    (CORNER.replace("name = corner_m1", "dimension = 8"), "outside 3..7"),
    ("[scenario]\npipeline = shi_tam\n[bartnik]\nrho = 1\n[fill_in]\nkind = flat_ball\n"
     "[sweep]\ndeltas = 0.1\n", "exactly one of eta, eta_table"),
    (CORNER.replace("0.025", "-0.025"), "deltas must be positive"),
    ("[scenario]\npipeline = shi_tam\n[bartnik]\nrho = 1\neta = 1\n[fill_in]\nkind = table\n"
     "[sweep]\ndeltas = 0.1\n", "needs a table path"),
])
def test_semantic_errors(text, fragment):
    assert fragment in _error(text).message


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError) as info:
        load_scenario(tmp_path / "absent.scn")
    assert "cannot read scenario" in str(info.value)


def test_bundled_scenarios_parse():
    for path in sorted(Path(__file__).parent.glob("scenarios/*.scn")):
        assert load_scenario(path).pipeline


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
