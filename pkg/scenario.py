#!/usr/bin/env python3
"""
情境檔解析 - Scenario file parser

Features:
1. Bracketed sections with `key = value` lines, `#` / `;` comments
2. Typed values: decimal or scientific numbers, number lists, pairs, booleans, words, paths
3. Unknown sections or keys, duplicates and missing required keys are rejected
   with a `path:line: message` diagnostic
4. Per-pipeline required sections and documented defaults

The grammar is written out in SCENARIO_FORMAT.md.
"""

import logging
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from config import OUTER_RADIUS_FACTOR, Tolerances
from errors import ScenarioError
from profiles import EndFlag

logger = logging.getLogger(__name__)

PIPELINES = ("corner_positive_mass", "shi_tam", "shield", "eigen_scan")

REQUIRED = object()

END_FLAGS = tuple(f.value for f in EndFlag)

# section -> key -> (kind, default); a tuple kind lists the accepted words
SCHEMA: Dict[str, Dict[str, Tuple[Any, Any]]] = {
    "scenario": {
        "name": ("word", None),
        "pipeline": (PIPELINES, REQUIRED),
        "dimension": ("int", 3),
    },
    "corner": {
        "inner": (("flat", "cylinder"), "flat"),
        "radius": ("float", REQUIRED),
        "outer_mass": ("float", REQUIRED),
        "outer_factor": ("float", OUTER_RADIUS_FACTOR),
        "cylinder_length": ("float", 10.0),
    },
    "sweep": {
        "deltas": ("floats", REQUIRED),
        "potential": (("negative_part", "filtered"), "negative_part"),
        "rigidity": ("bool", True),
        "outer_richardson": ("bool", False),
        "mollifier": ("path", None),
    },
    "bartnik": {
        "rho": ("float", REQUIRED),
        "eta": ("float", None),
        "eta_table": ("path", None),
        "lambda": ("float", None),
    },
    "fill_in": {
        "kind": (("flat_ball", "cylinder", "table"), REQUIRED),
        "length": ("float", 10.0),
        "complete": ("bool", True),
        "table": ("path", None),
    },
    "shield": {
        "u0": ("pair", REQUIRED),
        "u1": ("pair", REQUIRED),
        "u2": ("pair", REQUIRED),
        "kappa": ("float", REQUIRED),
        "eta": ("float", REQUIRED),
    },
    "band": {
        "start": ("float", REQUIRED),
        "end": ("float", REQUIRED),
        "slope": ("float", REQUIRED),
        "value_at_end": ("float", 0.0),
        "L": ("float", REQUIRED),
        "kappa": ("float", REQUIRED),
        "alpha": ("float", None),
    },
    "profile": {
        "preset": (("flat", "cylinder", "schwarzschild", "table"), REQUIRED),
        "radius": ("float", 1.0),
        "mass": ("float", 1.0),
        "s_start": ("float", 0.0),
        "s_end": ("float", 1.0),
        "r_start": ("float", 2.5),
        "r_end": ("float", 1000.0),
        "samples": ("int", 2001),
        "table": ("path", None),
        "inner_end": (END_FLAGS, "boundary"),
        "outer_end": (END_FLAGS, "boundary"),
    },
    "eigen": {
        "domain": ("pair", REQUIRED),
    },
    "output": {
        "dir": ("path", None),
        "prefix": ("word", None),
    },
    "tolerances": {f.name: ("float", None) for f in fields(Tolerances)},
}

REQUIRED_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "corner_positive_mass": ("corner", "sweep"),
    "shi_tam": ("bartnik", "fill_in", "sweep"),
    "shield": ("profile", "shield"),
    "eigen_scan": ("corner", "sweep", "eigen"),
}

_SECTION = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")
_WORD = re.compile(r"^[A-Za-z0-9_.+-]+$")


@dataclass
class Scenario:
    path: Path
    pipeline: str
    name: str
    dimension: int
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)

    def has(self, section: str) -> bool:
        return section in self.sections

    def section(self, name: str) -> Dict[str, Any]:
        """Values of a section with the documented defaults filled in."""
        values = {key: default for key, (_, default) in SCHEMA[name].items()
                  if default is not REQUIRED}
        values.update(self.sections.get(name, {}))
        return values

    def get(self, section: str, key: str) -> Any:
        return self.section(section).get(key)


def _parse_number(text: str, path, line: int, integer: bool = False) -> Union[int, float]:
    text = text.strip()
    if integer:
        if not _INTEGER.match(text):
            raise ScenarioError(f"expected an integer, got '{text}'", path, line)
        return int(text)
    if not _NUMBER.match(text):
        raise ScenarioError(f"expected a number, got '{text}'", path, line)
    return float(text)


def _parse_value(kind: Any, raw: str, key: str, path, line: int, base: Path) -> Any:
    if isinstance(kind, tuple):
        if raw not in kind:
            raise ScenarioError(f"{key} must be one of {', '.join(kind)}, got '{raw}'", path, line)
        return raw
    if kind == "float":
        return _parse_number(raw, path, line)
    if kind == "int":
        return _parse_number(raw, path, line, integer=True)
    if kind in ("floats", "pair"):
        items = raw.split(",")
        if any(not item.strip() for item in items):
            raise ScenarioError(f"{key}: empty list item", path, line)
        values = [_parse_number(item, path, line) for item in items]
        if kind == "pair":
            if len(values) != 2:
                raise ScenarioError(f"{key} needs exactly two numbers", path, line)
            return values[0], values[1]
        return values
    if kind == "bool":
        lowered = raw.lower()
        if lowered not in ("true", "false"):
            raise ScenarioError(f"{key} must be true or false, got '{raw}'", path, line)
        return lowered == "true"
    if kind == "word":
        if not _WORD.match(raw):
            raise ScenarioError(f"{key}: '{raw}' is not a plain word", path, line)
        return raw
    if kind == "path":
        if not raw:
            raise ScenarioError(f"{key}: empty path", path, line)
        candidate = Path(raw)
        return candidate if candidate.is_absolute() else base / candidate
    raise ScenarioError(f"internal: unknown value kind {kind!r}", path, line)


def _strip_comment(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith(("#", ";")):
        return ""
    match = re.search(r"\s[#;]", stripped)
    return stripped[:match.start()].rstrip() if match else stripped


def parse_scenario_text(text: str, path: Union[str, Path] = "<scenario>") -> Scenario:
    path = Path(path)
    base = path.parent if str(path) != "<scenario>" else Path(".")
    sections: Dict[str, Dict[str, Any]] = {}
    header_lines: Dict[str, int] = {}
    current: Optional[str] = None

    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            current = header.group(1)
            if current not in SCHEMA:
                raise ScenarioError(f"unknown section [{current}]", path, number)
            if current in sections:
                raise ScenarioError(f"section [{current}] appears twice", path, number)
            sections[current] = {}
            header_lines[current] = number
            continue
        entry = _ENTRY.match(line)
        if not entry:
            raise ScenarioError(f"expected 'key = value' or '[section]', got '{line}'", path, number)
        if current is None:
            raise ScenarioError("key outside of any section", path, number)
        key, raw = entry.group(1), entry.group(2).strip()
        schema = SCHEMA[current]
        if key not in schema:
            raise ScenarioError(f"unknown key '{key}' in [{current}]", path, number)
        if key in sections[current]:
            raise ScenarioError(f"duplicate key '{key}' in [{current}]", path, number)
        if not raw:
            raise ScenarioError(f"{key} has no value", path, number)
        sections[current][key] = _parse_value(schema[key][0], raw, key, path, number, base)

    if "scenario" not in sections:
        raise ScenarioError("missing [scenario] section", path, 1)
    for name, values in sections.items():
        for key, (_, default) in SCHEMA[name].items():
            if default is REQUIRED and key not in values:
                raise ScenarioError(f"[{name}] is missing required key '{key}'", path,
                                    header_lines[name])

    head = sections["scenario"]
    pipeline = head["pipeline"]
    for name in REQUIRED_SECTIONS[pipeline]:
        if name not in sections:
            raise ScenarioError(f"pipeline {pipeline} needs a [{name}] section", path,
                                header_lines["scenario"])
    dimension = head.get("dimension", 3)
    if not 3 <= dimension <= 7:
        raise ScenarioError(f"dimension {dimension} outside 3..7", path, header_lines["scenario"])
    if "bartnik" in sections:
        given = [k for k in ("eta", "eta_table") if k in sections["bartnik"]]
        if len(given) != 1:
            raise ScenarioError("[bartnik] needs exactly one of eta, eta_table", path,
                                header_lines["bartnik"])
    if "sweep" in sections:
        deltas: List[float] = sections["sweep"]["deltas"]
        if any(d <= 0 for d in deltas):
            raise ScenarioError("deltas must be positive", path, header_lines["sweep"])
    if "fill_in" in sections and sections["fill_in"].get("kind") == "table" \
            and "table" not in sections["fill_in"]:
        raise ScenarioError("fill_in kind = table needs a table path", path, header_lines["fill_in"])

    name = head.get("name") or (path.stem if str(path) != "<scenario>" else "scenario")
    scenario = Scenario(path, pipeline, name, dimension, sections,
                        dict(sections.get("tolerances", {})))
    logger.debug(f"parsed scenario {name} ({pipeline}) with sections {sorted(sections)}")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario: {e.strerror or e}", path)
    return parse_scenario_text(text, path)
