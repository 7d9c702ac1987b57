"""Strict, sectioned experiment configuration with unit suffixes.

A config is an INI file read by :mod:`configparser`.  Every experiment
declares its sections and keys; anything else is rejected with the line and
column of the offending text.  Physical values carry an explicit unit suffix
in the Gaussian system, and may be bare numbers when ``[units] system = natural``.
Angles accept ``rad``, ``deg`` or a ``pi`` multiplier (``0.5pi``, ``-pi``).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .em_fields import AZIMUTHAL, DIRAC_STRING, GaugeSpec, gauge_transform
from .errors import ConfigError
from .units import Units

NATURAL_SYSTEM = "natural"
GAUSSIAN_SYSTEM = "gaussian"

# accepted Gaussian suffix per physical dimension
GAUSSIAN_SUFFIX = {
    "flux": "Mx",
    "flux_rate": "Mx/s",
    "length": "cm",
    "wavenumber": "1/cm",
    "time": "s",
    "speed": "cm/s",
    "charge": "statC",
    "mass": "g",
    "energy": "erg",
    "voltage": "statV",
    "dos": "1/erg",
    "action": "erg*s",
}
SCALAR_KINDS = ("dimensionless", "angle", "int", "str", "bool", "gauges")

_NUMBER = re.compile(
    r"^(?P<num>[+-]?(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?|[+-])?\s*"
    r"(?P<pi>\*?\s*pi)?\s*(?P<unit>[A-Za-z1][A-Za-z0-9/*]*)?$"
)


@dataclass(frozen=True)
class Param:
    kind: str
    default: object
    doc: str = ""
    choices: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    units: Units
    system: str
    sections: dict
    quadrature: dict = field(default_factory=dict)
    source: str = ""

    def get(self, section: str, key: str):
        return self.sections[section][key]


def common_sections() -> dict:
    return {
        "experiment": {
            "name": Param("str", None, "experiment to run"),
            "seed": Param("int", 0, "master seed for any pseudo-random draws"),
        },
        "units": {
            "system": Param("str", NATURAL_SYSTEM, "natural (hbar = c = e = 1 unless overridden) or gaussian",
                            (NATURAL_SYSTEM, GAUSSIAN_SYSTEM)),
            "hbar": Param("action", 1.0, "reduced Planck constant"),
            "c": Param("speed", 1.0, "speed of light"),
            "e": Param("charge", 1.0, "elementary charge"),
        },
        "quadrature": {
            "rtol": Param("dimensionless", None, "relative tolerance of plane quadratures (overrides the profile)"),
            "atol": Param("dimensionless", None, "absolute tolerance of plane quadratures"),
            "cutoff": Param("length", None, "radius of the disk around the charge left out of overlap integrals"),
            "max_level": Param("int", None, "maximum number of resolution doublings"),
        },
    }


class _Locator:
    """Line/column of section headers and keys in the raw text."""

    def __init__(self, text: str):
        self.sections = {}
        self.keys = {}
        current = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped[0] in "#;":
                continue
            if stripped.startswith("[") and "]" in stripped:
                current = stripped[1:stripped.index("]")].strip()
                self.sections.setdefault(current, (lineno, line.index("[") + 1))
                continue
            m = re.match(r"\s*([^=:\s][^=:]*?)\s*[=:]", line)
            if m and current is not None:
                self.keys.setdefault((current, m.group(1).strip()), (lineno, m.start(1) + 1))

    def key(self, section, key):
        return self.keys.get((section, key), (None, None))

    def section(self, section):
        return self.sections.get(section, (None, None))


def parse_quantity(raw: str, kind: str, system: str, where: str = "") -> float:
    """Number with optional ``pi`` multiplier and unit suffix, converted to the run's system."""
    text = raw.strip()
    m = _NUMBER.match(text)
    if not m or (not m.group("num") and not m.group("pi")) or m.group("num") in ("+", "-") and not m.group("pi"):
        raise ValueError(f"{where}cannot read a number from {raw!r}")
    num = m.group("num")
    value = 1.0 if num in (None, "", "+") else (-1.0 if num == "-" else float(num))
    if m.group("pi"):
        value *= np.pi
    unit = m.group("unit")
    if kind == "angle":
        if unit in (None, "rad"):
            return value
        if unit == "deg":
            return np.deg2rad(value)
        raise ValueError(f"{where}angles take 'rad', 'deg' or a pi multiplier, got {unit!r}")
    if kind == "dimensionless":
        if unit is not None:
            raise ValueError(f"{where}dimensionless value takes no unit, got {unit!r}")
        return value
    expected = GAUSSIAN_SUFFIX[kind]
    if system == NATURAL_SYSTEM:
        if unit not in (None, "nat"):
            raise ValueError(f"{where}natural-unit run takes bare numbers or 'nat', got {unit!r}")
        return value
    if unit is None:
        raise ValueError(f"{where}gaussian run needs an explicit unit suffix {expected!r}")
    if unit != expected:
        raise ValueError(f"{where}expected unit {expected!r}, got {unit!r}")
    return value


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_gauges(text: str, system: str = NATURAL_SYSTEM) -> list:
    """``azimuthal; dirac-string@-0.5pi; azimuthal+chi:0.5*x`` -> list of GaugeSpec."""
    gauges = []
    for entry in (e.strip() for e in text.split(";")):
        if not entry:
            continue
        head, *chis = entry.split("+chi:")
        head = head.strip()
        if head == AZIMUTHAL:
            g = GaugeSpec(AZIMUTHAL)
        elif head.startswith(DIRAC_STRING):
            rest = head[len(DIRAC_STRING):].strip()
            angle = np.pi
            if rest:
                if not rest.startswith("@"):
                    raise ValueError(f"bad Dirac-string gauge {head!r}; use dirac-string@<angle>")
                angle = parse_quantity(rest[1:], "angle", system)
            g = GaugeSpec(DIRAC_STRING, angle)
        else:
            raise ValueError(f"unknown base gauge {head!r}")
        for chi in chis:
            g = gauge_transform(g, chi.strip())
        gauges.append(g)
    return gauges


def _convert(raw: str, p: Param, system: str, where: str):
    if p.kind == "str":
        value = raw.strip()
        if p.choices and value not in p.choices:
            raise ValueError(f"{where}expected one of {', '.join(p.choices)}, got {value!r}")
        return value
    if p.kind == "int":
        return int(raw.strip())
    if p.kind == "bool":
        return _parse_bool(raw)
    if p.kind == "gauges":
        return parse_gauges(raw, system)
    return parse_quantity(raw, p.kind, system, where)


def load_config(text: str, schemas: dict) -> ExperimentConfig:
    """Parse and validate config ``text`` against ``schemas`` (experiment name -> section schema)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",), default_section="\0")
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"malformed line {exc.errors[0][1]!r}" if exc.errors else str(exc), lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, 1) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None), 1) from None
    loc = _Locator(text)
    if not parser.has_option("experiment", "name"):
        raise ConfigError("missing [experiment] name", *loc.section("experiment"))
    name = parser.get("experiment", "name").strip()
    if name not in schemas:
        raise ConfigError(f"unknown experiment {name!r}; known: {', '.join(sorted(schemas))}",
                          *loc.key("experiment", "name"))
    schema = {**common_sections(), **schemas[name]}
    for section in parser.sections():
        if section not in schema:
            raise ConfigError(f"unknown section [{section}] for experiment {name!r}", *loc.section(section))
        for key in parser.options(section):
            if key not in schema[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", *loc.key(section, key))
    system = NATURAL_SYSTEM
    if parser.has_option("units", "system"):
        system = parser.get("units", "system").strip()
        if system not in (NATURAL_SYSTEM, GAUSSIAN_SYSTEM):
            raise ConfigError(f"unknown unit system {system!r}", *loc.key("units", "system"))
    values = {}
    for section, params in schema.items():
        values[section] = {}
        for key, p in params.items():
            if parser.has_option(section, key):
                raw = parser.get(section, key)
                try:
                    values[section][key] = _convert(raw, p, system, "")
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}", *loc.key(section, key)) from None
            elif p.kind == "gauges" and p.default is not None:
                values[section][key] = parse_gauges(p.default, NATURAL_SYSTEM)
            else:
                values[section][key] = p.default
    if system == GAUSSIAN_SYSTEM:
        for key in ("hbar", "c", "e"):
            if not parser.has_option("units", key):
                raise ConfigError(f"gaussian runs must set [units] {key} explicitly", *loc.section("units"))
    try:
        units = Units(values["units"]["hbar"], values["units"]["c"], values["units"]["e"])
    except ValueError as exc:
        raise ConfigError(str(exc), *loc.section("units")) from None
    quad = {k: v for k, v in values.pop("quadrature").items() if v is not None}
    return ExperimentConfig(name, int(values["experiment"]["seed"]), units, system, values, quad, text)


def _format_default(p: Param) -> str | None:
    if p.default is None:
        return None
    if p.kind == "bool":
        return "true" if p.default else "false"
    if p.kind in ("str", "int", "gauges"):
        return str(p.default)
    return repr(float(p.default))


def render_config(name: str, schema: dict, overrides: dict | None = None) -> str:
    """Natural-unit config text for ``name`` with every defaulted key written out."""
    overrides = overrides or {}
    full = {**common_sections(), **schema}
    lines = []
    for section, params in full.items():
        body = []
        for key, p in params.items():
            if section == "experiment" and key == "name":
                value = name
            else:
                value = overrides.get((section, key), _format_default(p))
            if value is None:
                continue
            body.append(f"# {p.doc}" if p.doc else None)
            body.append(f"{key} = {value}")
        if body:
            lines.append(f"[{section}]")
            lines.extend(b for b in body if b is not None)
            lines.append("")
    return "\n".join(lines)
