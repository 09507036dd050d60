"""
Run configuration: JSON documents describing a system and what to compute.

The schema is documented in CONFIG.md. Every parse error is reported as a
``ConfigError`` naming the JSON path of the offending value (or the line and
column of a syntax error).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .crossing_solver import CircleClass
from .field_core import (
    Constant,
    HolomorphicField,
    InversePower,
    LinearCenter,
    Monomial,
    RationalNormal,
    ReciprocalPoly,
    Transformed,
)
from .geometry import NAMED_MAPS, ZONES, DegenerateMap, MoebiusMap, PartitionConfig, PartitionKind, ZoneTag
from .melnikov import BasisName, PerturbationCoeffs, melnikov_basis
from .pwhs_system import PiecewiseSystem, perturbation_field
from .utils import parse_complex

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for malformed or invalid run configurations."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


# --------------------------------------------------------------------------
# Value readers
# --------------------------------------------------------------------------

def _get(obj: dict, key: str, path: str, default: Any = ...) -> Any:
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path)
    if key not in obj:
        if default is ...:
            raise ConfigError(f"missing required field '{key}'", path)
        return default
    return obj[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ConfigError(f"must be finite, got {value!r}", path)
    return float(value)


def _integer(value: Any, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be at least {minimum}, got {value}", path)
    return value


def _complex(value: Any, path: str) -> complex:
    try:
        return parse_complex(value)
    except ValueError as e:
        raise ConfigError(str(e), path) from e


def _complex_list(value: Any, path: str) -> list[complex]:
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list", path)
    return [_complex(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _number_list(value: Any, path: str) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError("expected a list of numbers", path)
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _range(value: Any, path: str) -> tuple[float, float]:
    values = _number_list(value, path)
    if len(values) != 2 or not values[0] < values[1]:
        raise ConfigError(f"expected [lo, hi] with lo < hi, got {value!r}", path)
    return values[0], values[1]


def _zone(key: str, path: str) -> ZoneTag:
    try:
        zone = ZoneTag(key)
    except ValueError:
        zone = None
    if zone not in ZONES:
        raise ConfigError(f"unknown zone '{key}', expected one of +, c, -", path)
    return zone


# --------------------------------------------------------------------------
# Fields and systems
# --------------------------------------------------------------------------

def parse_field(spec: Any, path: str = "$") -> HolomorphicField:
    """
    Build a zone field from its JSON description.

    Raises:
        ConfigError: For unknown types or invalid parameters
    """
    kind = _get(spec, "type", path)
    if kind == "polynomial":
        coeffs = _complex_list(_get(spec, "coefficients", path), f"{path}.coefficients")
        return HolomorphicField.polynomial(coeffs)
    if kind == "rational":
        num = _complex_list(_get(spec, "numerator", path), f"{path}.numerator")
        den = _complex_list(_get(spec, "denominator", path), f"{path}.denominator")
        if all(c == 0 for c in den):
            raise ConfigError("zero denominator", f"{path}.denominator")
        return HolomorphicField(tuple(num), tuple(den))
    return HolomorphicField.from_tag(_parse_tag(spec, path))


def _parse_tag(spec: Any, path: str):
    kind = _get(spec, "type", path)
    scale = lambda: _complex(_get(spec, "scale", path, [0.0, 1.0]), f"{path}.scale")
    try:
        if kind == "constant":
            return Constant(_complex(_get(spec, "value", path), f"{path}.value"))
        if kind == "linear_center":
            return LinearCenter(_complex(_get(spec, "lam", path), f"{path}.lam"),
                                _complex(_get(spec, "center", path, 0), f"{path}.center"))
        if kind == "monomial":
            return Monomial(_integer(_get(spec, "n", path), f"{path}.n", 0), scale())
        if kind == "rational_normal":
            return RationalNormal(_integer(_get(spec, "n", path), f"{path}.n", 2),
                                  _complex(_get(spec, "c", path), f"{path}.c"), scale())
        if kind == "inverse_power":
            return InversePower(_integer(_get(spec, "n", path), f"{path}.n", 1), scale())
        if kind == "reciprocal_poly":
            coeffs = _complex_list(_get(spec, "coefficients", path), f"{path}.coefficients")
            if all(c == 0 for c in coeffs):
                raise ConfigError("reciprocal of the zero polynomial", f"{path}.coefficients")
            return ReciprocalPoly(tuple(coeffs))
        if kind == "transformed":
            inverse = _complex_list(_get(spec, "inverse", path), f"{path}.inverse")
            if len(inverse) != 4:
                raise ConfigError("expected [p, q, r, u]", f"{path}.inverse")
            return Transformed(_parse_tag(_get(spec, "base", path), f"{path}.base"), tuple(inverse))
    except (ValueError, TypeError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), path) from e
    raise ConfigError(f"unknown field type '{kind}'", f"{path}.type")


def field_to_spec(f: HolomorphicField) -> dict:
    """JSON description of a field, inverse of ``parse_field``."""
    if f.tag is None:
        if f.is_polynomial:
            return {"type": "polynomial", "coefficients": [_pair(c) for c in f.num / f.den[0]]}
        return {"type": "rational", "numerator": [_pair(c) for c in f.num],
                "denominator": [_pair(c) for c in f.den]}
    return _tag_to_spec(f.tag)


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _tag_to_spec(tag) -> dict:
    if isinstance(tag, Constant):
        return {"type": "constant", "value": _pair(tag.value)}
    if isinstance(tag, LinearCenter):
        return {"type": "linear_center", "lam": _pair(tag.lam), "center": _pair(tag.center)}
    if isinstance(tag, Monomial):
        return {"type": "monomial", "n": tag.n, "scale": _pair(tag.scale)}
    if isinstance(tag, RationalNormal):
        return {"type": "rational_normal", "n": tag.n, "c": _pair(tag.c), "scale": _pair(tag.scale)}
    if isinstance(tag, InversePower):
        return {"type": "inverse_power", "n": tag.n, "scale": _pair(tag.scale)}
    if isinstance(tag, ReciprocalPoly):
        return {"type": "reciprocal_poly", "coefficients": [_pair(c) for c in tag.coefficients]}
    if isinstance(tag, Transformed):
        return {"type": "transformed", "base": _tag_to_spec(tag.base),
                "inverse": [_pair(c) for c in tag.inverse]}
    raise ValueError(f"unknown tag {tag!r}")


def parse_system(spec: Any, path: str = "$.system") -> PiecewiseSystem:
    """
    Build a piecewise system from its JSON description.

    Raises:
        ConfigError: With the path of the first invalid value
    """
    partition = _get(spec, "partition", path)
    try:
        kind = PartitionKind(partition)
    except ValueError:
        raise ConfigError(
            f"unknown partition '{partition}', expected one of "
            + ", ".join(k.value for k in PartitionKind), f"{path}.partition",
        )

    zones = _get(spec, "zones", path)
    if not isinstance(zones, dict):
        raise ConfigError("expected an object keyed by zone", f"{path}.zones")
    fields = {_zone(k, f"{path}.zones"): parse_field(v, f"{path}.zones.{k}") for k, v in zones.items()}
    missing = [z.value for z in ZONES if z not in fields]
    if missing:
        raise ConfigError(f"missing zones {', '.join(missing)}", f"{path}.zones")

    perturbations = {}
    by_zone = _get(spec, "perturbation", path, {})
    if not isinstance(by_zone, dict):
        raise ConfigError("expected an object keyed by zone", f"{path}.perturbation")
    for key, value in by_zone.items():
        zone_path = f"{path}.perturbation.{key}"
        zone = _zone(key, f"{path}.perturbation")
        a = _number_list(_get(value, "a", zone_path), f"{zone_path}.a")
        b = _number_list(_get(value, "b", zone_path), f"{zone_path}.b")
        if len(a) != len(b) or not a:
            raise ConfigError("a and b must be non-empty and of equal length", zone_path)
        perturbations[zone] = perturbation_field(a, b)
    # general perturbation fields, as written by the transform command
    general = _get(spec, "perturbation_fields", path, {})
    if not isinstance(general, dict):
        raise ConfigError("expected an object keyed by zone", f"{path}.perturbation_fields")
    for key, value in general.items():
        zone = _zone(key, f"{path}.perturbation_fields")
        if zone in perturbations:
            raise ConfigError(f"zone '{key}' perturbed twice", f"{path}.perturbation_fields.{key}")
        perturbations[zone] = parse_field(value, f"{path}.perturbation_fields.{key}")

    epsilon = _number(_get(spec, "epsilon", path, 0.0), f"{path}.epsilon")
    if epsilon < 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}", f"{path}.epsilon")
    name = _get(spec, "name", path, "")
    return PiecewiseSystem(PartitionConfig(kind), fields, perturbations, epsilon, str(name))


def system_to_spec(system: PiecewiseSystem) -> dict:
    """JSON description of a system (perturbations as general fields)."""
    spec = {
        "partition": system.config.kind.value,
        "zones": {zone.value: field_to_spec(f) for zone, f in system.fields.items()},
        "epsilon": system.epsilon,
        "name": system.name,
    }
    if system.perturbations:
        spec["perturbation_fields"] = {zone.value: field_to_spec(h) for zone, h in system.perturbations.items()}
    return spec


def parse_map(value: Any, path: str) -> MoebiusMap:
    """A named map or explicit [a, b, c, d]."""
    if isinstance(value, str):
        if value not in NAMED_MAPS:
            raise ConfigError(f"unknown map '{value}', expected one of {', '.join(NAMED_MAPS)}", path)
        return NAMED_MAPS[value]
    coeffs = _complex_list(value, path)
    if len(coeffs) != 4:
        raise ConfigError("expected [a, b, c, d]", path)
    try:
        return MoebiusMap(*coeffs)
    except DegenerateMap as e:
        raise ConfigError(str(e), path) from e


def parse_coefficients(spec: Any, path: str) -> PerturbationCoeffs:
    """{"a": {"+": [...], "c": [...], "-": [...]}, "b": {...}}."""
    a, b = {}, {}
    for name, target in (("a", a), ("b", b)):
        by_zone = _get(spec, name, path)
        if not isinstance(by_zone, dict):
            raise ConfigError("expected an object keyed by zone", f"{path}.{name}")
        for key, values in by_zone.items():
            target[_zone(key, f"{path}.{name}")] = tuple(_number_list(values, f"{path}.{name}.{key}"))
    lengths = {len(v) for v in a.values()} | {len(v) for v in b.values()}
    if set(a) != set(ZONES) or set(b) != set(ZONES) or len(lengths) != 1:
        raise ConfigError("a and b need all three zones with equally long lists", path)
    return PerturbationCoeffs(a, b)


# --------------------------------------------------------------------------
# Command sections
# --------------------------------------------------------------------------

@dataclass
class SimulateSpec:
    start: complex
    max_time: Optional[float] = None
    max_crossings: Optional[int] = None
    direction: int = 1


@dataclass
class PortraitSpec:
    x_range: tuple = (-4.0, 4.0)
    y_range: tuple = (-4.0, 4.0)
    grid: int = 41
    starts: list = field(default_factory=list)
    max_crossings: int = 4
    max_time: float = 50.0


@dataclass
class MelnikovSpec:
    basis: BasisName
    coefficients: Optional[PerturbationCoeffs] = None
    targets: Optional[list] = None
    r_range: tuple = (1.001, 15.0)
    samples: int = 200


@dataclass
class CyclesSpec:
    circle_class: Optional[CircleClass] = None
    box: Optional[float] = None
    seeds_per_axis: Optional[int] = None


@dataclass
class RunConfig:
    """A parsed run configuration."""
    system: Optional[PiecewiseSystem] = None
    simulate: Optional[SimulateSpec] = None
    portrait: Optional[PortraitSpec] = None
    melnikov: Optional[MelnikovSpec] = None
    cycles: Optional[CyclesSpec] = None
    transform: Optional[MoebiusMap] = None
    raw: dict = field(default_factory=dict)

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ConfigError(f"missing required section '{section}'")
        return value


_DEFAULT_RANGES = {
    BasisName.STRIP: (1.001, 15.0),
    BasisName.EXTERNAL: (1.001, 15.0),
    BasisName.INTERNAL_INNER: (1.001, 2.999),
    BasisName.INTERNAL_OUTER: (3.001, 15.0),
}


def _parse_simulate(spec: Any, path: str) -> SimulateSpec:
    max_time = _get(spec, "max_time", path, None)
    max_crossings = _get(spec, "max_crossings", path, None)
    direction = _get(spec, "direction", path, 1)
    if direction not in (1, -1) or isinstance(direction, bool):
        raise ConfigError("direction must be 1 or -1", f"{path}.direction")
    result = SimulateSpec(
        _complex(_get(spec, "start", path), f"{path}.start"),
        None if max_time is None else _number(max_time, f"{path}.max_time"),
        None if max_crossings is None else _integer(max_crossings, f"{path}.max_crossings", 1),
        direction,
    )
    if result.max_time is not None and result.max_time <= 0:
        raise ConfigError("max_time must be positive", f"{path}.max_time")
    return result


def _parse_portrait(spec: Any, path: str) -> PortraitSpec:
    starts = _get(spec, "starts", path, [])
    if not isinstance(starts, list):
        raise ConfigError("expected a list of points", f"{path}.starts")
    max_time = _number(_get(spec, "max_time", path, 50.0), f"{path}.max_time")
    if max_time <= 0:
        raise ConfigError("max_time must be positive", f"{path}.max_time")
    return PortraitSpec(
        _range(_get(spec, "x_range", path, [-4.0, 4.0]), f"{path}.x_range"),
        _range(_get(spec, "y_range", path, [-4.0, 4.0]), f"{path}.y_range"),
        _integer(_get(spec, "grid", path, 41), f"{path}.grid", 2),
        [_complex(p, f"{path}.starts[{i}]") for i, p in enumerate(starts)],
        _integer(_get(spec, "max_crossings", path, 4), f"{path}.max_crossings", 1),
        max_time,
    )


def _parse_melnikov(spec: Any, path: str) -> MelnikovSpec:
    name = _get(spec, "basis", path)
    try:
        basis = BasisName(name)
    except ValueError:
        raise ConfigError(
            f"unknown basis '{name}', expected one of " + ", ".join(b.value for b in BasisName),
            f"{path}.basis",
        )
    coefficients = targets = None
    if "coefficients" in spec:
        coefficients = parse_coefficients(spec["coefficients"], f"{path}.coefficients")
    if "targets" in spec:
        targets = _number_list(spec["targets"], f"{path}.targets")
        domain = melnikov_basis(basis).domain
        for i, t in enumerate(targets):
            if not domain[0] < t < domain[1]:
                raise ConfigError(f"target {t} outside the domain {domain}", f"{path}.targets[{i}]")
    if (coefficients is None) == (targets is None):
        raise ConfigError("give exactly one of 'coefficients' or 'targets'", path)
    r_range = _range(_get(spec, "r_range", path, list(_DEFAULT_RANGES[basis])), f"{path}.r_range")
    domain = melnikov_basis(basis).domain
    if not (domain[0] < r_range[0] and r_range[1] < domain[1]):
        raise ConfigError(f"r_range {list(r_range)} must lie inside the domain {domain}", f"{path}.r_range")
    return MelnikovSpec(basis, coefficients, targets, r_range,
                        _integer(_get(spec, "samples", path, 200), f"{path}.samples", 2))


def _parse_cycles(spec: Any, path: str) -> CyclesSpec:
    circle_class = _get(spec, "class", path, None)
    if circle_class is not None:
        try:
            circle_class = CircleClass(circle_class)
        except ValueError:
            raise ConfigError(f"unknown class '{circle_class}', expected C2 or C3", f"{path}.class")
    box = _get(spec, "box", path, None)
    seeds = _get(spec, "seeds_per_axis", path, None)
    result = CyclesSpec(
        circle_class,
        None if box is None else _number(box, f"{path}.box"),
        None if seeds is None else _integer(seeds, f"{path}.seeds_per_axis", 20),
    )
    if result.box is not None and result.box <= 0:
        raise ConfigError("box must be positive", f"{path}.box")
    return result


def parse_run_config(data: Any) -> RunConfig:
    """
    Validate a decoded JSON document.

    Raises:
        ConfigError: For the first invalid value, with its JSON path
    """
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    known = {"system", "simulate", "portrait", "melnikov", "cycles", "transform", "name", "description"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown section '{unknown[0]}'")

    config = RunConfig(raw=data)
    if "system" in data:
        config.system = parse_system(data["system"])
    if "simulate" in data:
        config.simulate = _parse_simulate(data["simulate"], "$.simulate")
    if "portrait" in data:
        config.portrait = _parse_portrait(data["portrait"], "$.portrait")
    if "melnikov" in data:
        config.melnikov = _parse_melnikov(data["melnikov"], "$.melnikov")
    if "cycles" in data:
        config.cycles = _parse_cycles(data["cycles"], "$.cycles")
    if "transform" in data:
        config.transform = parse_map(_get(data["transform"], "map", "$.transform"), "$.transform.map")
    return config


def load_run_config(path: str) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Raises:
        ConfigError: For unreadable files, JSON syntax errors (line/column)
            and invalid values (JSON path)
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", f"line {e.lineno}, column {e.colno}") from e
    logger.info(f"loaded run config {path}")
    return parse_run_config(data)
