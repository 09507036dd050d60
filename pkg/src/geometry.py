"""Discontinuity geometries, zone classification and Möbius transformations."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .config import Config
from .field_core import (
    POINT_AT_INFINITY,
    HolomorphicField,
    Transformed,
    is_infinity,
    pushforward_rational,
)

logger = logging.getLogger(__name__)


class GeometryError(Exception):
    """Base exception for geometry errors."""
    pass


class DegenerateMap(GeometryError):
    """Raised when a Möbius map has (numerically) vanishing determinant."""
    pass


class UnsupportedPartition(GeometryError):
    """Raised when a map does not carry a partition onto a supported one."""
    pass


Point = Union[complex, type(POINT_AT_INFINITY)]


# --------------------------------------------------------------------------
# Möbius maps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MoebiusMap:
    """w = (a z + b) / (c z + d) with ad - bc != 0."""
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(self.determinant) <= 1e-12 * scale ** 2:
            raise DegenerateMap(
                f"ad - bc = {self.determinant} for map ({self.a}, {self.b}, {self.c}, {self.d})"
            )

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MoebiusMap":
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def derivative(self, z: complex) -> complex:
        """m'(z) = (ad - bc) / (cz + d)^2."""
        return self.determinant / (self.c * z + self.d) ** 2

    def compose(self, inner: "MoebiusMap") -> "MoebiusMap":
        """Return self ∘ inner."""
        return MoebiusMap.from_matrix(self.matrix @ inner.matrix)

    def __call__(self, z: Point) -> Point:
        return moebius_apply(self, z)


IDENTITY = MoebiusMap(1, 0, 0, 1)
# |z| = 1 -> Im w = 1, |z - 2| = 1 -> Im w = -1
EXTERNAL_TO_STRIP = MoebiusMap(0, -2j, 1, -1)
# |z - 2/3| = 1/3 -> Im w = 1, |z| = 1 -> Im w = -1
INTERNAL_TO_STRIP = MoebiusMap(-2j, 0, 1, -1)
STRIP_TO_EXTERNAL = MoebiusMap(1, -2j, 1, 0)
STRIP_TO_INTERNAL = MoebiusMap(1, 0, 1, 2j)

NAMED_MAPS = {
    "identity": IDENTITY,
    "external_to_strip": EXTERNAL_TO_STRIP,
    "internal_to_strip": INTERNAL_TO_STRIP,
    "strip_to_external": STRIP_TO_EXTERNAL,
    "strip_to_internal": STRIP_TO_INTERNAL,
}


def moebius_apply(m: MoebiusMap, z: Point) -> Point:
    """
    Apply a Möbius map on the extended plane.

    Args:
        m: The map
        z: A finite point or POINT_AT_INFINITY

    Returns:
        (az + b)/(cz + d), or POINT_AT_INFINITY at the pole z = -d/c

    Examples:
        >>> abs(moebius_apply(EXTERNAL_TO_STRIP, -1) - 1j) < 1e-15
        True
    """
    if is_infinity(z):
        return POINT_AT_INFINITY if m.c == 0 else complex(m.a / m.c)
    z = complex(z)
    den = m.c * z + m.d
    if den == 0:
        return POINT_AT_INFINITY
    return complex((m.a * z + m.b) / den)


def moebius_inverse(m: MoebiusMap) -> MoebiusMap:
    """Standard inverse z = (dw - b) / (-cw + a)."""
    return MoebiusMap(m.d, -m.b, -m.c, m.a)


def pushforward_field(m: MoebiusMap, f: HolomorphicField) -> HolomorphicField:
    """
    Transport a vector field through w = m(z).

    The rational form is ẇ = (a - cw)^2 / (ad - bc) · f((dw - b)/(a - cw)) with
    the composed denominator cleared. Catalog fields keep their closed form as
    a ``Transformed`` tag; repeated pushforwards compose the stored inverse.

    Args:
        m: The map
        f: The field in the z-plane

    Returns:
        The field in the w-plane

    Raises:
        DegenerateMap: If ad - bc vanishes
    """
    if m.is_identity():
        return f
    det = m.determinant
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if abs(det) <= 1e-12 * scale ** 2:
        raise DegenerateMap(f"ad - bc = {det}")

    num, den = pushforward_rational(m.a, m.b, m.c, m.d, f.num, f.den)
    tag = None
    if f.tag is not None:
        inverse = moebius_inverse(m)
        if isinstance(f.tag, Transformed):
            previous = MoebiusMap(*f.tag.inverse)
            inverse = previous.compose(inverse)
            tag = Transformed(f.tag.base, inverse.as_tuple())
        else:
            tag = Transformed(f.tag, inverse.as_tuple())
    return HolomorphicField(tuple(num.tolist()), tuple(den.tolist()), tag)


# --------------------------------------------------------------------------
# Partitions
# --------------------------------------------------------------------------

class PartitionKind(str, Enum):
    PARALLEL_STRIP = "parallel_strip"
    EXTERNAL_CIRCLES = "external_circles"
    INTERNAL_CIRCLES = "internal_circles"


class ZoneTag(str, Enum):
    PLUS = "+"
    CENTRAL = "c"
    MINUS = "-"
    BOUNDARY_1 = "b1"
    BOUNDARY_2 = "b2"
    TANGENCY = "tangency"

    @property
    def is_zone(self) -> bool:
        return self in (ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS)


ZONES = (ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS)


@dataclass(frozen=True)
class Boundary:
    """A line Im z = level or a circle |z - center| = radius."""
    shape: str
    level: float = 0.0
    center: complex = 0j
    radius: float = 0.0

    def signed(self, z: complex) -> float:
        if self.shape == "line":
            return z.imag - self.level
        return abs(z - self.center) - self.radius

    def normal(self, z: complex) -> complex:
        """Unit normal pointing to the side where signed() grows."""
        if self.shape == "line":
            return 1j
        v = z - self.center
        return v / abs(v)

    def samples(self, n: int = 200, span: float = 20.0) -> np.ndarray:
        if self.shape == "line":
            return np.linspace(-span, span, n) + 1j * self.level
        t = 2 * np.pi * (np.arange(n) + 0.5) / n
        return self.center + self.radius * np.exp(1j * t)


_BOUNDARIES = {
    PartitionKind.PARALLEL_STRIP: (Boundary("line", level=1.0), Boundary("line", level=-1.0)),
    PartitionKind.EXTERNAL_CIRCLES: (Boundary("circle", center=0j, radius=1.0),
                                     Boundary("circle", center=2 + 0j, radius=1.0)),
    PartitionKind.INTERNAL_CIRCLES: (Boundary("circle", center=2 / 3 + 0j, radius=1 / 3),
                                     Boundary("circle", center=0j, radius=1.0)),
}

# zone -> {boundary id: s}, inside the zone means s * g > 0
_ZONE_SIDES = {
    PartitionKind.PARALLEL_STRIP: {
        ZoneTag.PLUS: {1: 1}, ZoneTag.CENTRAL: {1: -1, 2: 1}, ZoneTag.MINUS: {2: -1},
    },
    PartitionKind.EXTERNAL_CIRCLES: {
        ZoneTag.PLUS: {1: -1}, ZoneTag.CENTRAL: {1: 1, 2: 1}, ZoneTag.MINUS: {2: -1},
    },
    PartitionKind.INTERNAL_CIRCLES: {
        ZoneTag.PLUS: {1: -1}, ZoneTag.CENTRAL: {1: 1, 2: -1}, ZoneTag.MINUS: {2: 1},
    },
}

_ZONE_SAMPLES = {
    PartitionKind.PARALLEL_STRIP: {ZoneTag.PLUS: 2j, ZoneTag.CENTRAL: 0j, ZoneTag.MINUS: -2j},
    PartitionKind.EXTERNAL_CIRCLES: {ZoneTag.PLUS: 0j, ZoneTag.CENTRAL: 3j, ZoneTag.MINUS: 2 + 0j},
    PartitionKind.INTERNAL_CIRCLES: {ZoneTag.PLUS: 2 / 3 + 0j, ZoneTag.CENTRAL: -0.5 + 0j,
                                     ZoneTag.MINUS: -2 + 0j},
}

TANGENCY_POINT = 1 + 0j


@dataclass(frozen=True)
class PartitionConfig:
    """One of the three supported discontinuity geometries."""
    kind: PartitionKind

    @property
    def boundaries(self) -> tuple[Boundary, Boundary]:
        return _BOUNDARIES[self.kind]

    @property
    def is_circular(self) -> bool:
        return self.kind != PartitionKind.PARALLEL_STRIP

    def boundary(self, boundary_id: int) -> Boundary:
        if boundary_id not in (1, 2):
            raise ValueError(f"boundary id must be 1 or 2, got {boundary_id!r}")
        return self.boundaries[boundary_id - 1]

    def zone_sides(self, zone: ZoneTag) -> dict[int, int]:
        """Adjacent boundary ids of a zone with the sign of g inside it."""
        return _ZONE_SIDES[self.kind][zone]

    def zone_sample(self, zone: ZoneTag) -> complex:
        return _ZONE_SAMPLES[self.kind][zone]

    def zones_of(self, boundary_id: int) -> tuple[ZoneTag, ZoneTag]:
        """(zone on the g > 0 side, zone on the g < 0 side) of a boundary."""
        pos = neg = None
        for zone in ZONES:
            side = self.zone_sides(zone).get(boundary_id)
            if side == 1:
                pos = zone
            elif side == -1:
                neg = zone
        return pos, neg


STRIP = PartitionConfig(PartitionKind.PARALLEL_STRIP)
EXTERNAL = PartitionConfig(PartitionKind.EXTERNAL_CIRCLES)
INTERNAL = PartitionConfig(PartitionKind.INTERNAL_CIRCLES)


def classify(config: PartitionConfig, z: Point, tol: float = None) -> ZoneTag:
    """
    Zone containing z.

    Args:
        config: The partition
        z: Point to classify (POINT_AT_INFINITY allowed)
        tol: Boundary tolerance, Config.BOUNDARY_TOL by default

    Returns:
        A zone, BOUNDARY_1/BOUNDARY_2 within tol of a boundary, or TANGENCY
        within tol of z = 1 for circle kinds (and at infinity for the strip,
        whose lines meet there)

    Examples:
        >>> classify(STRIP, 2j)
        <ZoneTag.PLUS: '+'>
        >>> classify(INTERNAL, -2)
        <ZoneTag.MINUS: '-'>
    """
    tol = Config.BOUNDARY_TOL if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    if is_infinity(z):
        if config.kind == PartitionKind.PARALLEL_STRIP:
            return ZoneTag.TANGENCY
        if config.kind == PartitionKind.EXTERNAL_CIRCLES:
            return ZoneTag.CENTRAL
        return ZoneTag.MINUS
    z = complex(z)
    if config.is_circular and abs(z - TANGENCY_POINT) <= tol:
        return ZoneTag.TANGENCY
    g1, g2 = (b.signed(z) for b in config.boundaries)
    if abs(g1) <= tol:
        return ZoneTag.BOUNDARY_1
    if abs(g2) <= tol:
        return ZoneTag.BOUNDARY_2
    values = {1: g1, 2: g2}
    for zone in ZONES:
        if all(s * values[bid] > 0 for bid, s in config.zone_sides(zone).items()):
            return zone
    # unreachable for the supported partitions
    raise UnsupportedPartition(f"point {z} lies in no zone of {config.kind.value}")


def boundary_event_function(config: PartitionConfig, boundary_id: int) -> Callable[[complex], float]:
    """
    Signed event function of a boundary.

    Args:
        config: The partition
        boundary_id: 1 or 2

    Returns:
        g with g = 0 on the boundary (Im z ∓ 1 for lines, |z - c| - r for circles)
    """
    return config.boundary(boundary_id).signed


def image_partition(config: PartitionConfig, m: MoebiusMap) -> PartitionConfig:
    """
    Identify the partition a map carries ``config`` onto.

    Boundary samples must land on the same-numbered boundary of the target and
    every zone sample must keep its zone.

    Raises:
        UnsupportedPartition: If no supported partition matches
    """
    for target in (STRIP, EXTERNAL, INTERNAL):
        if _maps_onto(config, m, target):
            logger.debug(f"{config.kind.value} maps onto {target.kind.value}")
            return target
    raise UnsupportedPartition(
        f"map {m.as_tuple()} does not carry {config.kind.value} onto a supported partition"
    )


def _maps_onto(config: PartitionConfig, m: MoebiusMap, target: PartitionConfig) -> bool:
    for bid in (1, 2):
        for z in config.boundary(bid).samples(64, span=10.0):
            w = moebius_apply(m, z)
            if is_infinity(w):
                continue
            if abs(target.boundary(bid).signed(w)) > 1e-8 * max(1.0, abs(w)):
                return False
    for zone in ZONES:
        w = moebius_apply(m, config.zone_sample(zone))
        if classify(target, w, 1e-9) != zone:
            return False
    return True
