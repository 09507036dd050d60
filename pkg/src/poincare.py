"""Half-return maps, the strip Poincaré map, its fixed point and a numeric oracle."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Config
from .field_core import (
    HolomorphicField,
    InversePower,
    LinearCenter,
    Monomial,
    UnsupportedField,
    level_function,
)
from .geometry import (
    EXTERNAL_TO_STRIP,
    IDENTITY,
    INTERNAL_TO_STRIP,
    STRIP,
    MoebiusMap,
    PartitionKind,
    ZoneTag,
    moebius_apply,
    moebius_inverse,
)
from .pwhs_system import FlowError, PiecewiseSystem, flow, integrate_in_zone

logger = logging.getLogger(__name__)


class PoincareError(Exception):
    """Base exception for return-map errors."""
    pass


class NoTransit(PoincareError):
    """Raised when a central orbit does not cross from one line to the other."""
    pass


class InvalidReturnParams(PoincareError):
    """Raised when strip parameters violate a < 0, c < 0, b > 0, d > 0."""
    pass


# Lower bounds on (x0, x1) under which the worked strip systems have a cycle
ADMISSIBLE_OFFSETS = {
    "lc1": (0.0, 0.0),
    "lc3": (np.sqrt(3.0), np.sqrt(3.0)),
    "lc31": (1.36, 0.55),
    "lc5": (1.0, 1.0),
}

STRIP_CHARTS = {
    PartitionKind.PARALLEL_STRIP: IDENTITY,
    PartitionKind.EXTERNAL_CIRCLES: EXTERNAL_TO_STRIP,
    PartitionKind.INTERNAL_CIRCLES: INTERNAL_TO_STRIP,
}


@dataclass(frozen=True)
class StripReturnParams:
    """
    Parameters of a strip system with linear centers in the outer zones.

    Σ+ carries ż = (a + ib)(z - i + x1) and Σ- carries ż = (c + id)(z + i - x0);
    ``central`` is one of iz, iz^n (n odd), iz^2/(1+z) or i/z^n (n odd).
    """
    a: float
    b: float
    c: float
    d: float
    x0: float
    x1: float
    central: HolomorphicField
    label: str = ""

    def __post_init__(self):
        if not (self.a < 0 and self.c < 0 and self.b > 0 and self.d > 0):
            raise InvalidReturnParams(
                f"need a, c < 0 and b, d > 0, got a={self.a}, b={self.b}, c={self.c}, d={self.d}"
            )

    @property
    def lower_factor(self) -> float:
        return float(np.exp(self.c * np.pi / self.d))

    @property
    def upper_factor(self) -> float:
        return float(np.exp(self.a * np.pi / self.b))

    def offsets_admissible(self) -> bool:
        """Check (x0, x1) against the tabulated bounds for ``label``."""
        if self.label not in ADMISSIBLE_OFFSETS:
            return True
        lo0, lo1 = ADMISSIBLE_OFFSETS[self.label]
        return self.x0 >= lo0 and self.x1 >= lo1


def build_strip_system(params: StripReturnParams) -> PiecewiseSystem:
    """The piecewise system whose return map ``params`` describe."""
    plus = HolomorphicField.from_tag(LinearCenter(complex(params.a, params.b), complex(-params.x1, 1.0)))
    minus = HolomorphicField.from_tag(LinearCenter(complex(params.c, params.d), complex(params.x0, -1.0)))
    return PiecewiseSystem(
        STRIP,
        {ZoneTag.PLUS: plus, ZoneTag.CENTRAL: params.central, ZoneTag.MINUS: minus},
        name=params.label,
    )


def half_return_lower(params: StripReturnParams, s: float) -> float:
    """Exit x on Im z = -1 after the half-turn in Σ- from s - i."""
    return -(s - params.x0) * params.lower_factor + params.x0


def half_return_upper(params: StripReturnParams, u: float) -> float:
    """Exit x on Im z = 1 after the half-turn in Σ+ from u + i."""
    return -(u + params.x1) * params.upper_factor - params.x1


def _check_symmetric_central(central: HolomorphicField) -> None:
    tag = central.tag
    if isinstance(tag, (Monomial, InversePower)) and tag.n % 2 == 0:
        raise UnsupportedField(
            f"central field with even exponent n = {tag.n} has no symmetric transit"
        )


def central_transit(central: HolomorphicField, x: float, direction: str = "up") -> float:
    """
    Transit of the central field across the strip, x ∓ i -> x ± i.

    The orbit through (x, ∓1) is integrated inside the strip and must reach the
    other line at the same abscissa.

    Args:
        central: A catalog central field
        x: Abscissa of the entry point
        direction: "up" (from Im z = -1) or "down" (from Im z = 1)

    Returns:
        x

    Raises:
        UnsupportedField: For even-exponent monomial or inverse-power fields
        NoTransit: If the orbit does not reach the other line at x
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    _check_symmetric_central(central)
    y_start = -1.0 if direction == "up" else 1.0
    y_end = -y_start

    try:
        level = level_function(central)
        gap = abs(level(x, y_start) - level(x, y_end))
        if gap > 1e-9 * max(1.0, abs(level(x, y_start))):
            raise NoTransit(f"H({x}, {y_start}) != H({x}, {y_end}); orbit misses {x}{y_end:+}i")
    except UnsupportedField:
        logger.debug("no level function, transit checked by integration only")

    system = PiecewiseSystem(STRIP, {zone: central for zone in (ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS)})
    start = complex(x, y_start)
    try:
        run = integrate_in_zone(system, start, ZoneTag.CENTRAL, Config.ARC_MAX_TIME)
    except FlowError as e:
        raise NoTransit(f"orbit from {start} failed inside the strip: {e}") from e
    event = run.event
    if event is None or event.boundary_id != (1 if direction == "up" else 2):
        raise NoTransit(f"orbit from {start} does not reach Im z = {y_end}")
    if abs(event.z.real - x) > 1e-6:
        raise NoTransit(f"orbit from {start} reaches {event.z}, not x = {x}")
    return x


def poincare_slope(params: StripReturnParams) -> float:
    """Π'(s) = e^(cπ/d + aπ/b)."""
    return params.lower_factor * params.upper_factor


def poincare_map(params: StripReturnParams, s: float) -> float:
    """
    Closed-form Poincaré map on Im z = -1.

    Π(s) = ((s - x0) e^(cπ/d) - x0 - x1) e^(aπ/b) - x1
    """
    return ((s - params.x0) * params.lower_factor - params.x0 - params.x1) * params.upper_factor - params.x1


def poincare_fixed_point(params: StripReturnParams) -> float:
    """
    Unique fixed point of the affine Poincaré map.

    Returns:
        s* = (-x0 e^(cπ/d+aπ/b) - (x0 + x1) e^(aπ/b) - x1) / (1 - e^(cπ/d+aπ/b))
    """
    k = poincare_slope(params)
    x0, x1 = params.x0, params.x1
    s_star = (-x0 * k - (x0 + x1) * params.upper_factor - x1) / (1.0 - k)
    logger.info(f"fixed point s* = {s_star:.12g}, slope {k:.3e}")
    return s_star


def cycle_transits(params: StripReturnParams, s: float) -> tuple[float, float]:
    """
    Verify both central transits of the cycle through s - i.

    Returns:
        (u, v): the abscissas crossed upward and downward

    Raises:
        NoTransit: If either transit fails
    """
    u = half_return_lower(params, s)
    central_transit(params.central, u, "up")
    v = half_return_upper(params, u)
    central_transit(params.central, v, "down")
    return u, v


def numeric_poincare(system: PiecewiseSystem, s: float, chart: Optional[MoebiusMap] = None) -> float:
    """
    Return abscissa on the section Im w = -1 by full integration.

    Circle systems are started at the preimage of s - i under their strip
    chart and the return point is read through the same chart.

    Args:
        system: A strip or circle system
        s: Section coordinate
        chart: Map to the strip coordinate, by partition kind when omitted

    Returns:
        Re of the charted fourth crossing, which lies on the second boundary

    Raises:
        FlowError: Propagated from the integrator
        PoincareError: If the fourth crossing is not on the section
    """
    chart = STRIP_CHARTS[system.config.kind] if chart is None else chart
    z0 = moebius_apply(moebius_inverse(chart), complex(s, -1.0))
    trajectory = flow(system, z0, max_crossings=4)
    last = trajectory.events[-1]
    if last.boundary_id != 2:
        raise PoincareError(f"fourth crossing from s = {s} is on boundary {last.boundary_id}")
    w = moebius_apply(chart, last.z)
    logger.debug(f"numeric return {s} -> {w}")
    return float(np.real(w))


def numeric_fixed_point(
    system: PiecewiseSystem, s0: float, tol: float = 1e-10, max_iter: int = 30,
    chart: Optional[MoebiusMap] = None,
) -> float:
    """
    Fixed point of the numeric return map by direct iteration.

    Raises:
        PoincareError: If the iteration does not settle within max_iter steps
    """
    s = s0
    for i in range(max_iter):
        s_next = numeric_poincare(system, s, chart)
        if abs(s_next - s) <= tol:
            logger.info(f"numeric fixed point {s_next:.12g} after {i + 1} returns")
            return s_next
        s = s_next
    raise PoincareError(f"return map iteration from {s0} did not settle in {max_iter} steps")
