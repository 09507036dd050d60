"""Worked-example systems: strip return maps, strip crossing systems and circle systems."""

from .crossing_solver import CircleClass
from .field_core import HolomorphicField, InversePower, LinearCenter, Monomial, RationalNormal, ReciprocalPoly
from .geometry import STRIP, ZoneTag
from .poincare import StripReturnParams
from .pwhs_system import PiecewiseSystem

PLUS, CENTRAL, MINUS = ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS


def _reciprocal_linear(center: complex, lam: complex = 1j) -> HolomorphicField:
    """ż = 1 / (lam (z - center))."""
    return HolomorphicField.from_tag(ReciprocalPoly((-lam * center, lam)))


def _center(lam: complex, center: complex) -> HolomorphicField:
    return HolomorphicField.from_tag(LinearCenter(lam, center))


# Central fields of the strip return-map examples, with their default offset
STRIP_CENTRALS = {
    "lc1": (HolomorphicField.from_tag(Monomial(1)), 1.0),
    "lc3": (HolomorphicField.from_tag(Monomial(3)), 2.0),
    "lc31": (HolomorphicField.from_tag(RationalNormal(2, 1.0)), 2.0),
    "lc5": (HolomorphicField.from_tag(InversePower(1)), 1.0),
}


def strip_params(label: str, a: float = -1.0, b: float = 1.0, c: float = -1.0, d: float = 1.0,
                 offset: float = None) -> StripReturnParams:
    """
    Return-map parameters of a strip example.

    Args:
        label: One of lc1 (iz), lc3 (iz^3), lc31 (iz^2/(1+z)), lc5 (i/z)
        a, b, c, d: Outer multipliers a + ib and c + id
        offset: x0 = x1, the example default when omitted

    Raises:
        KeyError: For an unknown label
    """
    central, default = STRIP_CENTRALS[label]
    x = default if offset is None else offset
    return StripReturnParams(a, b, c, d, x, x, central, label)


def crossing_d_one() -> PiecewiseSystem:
    """Reciprocal-linear outer zones with a linear central polynomial (one cycle)."""
    return PiecewiseSystem(STRIP, {
        PLUS: _reciprocal_linear(2.25 + 6j),
        CENTRAL: _reciprocal_linear(0.5 - 1j, -1 + 1j),
        MINUS: _reciprocal_linear(-4j),
    }, name="crossing_d_one")


def crossing_d_two() -> PiecewiseSystem:
    """Reciprocal-linear outer zones with a quadratic central polynomial (two cycles)."""
    return PiecewiseSystem(STRIP, {
        PLUS: _reciprocal_linear(0.47 + 6j),
        CENTRAL: HolomorphicField.from_tag(ReciprocalPoly((-10 - 2j, 1 + 7j, 1 - 1j))),
        MINUS: _reciprocal_linear(1.8 - 4j),
    }, name="crossing_d_two")


def circle_fields_external() -> dict:
    """Linear centers on the external circles with two crossing cycles."""
    return {
        PLUS: _center(1j, 1.0980423999 - 0.80012406276j),
        CENTRAL: _center(1j, 1 + 0.995016j),
        MINUS: _center(-1j, 3.2900009902 + 0.9400008902j),
    }


def circle_fields_internal() -> dict:
    """Linear centers on the internal circles with two crossing cycles."""
    return {
        PLUS: _center(1j, -0.2 - 0.6j),
        CENTRAL: _center(-1j, 1 + 1j),
        MINUS: _center(1j, -0.6 - 0.4j),
    }


CIRCLE_EXAMPLES = {
    "circle_external": (CircleClass.C2, circle_fields_external),
    "circle_internal": (CircleClass.C3, circle_fields_internal),
}

STRIP_CROSSING_EXAMPLES = {
    "crossing_d_one": crossing_d_one,
    "crossing_d_two": crossing_d_two,
}
