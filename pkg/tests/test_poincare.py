import numpy as np
import pytest

from src.field_core import HolomorphicField, Monomial, UnsupportedField
from src.geometry import STRIP_TO_EXTERNAL, ZoneTag
from src.poincare import (
    InvalidReturnParams,
    NoTransit,
    StripReturnParams,
    build_strip_system,
    central_transit,
    cycle_transits,
    half_return_lower,
    half_return_upper,
    numeric_fixed_point,
    numeric_poincare,
    poincare_fixed_point,
    poincare_map,
    poincare_slope,
)
from src.presets import STRIP_CENTRALS, strip_params
from src.pwhs_system import transform_system

ROTATION = HolomorphicField.from_tag(Monomial(1))


def test_parameter_signs_are_checked():
    with pytest.raises(InvalidReturnParams):
        StripReturnParams(1.0, 1.0, -1.0, 1.0, 1.0, 1.0, ROTATION)
    with pytest.raises(InvalidReturnParams):
        StripReturnParams(-1.0, 1.0, -1.0, -1.0, 1.0, 1.0, ROTATION)


def test_map_is_affine_with_the_product_slope(lc1):
    slope = poincare_slope(lc1)
    assert slope == pytest.approx(np.exp(-2 * np.pi))
    assert poincare_map(lc1, 0.7) - poincare_map(lc1, -0.3) == pytest.approx(slope)


def test_map_composes_the_half_returns(lc1):
    s = -0.4
    assert poincare_map(lc1, s) == pytest.approx(half_return_upper(lc1, half_return_lower(lc1, s)))


def test_fixed_point_of_the_rotation_example(lc1):
    s_star = poincare_fixed_point(lc1)
    assert s_star == pytest.approx(-1.0903314, abs=1e-6)
    assert poincare_map(lc1, s_star) == pytest.approx(s_star, abs=1e-12)


@pytest.mark.parametrize("label", sorted(STRIP_CENTRALS))
def test_every_example_has_a_fixed_point(label):
    params = strip_params(label)
    assert params.offsets_admissible()
    s_star = poincare_fixed_point(params)
    assert poincare_map(params, s_star) == pytest.approx(s_star, abs=1e-12)
    u, v = cycle_transits(params, s_star)
    assert v == pytest.approx(s_star, abs=1e-12)
    assert u == pytest.approx(half_return_lower(params, s_star))


def test_small_offsets_are_flagged():
    assert not strip_params("lc3", offset=1.0).offsets_admissible()


def test_central_transit_of_the_rotation():
    assert central_transit(ROTATION, 0.5, "up") == 0.5
    assert central_transit(ROTATION, -0.5, "down") == -0.5


def test_transit_against_the_rotation_fails():
    with pytest.raises(NoTransit):
        central_transit(ROTATION, -0.5, "up")


def test_even_exponent_has_no_symmetric_transit():
    with pytest.raises(UnsupportedField):
        central_transit(HolomorphicField.from_tag(Monomial(2)), 1.0)


def test_transit_direction_is_checked():
    with pytest.raises(ValueError):
        central_transit(ROTATION, 0.5, "sideways")


def test_strip_system_layout(lc1):
    system = build_strip_system(lc1)
    # Σ- center at x0 - i, Σ+ center at -x1 + i
    assert system.fields[ZoneTag.MINUS](1 - 1j) == pytest.approx(0)
    assert system.fields[ZoneTag.PLUS](-1 + 1j) == pytest.approx(0)
    assert system.fields[ZoneTag.CENTRAL] is lc1.central


def test_numeric_return_matches_the_closed_form(lc1):
    system = build_strip_system(lc1)
    for s in (-1.5, poincare_fixed_point(lc1)):
        assert numeric_poincare(system, s) == pytest.approx(poincare_map(lc1, s), abs=1e-6)


def test_numeric_fixed_point(lc1):
    s_star = poincare_fixed_point(lc1)
    found = numeric_fixed_point(build_strip_system(lc1), s_star + 0.05, tol=1e-9)
    assert found == pytest.approx(s_star, abs=1e-6)


def test_return_map_survives_the_circle_chart(lc1):
    s_star = poincare_fixed_point(lc1)
    circle = transform_system(build_strip_system(lc1), STRIP_TO_EXTERNAL)
    assert numeric_poincare(circle, s_star) == pytest.approx(s_star, abs=1e-6)
