import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from src.field_core import POINT_AT_INFINITY, HolomorphicField, LinearCenter, Monomial, Transformed
from src.geometry import (
    EXTERNAL,
    EXTERNAL_TO_STRIP,
    IDENTITY,
    INTERNAL,
    INTERNAL_TO_STRIP,
    NAMED_MAPS,
    STRIP,
    STRIP_TO_EXTERNAL,
    STRIP_TO_INTERNAL,
    DegenerateMap,
    MoebiusMap,
    UnsupportedPartition,
    ZoneTag,
    boundary_event_function,
    classify,
    image_partition,
    moebius_apply,
    moebius_inverse,
    pushforward_field,
)


def test_degenerate_map_is_rejected():
    with pytest.raises(DegenerateMap):
        MoebiusMap(1, 2, 2, 4)


def test_apply_handles_infinity():
    assert moebius_apply(EXTERNAL_TO_STRIP, 1) is POINT_AT_INFINITY
    assert moebius_apply(EXTERNAL_TO_STRIP, POINT_AT_INFINITY) == 0
    assert moebius_apply(IDENTITY, POINT_AT_INFINITY) is POINT_AT_INFINITY


@pytest.mark.parametrize("m", list(NAMED_MAPS.values()))
def test_inverse_undoes_the_map(m):
    inv = moebius_inverse(m)
    for w in (0.3 + 0.2j, -2.0 + 5.0j):
        assert moebius_apply(m, moebius_apply(inv, w)) == pytest.approx(w)


def test_compose_and_derivative():
    m = MoebiusMap(2, 1, 1, 3)
    n = MoebiusMap(1, -1j, 0.5, 1)
    z = 0.4 - 0.7j
    assert m.compose(n)(z) == pytest.approx(m(n(z)))
    h = 1e-6
    assert m.derivative(z) == pytest.approx((m(z + h) - m(z - h)) / (2 * h), rel=1e-6)


def test_unit_circle_maps_to_the_upper_line():
    for theta in np.linspace(0.3, 6.0, 9):
        w = moebius_apply(EXTERNAL_TO_STRIP, np.exp(1j * theta))
        assert w.imag == pytest.approx(1.0)
        assert w.real == pytest.approx(-1 / np.tan(theta / 2))


@pytest.mark.parametrize("z, expected", [
    (0j, ZoneTag.CENTRAL),
    (2j, ZoneTag.PLUS),
    (-2j, ZoneTag.MINUS),
    (5 + 1j, ZoneTag.BOUNDARY_1),
    (-3 - 1j, ZoneTag.BOUNDARY_2),
    (POINT_AT_INFINITY, ZoneTag.TANGENCY),
])
def test_classify_strip(z, expected):
    assert classify(STRIP, z) == expected


@pytest.mark.parametrize("config, z, expected", [
    (EXTERNAL, 0j, ZoneTag.PLUS),
    (EXTERNAL, 3j, ZoneTag.CENTRAL),
    (EXTERNAL, 2 + 0j, ZoneTag.MINUS),
    (EXTERNAL, 1 + 0j, ZoneTag.TANGENCY),
    (EXTERNAL, -1 + 0j, ZoneTag.BOUNDARY_1),
    (EXTERNAL, 3 + 0j, ZoneTag.BOUNDARY_2),
    (INTERNAL, 2 / 3 + 0j, ZoneTag.PLUS),
    (INTERNAL, -0.5 + 0j, ZoneTag.CENTRAL),
    (INTERNAL, -2 + 0j, ZoneTag.MINUS),
    (INTERNAL, 1 / 3 + 0j, ZoneTag.BOUNDARY_1),
    (INTERNAL, 1j, ZoneTag.BOUNDARY_2),
    (INTERNAL, 1 + 0j, ZoneTag.TANGENCY),
])
def test_classify_circles(config, z, expected):
    assert classify(config, z) == expected


def test_classify_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        classify(STRIP, 0j, tol=0.0)


def test_event_function_vanishes_on_its_boundary():
    g = boundary_event_function(INTERNAL, 1)
    assert g(2 / 3 + 1j / 3) == pytest.approx(0.0, abs=1e-15)
    assert boundary_event_function(STRIP, 2)(3 - 0.5j) == pytest.approx(0.5)


@pytest.mark.parametrize("config, m, expected", [
    (STRIP, STRIP_TO_EXTERNAL, EXTERNAL),
    (STRIP, STRIP_TO_INTERNAL, INTERNAL),
    (EXTERNAL, EXTERNAL_TO_STRIP, STRIP),
    (INTERNAL, INTERNAL_TO_STRIP, STRIP),
    (STRIP, IDENTITY, STRIP),
])
def test_image_partition(config, m, expected):
    assert image_partition(config, m) == expected


def test_image_partition_rejects_unsupported_maps():
    with pytest.raises(UnsupportedPartition):
        image_partition(STRIP, MoebiusMap(2, 0, 0, 1))


def test_zones_of_each_boundary():
    assert STRIP.zones_of(1) == (ZoneTag.PLUS, ZoneTag.CENTRAL)
    assert STRIP.zones_of(2) == (ZoneTag.CENTRAL, ZoneTag.MINUS)
    with pytest.raises(ValueError):
        STRIP.boundary(3)


def test_pushforward_identity_returns_the_field():
    f = HolomorphicField.from_tag(Monomial(1))
    assert pushforward_field(IDENTITY, f) is f


def _rational_value(f, w):
    return P.polyval(w, f.num) / P.polyval(w, f.den)


def test_rotation_pushed_to_the_external_circles():
    # iz on the strip becomes -i(w - 1) on the external circles
    g = pushforward_field(STRIP_TO_EXTERNAL, HolomorphicField.from_tag(Monomial(1)))
    assert isinstance(g.tag, Transformed)
    for w in (0.3 + 0.2j, 2.5 - 1.0j):
        assert g(w) == pytest.approx(-1j * (w - 1))
        assert _rational_value(g, w) == pytest.approx(-1j * (w - 1))


def test_circle_centers_pushed_to_the_strip():
    center = HolomorphicField.from_tag(LinearCenter(-1j, 1.0))
    w = 0.7 + 2.0j
    assert pushforward_field(EXTERNAL_TO_STRIP, center)(w) == pytest.approx(1j * w)
    assert pushforward_field(INTERNAL_TO_STRIP, center)(w) == pytest.approx(1j * (w + 2j))


def test_repeated_pushforward_composes():
    f = HolomorphicField.from_tag(LinearCenter(1j, 0.5 - 0.2j))
    back = pushforward_field(EXTERNAL_TO_STRIP, pushforward_field(STRIP_TO_EXTERNAL, f))
    assert isinstance(back.tag, Transformed)
    assert isinstance(back.tag.base, LinearCenter)
    for z in (0.1 + 0.4j, -1.5 + 3.0j):
        assert back(z) == pytest.approx(f(z))


def test_pushforward_obeys_the_chain_rule():
    f = HolomorphicField.from_tag(Monomial(3))
    m = STRIP_TO_INTERNAL
    g = pushforward_field(m, f)
    z = 0.6 + 0.3j
    assert g(m(z)) == pytest.approx(m.derivative(z) * f(z))
    assert _rational_value(g, m(z)) == pytest.approx(m.derivative(z) * f(z))
