import numpy as np
import pytest

from src.crossing_solver import (
    CircleClass,
    CycleCandidate,
    NonIsolatedSolutions,
    UnsupportedZoneForm,
    bezout_bound,
    build_crossing_system,
    circle_chart,
    circle_system,
    filter_valid_cycles,
    find_roots,
    reduction_map,
    solve_circle_class,
    solve_cycles,
)
from src.field_core import HolomorphicField, LinearCenter, Monomial, ReciprocalPoly
from src.geometry import EXTERNAL, STRIP, ZONES, ZoneTag
from src.presets import circle_fields_external, circle_fields_internal
from src.pwhs_system import PiecewiseSystem, transform_system


def _near_either_label(c: CycleCandidate, s: float, t: float = None, tol: float = 1e-6) -> bool:
    first = abs(c.s1 - s) <= tol and (t is None or abs(c.t1 - t) <= tol)
    second = abs(c.s2 - s) <= tol and (t is None or abs(c.t2 - t) <= tol)
    return first or second


def test_reduction_of_an_even_quadratic():
    r = reduction_map(np.array([0.0, 0.0, 1.0]), np.array([1.0]))
    assert r(3.0) == pytest.approx(-3.0)
    assert r(r(0.4)) == pytest.approx(0.4)


def test_reduction_of_a_shifted_quadratic():
    # (x - 2)^2 / (x + 5) takes each value at two points paired by the map
    num, den = np.array([4.0, -4.0, 1.0]), np.array([5.0, 1.0])
    r = reduction_map(num, den)
    x = 0.3
    u = r(x)
    value = lambda v: np.polyval(num[::-1], v) / np.polyval(den[::-1], v)
    assert u != pytest.approx(x)
    assert value(u) == pytest.approx(value(x))


def test_reduction_rejects_cubic_and_constant_restrictions():
    with pytest.raises(UnsupportedZoneForm):
        reduction_map(np.array([0.0, 0.0, 0.0, 1.0]), np.array([1.0]))
    with pytest.raises(UnsupportedZoneForm):
        reduction_map(np.array([2.0]), np.array([1.0]))


def test_outer_involutions_of_the_linear_example(d_one_system):
    assert d_one_system.lower(1.3) == pytest.approx(-1.3)
    assert d_one_system.upper(1.0) == pytest.approx(3.5)
    assert d_one_system.central_degree == 1


def test_outer_involutions_of_the_quadratic_example(d_two_system):
    assert d_two_system.lower(1.0) == pytest.approx(2.6)
    assert d_two_system.upper(0.2) == pytest.approx(0.74)
    assert d_two_system.central_degree == 2


def test_linear_example_has_one_cycle(d_one_system):
    candidates = solve_cycles(d_one_system, source="d_one")
    valid = filter_valid_cycles(candidates)
    assert len(valid) == 1
    cycle = valid[0]
    assert cycle.s1 == pytest.approx(-1.652018966, abs=1e-6)
    assert cycle.t1 == pytest.approx(-1.054037933, abs=1e-6)
    assert cycle.s2 == pytest.approx(-cycle.s1)
    assert cycle.t2 == pytest.approx(4.5 - cycle.t1)
    assert cycle.closure_residual <= 1e-5
    assert cycle.consistent_orientation
    assert cycle.source == "d_one"


def test_quadratic_example_has_two_cycles_of_three_candidates(d_two_system):
    candidates = solve_cycles(d_two_system)
    valid = filter_valid_cycles(candidates)
    assert len(candidates) == 3
    assert len(valid) == 2
    assert [c.s1 for c in valid] == pytest.approx([-0.3333, -0.1003], abs=1e-3)
    assert [c.t1 for c in valid] == pytest.approx([-2.0429, -2.0102], abs=1e-3)
    invalid = [c for c in candidates if not c.valid]
    assert invalid[0].s1 == pytest.approx(-1.98017, abs=1e-4)
    assert invalid[0].t1 == pytest.approx(3.29957, abs=1e-4)
    for c in valid:
        assert c.s2 == pytest.approx(3.6 - c.s1)
        assert c.t2 == pytest.approx(0.94 - c.t1)
        assert c.closure_residual <= 1e-5


def test_partners_satisfy_the_reduced_equations(d_two_system):
    for s, t in find_roots(d_two_system):
        assert np.max(np.abs(d_two_system.residual(*d_two_system.partner(s, t)))) <= 1e-9


def test_root_count_respects_the_bezout_bound(d_one_system, d_two_system):
    for cs in (d_one_system, d_two_system):
        valid = filter_valid_cycles(solve_cycles(cs, check_closure=False))
        assert len(valid) <= bezout_bound(cs.central_degree)
    assert len(find_roots(d_two_system)) <= 2 * bezout_bound(2)


def test_bezout_bound():
    assert [bezout_bound(n) for n in (1, 2, 3, 4)] == [1, 3, 6, 10]
    with pytest.raises(ValueError):
        bezout_bound(0)


def test_search_parameters_are_checked(d_one_system):
    with pytest.raises(ValueError):
        find_roots(d_one_system, box=-1.0)
    with pytest.raises(ValueError):
        find_roots(d_one_system, seeds_per_axis=1)


def test_external_circle_example():
    candidates = solve_circle_class(CircleClass.C2, circle_fields_external(), source="c2")
    valid = filter_valid_cycles(candidates)
    # tangent central arcs leave the system one step from a continuum
    assert len(valid) == 2
    for s in (-2.422768823, -1.632401134):
        assert sum(_near_either_label(c, s) for c in valid) == 1
    for c in valid:
        assert c.closure_residual <= 1e-5
        assert len(c.circle_points) == 4
        # crossing points map back onto the two circles
        assert abs(c.circle_points[2]) == pytest.approx(1.0, abs=1e-9)
        assert abs(c.circle_points[0] - 2) == pytest.approx(1.0, abs=1e-9)


def test_external_circle_roots_satisfy_the_unreduced_equations():
    strip = transform_system(circle_system(CircleClass.C2, circle_fields_external()), circle_chart(CircleClass.C2))
    cs = build_crossing_system(strip)
    roots = find_roots(cs)
    assert 0 < len(roots) <= 4
    for s, t in roots:
        s2, t2 = cs.partner(s, t)
        assert cs.level_residual(s, s2, t, t2) <= 1e-10


def test_internal_circle_example():
    candidates = solve_circle_class("C3", circle_fields_internal())
    valid = filter_valid_cycles(candidates)
    for s, t in ((-1.260240290, -2.5680344499), (-1.128596670, -1.6659961088)):
        assert any(_near_either_label(c, s, t) for c in valid)
    assert all(c.source == "C3" for c in candidates)


def test_circle_fields_must_be_linear_centers():
    fields = circle_fields_external()
    fields[ZoneTag.CENTRAL] = HolomorphicField.from_tag(Monomial(1))
    with pytest.raises(UnsupportedZoneForm):
        solve_circle_class(CircleClass.C2, fields)


def test_continuum_of_cycles_is_reported():
    # identical reciprocal-linear zones: every level set crossing both lines closes
    f = HolomorphicField.from_tag(ReciprocalPoly((-1j * (1 + 1j), 1j)))
    cs = build_crossing_system(PiecewiseSystem(STRIP, {zone: f for zone in ZONES}))
    with pytest.raises(NonIsolatedSolutions) as info:
        find_roots(cs)
    assert len(info.value.roots) > 0


def test_constant_central_level_has_no_cycles():
    system = PiecewiseSystem(STRIP, {
        ZoneTag.PLUS: HolomorphicField.from_tag(ReciprocalPoly((6 - 2.25j, 1j))),
        ZoneTag.CENTRAL: HolomorphicField.from_tag(ReciprocalPoly((-1,))),
        ZoneTag.MINUS: HolomorphicField.from_tag(ReciprocalPoly((-4, 1j))),
    })
    assert find_roots(build_crossing_system(system)) == []


def test_unsupported_systems():
    center = HolomorphicField.from_tag(LinearCenter(1j, 0))
    with pytest.raises(UnsupportedZoneForm):
        build_crossing_system(PiecewiseSystem(EXTERNAL, {zone: center for zone in ZONES}))
    cubic = PiecewiseSystem(STRIP, {
        ZoneTag.PLUS: HolomorphicField.from_tag(ReciprocalPoly((6 - 2.25j, 1j))),
        ZoneTag.CENTRAL: HolomorphicField.from_tag(Monomial(3)),
        ZoneTag.MINUS: HolomorphicField.from_tag(ReciprocalPoly((-4, 1j))),
    })
    with pytest.raises(UnsupportedZoneForm):
        build_crossing_system(cubic)


def test_filter_keeps_ordered_pairs():
    good = CycleCandidate(-1.0, 1.0, -2.0, 3.0, True)
    bad = CycleCandidate(-1.0, 1.0, 3.0, -2.0, False)
    assert filter_valid_cycles([good, bad]) == [good]
    assert good.crossing_points == (-1 - 1j, 1 - 1j, 3 + 1j, -2 + 1j)
    assert good.as_dict()["consistent_orientation"] is None
