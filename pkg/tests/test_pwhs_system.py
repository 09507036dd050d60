import numpy as np
import pytest

from src.field_core import Constant, HolomorphicField, Monomial, ReciprocalPoly
from src.geometry import EXTERNAL, STRIP, STRIP_TO_EXTERNAL, ZONES, ZoneTag
from src.pwhs_system import (
    CrossingType,
    FlowError,
    PiecewiseSystem,
    SlidingEncountered,
    TangencyEncountered,
    Timeout,
    closure_error,
    crossing_type,
    flow,
    integrate_in_zone,
    perturbation_field,
    transform_system,
)


def _uniform(f: HolomorphicField) -> PiecewiseSystem:
    return PiecewiseSystem(STRIP, {zone: f for zone in ZONES})


def _sliding_system() -> PiecewiseSystem:
    # both sides of Im z = 1 push into the line
    return PiecewiseSystem(STRIP, {
        ZoneTag.PLUS: HolomorphicField.from_tag(Constant(-1j)),
        ZoneTag.CENTRAL: HolomorphicField.from_tag(Constant(1j)),
        ZoneTag.MINUS: HolomorphicField.from_tag(Constant(1j)),
    })


def test_missing_zone_is_rejected():
    f = HolomorphicField.from_tag(Monomial(1))
    with pytest.raises(ValueError, match="zones without a field"):
        PiecewiseSystem(STRIP, {ZoneTag.PLUS: f, ZoneTag.CENTRAL: f})


def test_negative_epsilon_is_rejected(rotation):
    with pytest.raises(ValueError):
        PiecewiseSystem(STRIP, rotation.fields, epsilon=-1.0)


def test_vector_adds_the_scaled_perturbation(rotation):
    h = perturbation_field([1.0, 0.0], [0.0, 2.0])
    system = PiecewiseSystem(STRIP, rotation.fields, {ZoneTag.CENTRAL: h}, epsilon=0.5)
    z = 0.3 + 0.1j
    assert system.vector(ZoneTag.CENTRAL, z) == pytest.approx(1j * z + 0.5 * (1 + 2j * z))
    assert system.vector(ZoneTag.PLUS, z) == pytest.approx(1j * z)
    assert system.with_epsilon(0.0).vector(ZoneTag.CENTRAL, z) == pytest.approx(1j * z)


def test_perturbation_field_needs_equal_lengths():
    with pytest.raises(ValueError):
        perturbation_field([1.0], [1.0, 2.0])


def test_orbit_inside_the_strip_closes(rotation):
    trajectory = flow(rotation, 0.5 + 0j, max_time=2 * np.pi)
    assert trajectory.events == []
    assert trajectory.duration == pytest.approx(2 * np.pi)
    assert closure_error(trajectory) < 1e-7


def test_crossings_of_a_large_circle(rotation):
    trajectory = flow(rotation, 2 + 0j, max_crossings=4)
    events = trajectory.events
    assert [e.boundary_id for e in events] == [1, 1, 2, 2]
    assert [e.to_zone for e in events] == [ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS, ZoneTag.CENTRAL]
    expected_times = [np.pi / 6, 5 * np.pi / 6, 7 * np.pi / 6, 11 * np.pi / 6]
    for event, t in zip(events, expected_times):
        assert event.t == pytest.approx(t, abs=1e-7)
        assert abs(event.z) == pytest.approx(2.0, abs=1e-7)
    assert events[0].z == pytest.approx(np.sqrt(3) + 1j, abs=1e-7)
    assert events[-1].z == pytest.approx(np.sqrt(3) - 1j, abs=1e-7)


def test_trajectory_rows_mark_each_crossing_once(rotation):
    trajectory = flow(rotation, 2 + 0j, max_crossings=4)
    rows = trajectory.rows()
    times = [row[0] for row in rows]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert sum(row[4] for row in rows) == 4
    assert {row[3] for row in rows} == {"+", "c", "-"}


def test_backward_time_reverses_the_rotation(rotation):
    trajectory = flow(rotation, 2 + 0j, max_crossings=1, direction=-1)
    event = trajectory.events[0]
    assert event.boundary_id == 2
    assert event.z == pytest.approx(np.sqrt(3) - 1j, abs=1e-7)
    assert event.t == pytest.approx(-np.pi / 6, abs=1e-7)


def test_timeout_when_crossings_are_not_reached(rotation):
    with pytest.raises(Timeout) as info:
        flow(rotation, 0.5 + 0j, max_time=1.0, max_crossings=1)
    assert info.value.trajectory is not None


def test_crossing_types(rotation):
    assert crossing_type(rotation, np.sqrt(3) + 1j, 1) == CrossingType.TRANSVERSAL
    assert crossing_type(rotation, 1j, 1) == CrossingType.TANGENCY
    assert crossing_type(_sliding_system(), 0.5 + 1j, 1) == CrossingType.SLIDING


def test_crossing_type_needs_a_boundary_point(rotation):
    with pytest.raises(ValueError):
        crossing_type(rotation, 0.5j, 1)


def test_tangency_point_of_circles():
    f = HolomorphicField.from_tag(Monomial(1))
    system = PiecewiseSystem(EXTERNAL, {zone: f for zone in ZONES})
    assert crossing_type(system, 1 + 0j) == CrossingType.TANGENCY
    with pytest.raises(TangencyEncountered):
        flow(system, 1 + 0j, max_time=1.0)


def test_sliding_halts_with_the_partial_trajectory():
    with pytest.raises(SlidingEncountered) as info:
        flow(_sliding_system(), 0j, max_time=5.0)
    trajectory = info.value.trajectory
    assert len(trajectory.segments) == 1
    assert trajectory.events[0].z == pytest.approx(1j, abs=1e-8)
    assert trajectory.events[0].t == pytest.approx(1.0, abs=1e-8)


def test_start_on_a_boundary(rotation):
    trajectory = flow(rotation, np.sqrt(3) + 1j, max_crossings=1)
    assert trajectory.segments[0].zone == ZoneTag.PLUS
    assert trajectory.events[0].z == pytest.approx(-np.sqrt(3) + 1j, abs=1e-7)


def test_pole_approach_stops_the_flow():
    # ż = -1/z runs into its pole at the origin in finite time
    system = _uniform(HolomorphicField.from_tag(ReciprocalPoly((0, -1))))
    with pytest.raises(FlowError):
        flow(system, 0.5 + 0j, max_time=10.0)


def test_integrate_in_zone_checks_the_start(rotation):
    with pytest.raises(ValueError):
        integrate_in_zone(rotation, 2j, ZoneTag.MINUS, 1.0)
    with pytest.raises(ValueError):
        integrate_in_zone(rotation, 0j, ZoneTag.BOUNDARY_1, 1.0)


def test_integrand_is_accumulated(rotation):
    run = integrate_in_zone(rotation, 0.5 + 0j, ZoneTag.CENTRAL, 2.0, integrand=lambda z: 1.0)
    assert run.event is None
    assert run.integral == pytest.approx(2.0, rel=1e-8)


def test_transform_system_moves_the_partition(rotation):
    h = perturbation_field([0.0, 1.0], [1.0, 0.0])
    system = PiecewiseSystem(STRIP, rotation.fields, {ZoneTag.MINUS: h}, epsilon=0.1, name="r")
    moved = transform_system(system, STRIP_TO_EXTERNAL)
    assert moved.config == EXTERNAL
    assert moved.epsilon == 0.1
    assert set(moved.perturbations) == {ZoneTag.MINUS}
    w = 0.4 + 2.0j
    assert moved.fields[ZoneTag.CENTRAL](w) == pytest.approx(-1j * (w - 1))
