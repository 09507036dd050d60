"""Three-zone piecewise holomorphic systems and event-localized integration."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import bisect

from .config import Config
from .field_core import HolomorphicField, eval_field
from .geometry import (
    TANGENCY_POINT,
    ZONES,
    MoebiusMap,
    PartitionConfig,
    ZoneTag,
    classify,
    image_partition,
    pushforward_field,
)

logger = logging.getLogger(__name__)


class FlowError(Exception):
    """Base exception for trajectory integration errors."""

    def __init__(self, message: str, trajectory: Optional["Trajectory"] = None):
        super().__init__(message)
        self.trajectory = trajectory


class PoleApproach(FlowError):
    """Raised when a trajectory comes within POLE_APPROACH_TOL of a field pole."""
    pass


class Timeout(FlowError):
    """Raised when the stop condition is not met within the time limit."""
    pass


class TangencyEncountered(FlowError):
    """Raised when a trajectory reaches a boundary point of tangency."""
    pass


class SlidingEncountered(FlowError):
    """Raised when a trajectory reaches a sliding region of a boundary."""
    pass


class CrossingType(str, Enum):
    TRANSVERSAL = "transversal"
    TANGENCY = "tangency"
    SLIDING = "sliding"


@dataclass(frozen=True, eq=False)
class PiecewiseSystem:
    """
    Three holomorphic fields bound to the zones of a partition.

    ``perturbations`` holds h^σ per zone; the vector field in zone σ is
    f^σ + epsilon h^σ.
    """
    config: PartitionConfig
    fields: dict
    perturbations: dict = field(default_factory=dict)
    epsilon: float = 0.0
    name: str = ""

    def __post_init__(self):
        missing = [z.value for z in ZONES if z not in self.fields]
        if missing:
            raise ValueError(f"zones without a field: {', '.join(missing)}")
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be finite and non-negative, got {self.epsilon}")
        for zone in self.perturbations:
            if zone not in ZONES:
                raise ValueError(f"perturbation for unknown zone {zone!r}")

    def vector(self, zone: ZoneTag, z: complex) -> complex:
        """f^σ(z) + ε h^σ(z)."""
        v = eval_field(self.fields[zone], z)
        h = self.perturbations.get(zone)
        if h is not None and self.epsilon != 0:
            v += self.epsilon * eval_field(h, z)
        return v

    def near_pole(self, zone: ZoneTag, z: complex) -> bool:
        fields = [self.fields[zone]]
        if zone in self.perturbations:
            fields.append(self.perturbations[zone])
        return any(
            not f.is_polynomial and abs(f.denominator_value(z)) < Config.POLE_APPROACH_TOL
            for f in fields
        )

    def with_epsilon(self, epsilon: float) -> "PiecewiseSystem":
        return PiecewiseSystem(self.config, self.fields, self.perturbations, epsilon, self.name)


def perturbation_field(a: list[float], b: list[float]) -> HolomorphicField:
    """Polynomial h(z) = Σ (a_j + i b_j) z^j."""
    if len(a) != len(b):
        raise ValueError("perturbation coefficient lists must have equal length")
    return HolomorphicField.polynomial([complex(x, y) for x, y in zip(a, b)])


def transform_system(system: PiecewiseSystem, m: MoebiusMap) -> PiecewiseSystem:
    """
    Push every zone field and perturbation through w = m(z).

    Raises:
        UnsupportedPartition: If the image of the partition is not supported
    """
    target = image_partition(system.config, m)
    fields = {zone: pushforward_field(m, f) for zone, f in system.fields.items()}
    perturbations = {zone: pushforward_field(m, h) for zone, h in system.perturbations.items()}
    return PiecewiseSystem(target, fields, perturbations, system.epsilon, system.name)


# --------------------------------------------------------------------------
# Trajectories
# --------------------------------------------------------------------------

@dataclass
class Segment:
    zone: ZoneTag
    times: np.ndarray
    points: np.ndarray

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def end(self) -> complex:
        return complex(self.points[-1])


@dataclass
class Event:
    t: float
    z: complex
    boundary_id: int
    direction: int  # sign of dg/dt at the crossing
    from_zone: ZoneTag
    to_zone: ZoneTag


@dataclass
class ZoneRun:
    """Result of integrating inside one zone."""
    segment: Segment
    event: Optional[Event]
    integral: float = 0.0


@dataclass
class Trajectory:
    segments: list[Segment] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    integral: float = 0.0

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    @property
    def duration(self) -> float:
        return float(self.segments[-1].times[-1] - self.segments[0].times[0])

    def rows(self) -> list[tuple[float, float, float, str, int]]:
        """(t, re, im, zone, event_flag) rows; junction points appear once."""
        event_times = {e.t for e in self.events}
        rows = []
        for i, seg in enumerate(self.segments):
            first = 0 if i == 0 else 1
            for t, z in zip(seg.times[first:], seg.points[first:]):
                flag = 1 if t in event_times and t == seg.times[-1] else 0
                rows.append((float(t), float(z.real), float(z.imag), seg.zone.value, flag))
        return rows


# --------------------------------------------------------------------------
# Integration
# --------------------------------------------------------------------------

def crossing_type(system: PiecewiseSystem, z: complex, boundary_id: Optional[int] = None) -> CrossingType:
    """
    Classify a boundary point by the normal components of both adjacent fields.

    Args:
        system: The system
        z: A point with |g(z)| <= BOUNDARY_TOL on its boundary
        boundary_id: 1 or 2, inferred from the nearest boundary when omitted

    Returns:
        TRANSVERSAL when both normal components share a nonzero sign, TANGENCY
        when either is below TANGENCY_TOL (or z is the circles' common point),
        SLIDING otherwise
    """
    z = complex(z)
    config = system.config
    if config.is_circular and abs(z - TANGENCY_POINT) <= Config.BOUNDARY_TOL:
        return CrossingType.TANGENCY
    if boundary_id is None:
        boundary_id = min((1, 2), key=lambda bid: abs(config.boundary(bid).signed(z)))
    boundary = config.boundary(boundary_id)
    if abs(boundary.signed(z)) > max(Config.BOUNDARY_TOL, Config.EVENT_TOL) * max(1.0, abs(z)):
        raise ValueError(f"point {z} is not on boundary {boundary_id}")
    n = boundary.normal(z)
    pos, neg = config.zones_of(boundary_id)
    components = [(np.conj(n) * system.vector(zone, z)).real for zone in (pos, neg)]
    if min(abs(c) for c in components) < Config.TANGENCY_TOL:
        return CrossingType.TANGENCY
    if components[0] * components[1] > 0:
        return CrossingType.TRANSVERSAL
    return CrossingType.SLIDING


def _entered_zone(system: PiecewiseSystem, z: complex, boundary_id: int, direction: int) -> ZoneTag:
    """Zone a transversal flow enters from a boundary point."""
    boundary = system.config.boundary(boundary_id)
    pos, neg = system.config.zones_of(boundary_id)
    v = system.vector(pos, z) * direction
    return pos if (np.conj(boundary.normal(z)) * v).real > 0 else neg


def integrate_in_zone(
    system: PiecewiseSystem,
    z0: complex,
    zone: ZoneTag,
    t_max: float,
    t0: float = 0.0,
    direction: int = 1,
    integrand: Optional[Callable[[complex], float]] = None,
) -> ZoneRun:
    """
    Integrate the zone field until the first boundary hit or t_max.

    The state is (Re z, Im z) plus an optional accumulated integral of
    ``integrand`` along the orbit. Boundary crossings are localized by
    bisection of the event function on the dense output of the last step.

    Args:
        system: The system
        z0: Start point, inside ``zone`` or on one of its boundaries
        zone: The zone whose field drives the flow
        t_max: Time budget (elapsed time, always positive)
        t0: Start time
        direction: 1 for forward time, -1 for backward
        integrand: Optional real function of z accumulated as ∫ integrand dt

    Returns:
        ZoneRun with the segment, the exit event (None on timeout) and the
        accumulated integral

    Raises:
        PoleApproach: If a field denominator falls below POLE_APPROACH_TOL
        FlowError: If the step size collapses below MIN_STEP
    """
    if not zone.is_zone:
        raise ValueError(f"cannot integrate in {zone!r}")
    z0 = complex(z0)
    config = system.config
    start_tag = classify(config, z0)
    sides = config.zone_sides(zone)
    allowed = {zone} | {ZoneTag.BOUNDARY_1 if bid == 1 else ZoneTag.BOUNDARY_2 for bid in sides}
    if start_tag not in allowed:
        raise ValueError(f"start point {z0} is in {start_tag.value}, not in zone {zone.value}")

    def rhs(t, y):
        z = complex(y[0], y[1])
        if system.near_pole(zone, z):
            raise PoleApproach(f"trajectory approached a pole near z = {z}")
        v = system.vector(zone, z)
        out = [v.real, v.imag]
        if integrand is not None:
            out.append(float(integrand(z)))
        return np.array(out)

    y0 = [z0.real, z0.imag] + ([0.0] if integrand is not None else [])
    t_bound = t0 + direction * t_max
    solver = RK45(rhs, t0, np.array(y0), t_bound, rtol=Config.RTOL, atol=Config.ATOL,
                  first_step=Config.FIRST_STEP, max_step=Config.MAX_STEP)

    def phi(bid: int, y) -> float:
        return sides[bid] * config.boundary(bid).signed(complex(y[0], y[1]))

    # a boundary the start point lies on is armed once the orbit has left it
    armed = {bid: abs(config.boundary(bid).signed(z0)) > Config.BOUNDARY_TOL for bid in sides}
    times, points = [t0], [z0]
    event = None
    integral = 0.0

    while solver.status == "running":
        t_prev, y_prev = solver.t, solver.y.copy()
        message = solver.step()
        if solver.status == "failed":
            raise FlowError(f"integrator failed in zone {zone.value}: {message}")
        if solver.step_size is not None and solver.step_size < Config.MIN_STEP and solver.status == "running":
            raise FlowError(f"step size fell below {Config.MIN_STEP} near z = {complex(*solver.y[:2])}")

        hits = []
        dense = None
        for bid in sides:
            value = phi(bid, solver.y)
            if not armed[bid]:
                if value > Config.EVENT_TOL:
                    armed[bid] = True
                elif value < -Config.EVENT_TOL:
                    # the flow leaves through the boundary it started on
                    hits.append((t_prev, bid, y_prev))
                continue
            if value <= 0:
                dense = dense or solver.dense_output()
                t_hit = bisect(lambda t: phi(bid, dense(t)), t_prev, solver.t,
                               xtol=1e-15, maxiter=Config.BISECTION_MAX_ITER, disp=False)
                hits.append((t_hit, bid, dense(t_hit)))

        if hits:
            t_hit, bid, y_hit = min(hits, key=lambda h: direction * h[0])
            z_hit = complex(y_hit[0], y_hit[1])
            if t_hit != t_prev:
                times.append(t_hit)
                points.append(z_hit)
            pos, neg = config.zones_of(bid)
            to_zone = neg if sides[bid] == 1 else pos
            event = Event(float(t_hit), z_hit, bid, -sides[bid] * direction, zone, to_zone)
            if integrand is not None:
                integral = float(y_hit[2])
            logger.debug(f"exit {zone.value} -> {to_zone.value} at t={t_hit:.6f}, z={z_hit}")
            break

        times.append(solver.t)
        points.append(complex(solver.y[0], solver.y[1]))
        if integrand is not None:
            integral = float(solver.y[2])

    segment = Segment(zone, np.array(times), np.array(points, dtype=complex))
    return ZoneRun(segment, event, integral)


def flow(
    system: PiecewiseSystem,
    z0: complex,
    max_time: Optional[float] = None,
    max_crossings: Optional[int] = None,
    direction: int = 1,
    integrand: Optional[Callable[[complex], float]] = None,
) -> Trajectory:
    """
    Integrate a piecewise trajectory, switching fields at transversal crossings.

    Args:
        system: The system
        z0: Start point (inside a zone or on a boundary)
        max_time: Stop after this much elapsed time (FLOW_MAX_TIME by default)
        max_crossings: Stop after this many boundary crossings
        direction: 1 for forward time, -1 for backward
        integrand: Optional real function of z accumulated along the orbit

    Returns:
        The trajectory

    Raises:
        TangencyEncountered: At a tangency point, carrying the partial trajectory
        SlidingEncountered: At a sliding point, carrying the partial trajectory
        PoleApproach: Near a field pole
        Timeout: If max_crossings is not reached within the time limit
    """
    z0 = complex(z0)
    limit = Config.FLOW_MAX_TIME if max_time is None else max_time
    trajectory = Trajectory()

    zone = _start_zone(system, z0, direction, trajectory)
    t, z, elapsed = 0.0, z0, 0.0
    while True:
        run = integrate_in_zone(system, z, zone, limit - elapsed, t0=t,
                                direction=direction, integrand=integrand)
        trajectory.segments.append(run.segment)
        trajectory.integral += run.integral
        elapsed = abs(run.segment.times[-1])
        if run.event is None:
            if max_crossings is not None and len(trajectory.events) < max_crossings:
                raise Timeout(
                    f"only {len(trajectory.events)} of {max_crossings} crossings within t = {limit}",
                    trajectory,
                )
            return trajectory

        event = run.event
        trajectory.events.append(event)
        kind = crossing_type(system, event.z, event.boundary_id)
        if kind == CrossingType.TANGENCY:
            raise TangencyEncountered(f"tangency at z = {event.z} (t = {event.t})", trajectory)
        if kind == CrossingType.SLIDING:
            raise SlidingEncountered(f"sliding region at z = {event.z} (t = {event.t})", trajectory)
        if max_crossings is not None and len(trajectory.events) >= max_crossings:
            return trajectory
        zone, t, z = event.to_zone, event.t, event.z


def _start_zone(system: PiecewiseSystem, z0: complex, direction: int, trajectory: Trajectory) -> ZoneTag:
    tag = classify(system.config, z0)
    if tag.is_zone:
        return tag
    if tag == ZoneTag.TANGENCY:
        raise TangencyEncountered(f"start point {z0} is the tangency point", trajectory)
    bid = 1 if tag == ZoneTag.BOUNDARY_1 else 2
    kind = crossing_type(system, z0, bid)
    if kind == CrossingType.TANGENCY:
        raise TangencyEncountered(f"start point {z0} is a tangency of boundary {bid}", trajectory)
    if kind == CrossingType.SLIDING:
        raise SlidingEncountered(f"start point {z0} lies in a sliding region", trajectory)
    return _entered_zone(system, z0, bid, direction)


def closure_error(trajectory: Trajectory) -> float:
    """|end - start| of a trajectory."""
    return abs(trajectory.end - trajectory.start)
