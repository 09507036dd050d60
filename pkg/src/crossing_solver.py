"""
Crossing limit cycles of strip systems from level-matching equations.

A crossing cycle meets Im z = -1 at s1 - i, s2 - i and Im z = 1 at t1 + i,
t2 + i, and satisfies

    H^-(s1, -1) = H^-(s2, -1)      H^c(s2, -1) = H^c(t2, 1)
    H^+(t2, 1)  = H^+(t1, 1)       H^c(t1, 1)  = H^c(s1, -1)

When the outer level functions restrict to the lines as ratios of quadratics,
the outer equations reduce to real fractional-linear involutions s2 = R(s1),
t2 = S(t1) and the cycle is a root of two equations in (s1, t1).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .config import Config
from .field_core import LevelFunction, LinearCenter, UnsupportedField, level_function
from .geometry import (
    EXTERNAL,
    EXTERNAL_TO_STRIP,
    INTERNAL,
    INTERNAL_TO_STRIP,
    MoebiusMap,
    PartitionKind,
    ZoneTag,
    moebius_apply,
    moebius_inverse,
)
from .pwhs_system import FlowError, PiecewiseSystem, integrate_in_zone, transform_system
from .utils import homogenized_compose, trim_coefficients

logger = logging.getLogger(__name__)

# digits used to polish Newton limits against the exact restriction coefficients
POLISH_DPS = 40
POLISH_MAX_ITER = 80
# largest relative mismatch of the unreduced equations at an accepted root
LEVEL_TOL = 1e-10
# sine of the angle between the polished Jacobian rows below which a root lies on a curve
ISOLATION_TOL = 1e-10
# |normal component| / |field| under which an arc is taken to graze its end boundary
GRAZING_TOL = 1e-6
CLUSTER_RADIUS_MAX = 1e-4


class CrossingError(Exception):
    """Base exception for the crossing-cycle solver."""
    pass


class UnsupportedZoneForm(CrossingError):
    """Raised when a zone level function does not fit the reduction."""
    pass


class NonIsolatedSolutions(CrossingError):
    """Raised when the roots fill a curve instead of isolated points."""

    def __init__(self, message: str, roots: Optional[list] = None):
        super().__init__(message)
        self.roots = roots or []


class CircleClass(str, Enum):
    C2 = "C2"  # external circles
    C3 = "C3"  # internal circles


_CIRCLE_GEOMETRY = {
    CircleClass.C2: (EXTERNAL, EXTERNAL_TO_STRIP),
    CircleClass.C3: (INTERNAL, INTERNAL_TO_STRIP),
}


@dataclass(frozen=True)
class ReductionMap:
    """Real fractional-linear map x -> (a x + b) / (c x + d)."""
    a: float
    b: float
    c: float
    d: float

    def __call__(self, x: float) -> float:
        den = self.c * x + self.d
        if den == 0:
            return np.inf
        return (self.a * x + self.b) / den

    @property
    def numerator(self) -> np.ndarray:
        return np.array([self.b, self.a])

    @property
    def denominator(self) -> np.ndarray:
        return np.array([self.d, self.c])


def reduction_map(num: np.ndarray, den: np.ndarray) -> ReductionMap:
    """
    The involution pairing the two solutions of N(x)/D(x) = const.

    For N = n0 + n1 x + n2 x^2 and D = d0 + d1 x + d2 x^2, the difference
    quotient of N(s)D(u) - N(u)D(s) by (s - u) is A + B(s + u) + C s u with
    A = n1 d0 - n0 d1, B = n2 d0 - n0 d2, C = n2 d1 - n1 d2, so
    u = -(A + B s) / (B + C s).

    Raises:
        UnsupportedZoneForm: If either polynomial has degree above 2 or the
            restriction is constant on the line

    Examples:
        >>> r = reduction_map(np.array([0.0, 0.0, 1.0]), np.array([1.0]))
        >>> r(3.0)
        -3.0
    """
    n = np.real(trim_coefficients(num, 1e-14))
    d = np.real(trim_coefficients(den, 1e-14))
    if len(n) > 3 or len(d) > 3:
        raise UnsupportedZoneForm(
            f"outer level function restricts to degrees ({len(n) - 1}, {len(d) - 1}); at most 2 supported"
        )
    n = np.pad(n, (0, 3 - len(n)))
    d = np.pad(d, (0, 3 - len(d)))
    A = n[1] * d[0] - n[0] * d[1]
    B = n[2] * d[0] - n[0] * d[2]
    C = n[2] * d[1] - n[1] * d[2]
    scale = max(abs(A), abs(B), abs(C))
    if scale == 0 or abs(A * C - B * B) <= 1e-14 * scale ** 2:
        raise UnsupportedZoneForm("outer level function has no reflection on the line")
    return ReductionMap(-B / scale, -A / scale, C / scale, B / scale)


@dataclass(frozen=True)
class _Separable:
    """f(s, t) = Σ sign_k p_k(s) q_k(t) with real ascending coefficients."""
    terms: tuple

    def __call__(self, s: float, t: float) -> float:
        return float(sum(sign * P.polyval(s, p) * P.polyval(t, q) for sign, p, q in self.terms))

    def gradient(self, s: float, t: float) -> tuple[float, float]:
        ds = sum(sign * P.polyval(s, P.polyder(p)) * P.polyval(t, q) for sign, p, q in self.terms)
        dt = sum(sign * P.polyval(s, p) * P.polyval(t, P.polyder(q)) for sign, p, q in self.terms)
        return float(ds), float(dt)

    def magnitude(self, s: float, t: float) -> float:
        """Size of the largest term, the scale the residual is measured against."""
        return float(max(abs(P.polyval(s, p) * P.polyval(t, q)) for _, p, q in self.terms))

    def normalized(self) -> "_Separable":
        scale = max(np.max(np.abs(p)) * np.max(np.abs(q)) for _, p, q in self.terms)
        if scale == 0:
            return self
        return _Separable(tuple((sign, p / scale, q) for sign, p, q in self.terms))


@dataclass
class CrossingSystem:
    """
    Level-matching equations of a strip system reduced to (s1, t1).

    ``lower`` maps s1 to s2 on Im z = -1 and ``upper`` maps t1 to t2 on Im z = 1.
    ``central_lower`` and ``central_upper`` are the (numerator, denominator)
    restrictions of H^c to Im z = -1 and Im z = 1.
    """
    system: PiecewiseSystem
    H_plus: LevelFunction
    H_central: LevelFunction
    H_minus: LevelFunction
    lower: ReductionMap
    upper: ReductionMap
    equations: tuple
    central_degree: Optional[int] = None
    central_lower: tuple = ()
    central_upper: tuple = ()

    def residual(self, s: float, t: float) -> np.ndarray:
        """[second equation after substitution, fourth equation]."""
        return np.array([eq(s, t) for eq in self.equations])

    def jacobian(self, s: float, t: float) -> np.ndarray:
        return np.array([eq.gradient(s, t) for eq in self.equations])

    def scale(self, s: float, t: float) -> float:
        return max(1.0, max(eq.magnitude(s, t) for eq in self.equations))

    def partner(self, s: float, t: float) -> tuple[float, float]:
        return self.lower(s), self.upper(t)

    def level_residual(self, s1: float, s2: float, t1: float, t2: float) -> float:
        """Largest relative mismatch of the four unreduced equations."""
        pairs = [
            (self.H_minus(s1, -1.0), self.H_minus(s2, -1.0)),
            (self.H_central(s2, -1.0), self.H_central(t2, 1.0)),
            (self.H_plus(t2, 1.0), self.H_plus(t1, 1.0)),
            (self.H_central(t1, 1.0), self.H_central(s1, -1.0)),
        ]
        return max(abs(a - b) / max(1.0, abs(a), abs(b)) for a, b in pairs)


@dataclass
class CycleCandidate:
    """
    One crossing cycle, labeled so that s1 <= s2.

    ``closure_residual`` is the largest gap between a predicted crossing point
    and the point reached by integrating the zone field from the previous one;
    ``time_directions`` holds the time sign each of the four arcs needed.
    """
    s1: float
    s2: float
    t1: float
    t2: float
    valid: bool
    source: str = ""
    closure_residual: Optional[float] = None
    time_directions: tuple = ()
    circle_points: Optional[tuple] = None

    @property
    def consistent_orientation(self) -> bool:
        return len(set(self.time_directions)) == 1

    @property
    def crossing_points(self) -> tuple[complex, complex, complex, complex]:
        """s1 - i, s2 - i, t2 + i, t1 + i in traversal order."""
        return (complex(self.s1, -1.0), complex(self.s2, -1.0),
                complex(self.t2, 1.0), complex(self.t1, 1.0))

    def as_dict(self) -> dict:
        out = {
            "s1": self.s1, "s2": self.s2, "t1": self.t1, "t2": self.t2,
            "valid": self.valid, "source": self.source,
            "closure_residual": self.closure_residual,
            "consistent_orientation": self.consistent_orientation if self.time_directions else None,
        }
        if self.circle_points is not None:
            out["circle_points"] = [[p.real, p.imag] for p in self.circle_points]
        return out


def _restriction(level: LevelFunction, y: float, zone: ZoneTag) -> tuple[np.ndarray, np.ndarray]:
    if level.restriction is None:
        raise UnsupportedZoneForm(f"zone {zone.value}: level function has no polynomial restriction")
    num, den = level.restriction(y)
    return np.real(np.asarray(num, dtype=complex)), np.real(np.asarray(den, dtype=complex))


def _level(system: PiecewiseSystem, zone: ZoneTag) -> LevelFunction:
    try:
        return level_function(system.fields[zone])
    except UnsupportedField as e:
        raise UnsupportedZoneForm(f"zone {zone.value}: {e}") from e


def build_crossing_system(system: PiecewiseSystem) -> CrossingSystem:
    """
    Reduce the level-matching equations of a strip system to (s1, t1).

    The outer level functions give the involutions; the fourth equation is
    cleared of denominators and the second is composed with the involutions
    and homogenized.

    Args:
        system: A system on the parallel strip

    Returns:
        The reduced crossing system

    Raises:
        UnsupportedZoneForm: If the partition is not the strip, a zone has no
            polynomial restriction, or an outer restriction is not quadratic
    """
    if system.config.kind != PartitionKind.PARALLEL_STRIP:
        raise UnsupportedZoneForm("crossing equations need the strip partition; transform the system first")
    H_plus = _level(system, ZoneTag.PLUS)
    H_central = _level(system, ZoneTag.CENTRAL)
    H_minus = _level(system, ZoneTag.MINUS)

    lower = reduction_map(*_restriction(H_minus, -1.0, ZoneTag.MINUS))
    upper = reduction_map(*_restriction(H_plus, 1.0, ZoneTag.PLUS))

    n_lo, d_lo = _restriction(H_central, -1.0, ZoneTag.CENTRAL)
    n_up, d_up = _restriction(H_central, 1.0, ZoneTag.CENTRAL)

    # H^c(t1, 1) = H^c(s1, -1)
    fourth = _Separable(((1.0, d_lo, n_up), (-1.0, n_lo, d_up)))

    # H^c(R(s1), -1) = H^c(S(t1), 1), both sides homogenized
    k = max(len(n_lo), len(d_lo), len(n_up), len(d_up)) - 1

    def compose(poly, m: ReductionMap):
        return np.real(homogenized_compose(poly, m.numerator, m.denominator, k))

    second = _Separable((
        (1.0, compose(n_lo, lower), compose(d_up, upper)),
        (-1.0, compose(d_lo, lower), compose(n_up, upper)),
    ))

    # a polynomial central level of degree n + 1 comes from a degree-n reciprocal
    central_degree = None
    if len(trim_coefficients(d_lo, 1e-14)) == 1 and len(trim_coefficients(n_lo, 1e-14)) >= 3:
        central_degree = len(trim_coefficients(n_lo, 1e-14)) - 2
    logger.debug(f"reductions: lower {lower}, upper {upper}")
    return CrossingSystem(system, H_plus, H_central, H_minus, lower, upper,
                          (second.normalized(), fourth.normalized()), central_degree,
                          central_lower=(n_lo, d_lo), central_upper=(n_up, d_up))


def _newton(cs: CrossingSystem, x0: np.ndarray) -> Optional[np.ndarray]:
    """Damped Newton from x0, run down to the round-off floor; None unless that floor is within NEWTON_TOL."""
    x = np.array(x0, dtype=float)
    F = cs.residual(*x)
    norm = np.linalg.norm(F)
    for _ in range(Config.NEWTON_MAX_ITER):
        if not np.isfinite(norm):
            return None
        if norm == 0:
            break
        J = cs.jacobian(*x)
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        damping = 1.0
        for _ in range(40):
            trial = x + damping * step
            F_trial = cs.residual(*trial)
            if np.linalg.norm(F_trial) < norm:
                break
            damping /= 2
        else:
            break
        x, F = trial, F_trial
        norm = np.linalg.norm(F)
        if np.linalg.norm(x) > 1e8:
            return None
        if np.linalg.norm(damping * step) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            break
    return x if norm <= Config.NEWTON_TOL * cs.scale(*x) else None


def _mp_ratio(num: list, den: list, x) -> tuple:
    """N(x)/D(x) and its derivative; coefficients descending."""
    n, dn = mpmath.polyval(num, x, derivative=True)
    d, dd = mpmath.polyval(den, x, derivative=True)
    return n / d, (dn * d - n * dd) / d ** 2


def _mp_moebius(coefficients: tuple, x) -> tuple:
    a, b, c, d = coefficients
    den = c * x + d
    return (a * x + b) / den, (a * d - b * c) / den ** 2


def _polish(cs: CrossingSystem, x: np.ndarray) -> Optional[np.ndarray]:
    """
    Refine a Newton limit at POLISH_DPS digits.

    Works on H^c(R(s), -1) - H^c(S(t), 1) and H^c(t, 1) - H^c(s, -1) with the
    float restriction and involution coefficients taken as exact, so common
    factors of the two sides cancel exactly. Near-continuum systems have
    roots placed only to about 1e-6 in double precision; here they resolve.

    Returns:
        The refined root, or None when the iteration stalls or the root is
        not isolated (the Jacobian rows are parallel)
    """
    if not cs.central_lower or not cs.central_upper:
        return x
    with mpmath.workdps(POLISH_DPS):
        lo = [[mpmath.mpf(float(c)) for c in p[::-1]] for p in cs.central_lower]
        up = [[mpmath.mpf(float(c)) for c in p[::-1]] for p in cs.central_upper]
        lower = tuple(mpmath.mpf(float(v)) for v in (cs.lower.a, cs.lower.b, cs.lower.c, cs.lower.d))
        upper = tuple(mpmath.mpf(float(v)) for v in (cs.upper.a, cs.upper.b, cs.upper.c, cs.upper.d))
        tol = mpmath.mpf(10) ** (8 - POLISH_DPS)

        def evaluate(s, t):
            r, dr = _mp_moebius(lower, s)
            q, dq = _mp_moebius(upper, t)
            h_r, dh_r = _mp_ratio(*lo, r)
            h_q, dh_q = _mp_ratio(*up, q)
            h_s, dh_s = _mp_ratio(*lo, s)
            h_t, dh_t = _mp_ratio(*up, t)
            size = max(1, abs(h_r), abs(h_q), abs(h_s), abs(h_t))
            return (h_r - h_q, h_t - h_s), ((dh_r * dr, -dh_q * dq), (-dh_s, dh_t)), size

        s, t = mpmath.mpf(float(x[0])), mpmath.mpf(float(x[1]))
        try:
            F, J, size = evaluate(s, t)
            for _ in range(POLISH_MAX_ITER):
                norm = max(abs(F[0]), abs(F[1]))
                det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
                if norm <= tol * size:
                    rows = mpmath.hypot(*J[0]) * mpmath.hypot(*J[1])
                    if rows == 0 or abs(det) <= ISOLATION_TOL * rows:
                        return None
                    return np.array([float(s), float(t)])
                if det == 0:
                    return None
                ds = (-F[0] * J[1][1] + F[1] * J[0][1]) / det
                dt = (-F[1] * J[0][0] + F[0] * J[1][0]) / det
                damping = mpmath.mpf(1)
                for _ in range(40):
                    trial = evaluate(s + damping * ds, t + damping * dt)
                    if max(abs(trial[0][0]), abs(trial[0][1])) < norm:
                        break
                    damping /= 2
                else:
                    return None
                s, t = s + damping * ds, t + damping * dt
                F, J, size = trial
        except ZeroDivisionError:
            return None
    return None


def _cluster_radius(cs: CrossingSystem, x: np.ndarray) -> float:
    """Distance under which two polished limits count as one root, from the Jacobian's conditioning."""
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(cs.jacobian(*x))
    if not np.isfinite(cond):
        return CLUSTER_RADIUS_MAX
    radius = np.finfo(float).eps * cond * (1.0 + np.linalg.norm(x))
    return float(np.clip(radius, Config.DEDUP_RADIUS, CLUSTER_RADIUS_MAX))


def find_roots(cs: CrossingSystem, box: Optional[float] = None, seeds_per_axis: Optional[int] = None) -> list[tuple[float, float]]:
    """
    Isolated roots of the reduced system inside [-box, box]^2.

    Every Newton limit is polished in extended precision and checked against
    the unreduced equations; polished roots are clustered before counting.
    Limits that do not polish to an isolated root still count towards the
    continuum check.

    Raises:
        NonIsolatedSolutions: If more than NONISOLATED_THRESHOLD distinct roots appear
    """
    box = Config.SEARCH_BOX if box is None else float(box)
    n = Config.SEEDS_PER_AXIS if seeds_per_axis is None else int(seeds_per_axis)
    if not np.isfinite(box) or box <= 0:
        raise ValueError(f"search box must be finite and positive, got {box}")
    if n < 2:
        raise ValueError("seeds_per_axis must be at least 2")

    axis = np.linspace(-box, box, n)
    roots: list[tuple[np.ndarray, float]] = []
    unresolved: list[np.ndarray] = []
    polished: list[tuple[np.ndarray, Optional[np.ndarray]]] = []
    rejected = 0
    for s0 in axis:
        for t0 in axis:
            x = _newton(cs, np.array([s0, t0]))
            if x is None or np.max(np.abs(x)) > box + Config.DEDUP_RADIUS:
                continue
            near = 1e-12 * (1.0 + np.linalg.norm(x))
            cached = next(((r,) for limit, r in polished if np.linalg.norm(x - limit) <= near), None)
            if cached is None:
                root = _polish(cs, x)
                polished.append((x, root))
            else:
                root = cached[0]
            if root is None:
                if all(np.linalg.norm(x - u) > Config.DEDUP_RADIUS for u in unresolved):
                    unresolved.append(x)
            else:
                s2, t2 = cs.partner(*root)
                if (np.max(np.abs(root)) > box + Config.DEDUP_RADIUS or not (np.isfinite(s2) and np.isfinite(t2))
                        or cs.level_residual(root[0], s2, root[1], t2) > LEVEL_TOL):
                    rejected += 1
                    continue
                radius = _cluster_radius(cs, root)
                if all(np.linalg.norm(root - r) > max(radius, rr) for r, rr in roots):
                    roots.append((root, radius))
            if len(roots) + len(unresolved) > Config.NONISOLATED_THRESHOLD:
                raise NonIsolatedSolutions(
                    f"more than {Config.NONISOLATED_THRESHOLD} distinct roots; "
                    "the periodic orbits form a continuum",
                    [tuple(r) for r, _ in roots] + [tuple(u) for u in unresolved],
                )
    if rejected:
        logger.warning(f"{rejected} polished roots rejected by the unreduced equations")
    if unresolved:
        logger.warning(f"{len(unresolved)} Newton limits did not polish to isolated roots")
    logger.info(f"{len(roots)} distinct roots in [-{box}, {box}]^2")
    return [(float(r[0]), float(r[1])) for r, _ in sorted(roots, key=lambda item: (item[0][0], item[0][1]))]


def _grazes(system: PiecewiseSystem, zone: ZoneTag, z: complex, boundary_id: int) -> bool:
    v = system.vector(zone, z)
    normal = system.config.boundary(boundary_id).normal(z)
    return bool(np.isfinite(v) and abs((np.conj(normal) * v).real) <= GRAZING_TOL * abs(v))


def _closest_approach(system: PiecewiseSystem, zone: ZoneTag, start: complex, end: complex, direction: int) -> float:
    """Smallest distance from ``end`` to the zone orbit of ``start`` before it leaves the zone."""
    config = system.config
    sides = config.zone_sides(zone)

    def rhs(t, y):
        v = system.vector(zone, complex(y[0], y[1])) * direction
        return [v.real, v.imag]

    def leaves(t, y):
        z = complex(y[0], y[1])
        return min(side * config.boundary(bid).signed(z) for bid, side in sides.items()) + Config.BOUNDARY_TOL
    leaves.terminal = True

    sol = solve_ivp(rhs, (0.0, Config.ARC_MAX_TIME), [start.real, start.imag], dense_output=True,
                    events=leaves, rtol=Config.RTOL, atol=Config.ATOL, max_step=Config.MAX_STEP)
    if sol.sol is None or len(sol.t) < 2:
        return np.inf

    def distance(t):
        y = sol.sol(t)
        return np.abs(y[0] + 1j * y[1] - end)

    grid = np.linspace(sol.t[0], sol.t[-1], 20 * len(sol.t))
    gaps = distance(grid)
    i = int(np.argmin(gaps))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    refined = minimize_scalar(lambda t: float(distance(t)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
    return float(min(gaps[i], refined.fun))


def _arc_end(system: PiecewiseSystem, zone: ZoneTag, start: complex, end: complex) -> tuple[float, int]:
    """
    Gap between ``end`` and the exit point from ``start``, and the time sign used.

    An arc that arrives tangent to its end boundary never changes side, so
    for grazing ends the gap is the closest approach of the orbit instead.
    """
    best = (np.inf, 1)
    target = 1 if end.imag > 0 else 2
    grazing = _grazes(system, zone, end, target)
    for direction in (1, -1):
        try:
            run = integrate_in_zone(system, start, zone, Config.ARC_MAX_TIME, direction=direction)
        except (FlowError, ValueError) as e:
            logger.debug(f"arc from {start} in {zone.value} ({direction:+d}) failed: {e}")
            run = None
        gap = np.inf
        if run is not None and run.event is not None and run.event.boundary_id == target:
            gap = abs(run.event.z - end)
        if grazing and gap > Config.DEDUP_RADIUS:
            try:
                gap = min(gap, _closest_approach(system, zone, start, end, direction))
            except (FlowError, ValueError) as e:
                logger.debug(f"closest approach from {start} in {zone.value} ({direction:+d}) failed: {e}")
        if gap < best[0]:
            best = (gap, direction)
    return best


def cycle_closure(system: PiecewiseSystem, candidate: CycleCandidate) -> tuple[float, tuple]:
    """
    Integrate the four arcs of a candidate zone by zone.

    Returns:
        (largest endpoint gap, time sign per arc)
    """
    p0, p1, p2, p3 = candidate.crossing_points
    arcs = [(ZoneTag.MINUS, p0, p1), (ZoneTag.CENTRAL, p1, p2),
            (ZoneTag.PLUS, p2, p3), (ZoneTag.CENTRAL, p3, p0)]
    gaps, directions = [], []
    for zone, start, end in arcs:
        gap, direction = _arc_end(system, zone, start, end)
        gaps.append(gap)
        directions.append(direction)
    return float(max(gaps)), tuple(directions)


def _canonical(cs: CrossingSystem, s: float, t: float, source: str) -> CycleCandidate:
    s2, t2 = cs.partner(s, t)
    if s2 < s:
        s, s2, t, t2 = s2, s, t2, t
    valid = bool(s2 - s > Config.DEDUP_RADIUS and t2 - t > Config.DEDUP_RADIUS)
    return CycleCandidate(float(s), float(s2), float(t), float(t2), valid, source)


def solve_cycles(
    cs: CrossingSystem,
    box: Optional[float] = None,
    seeds_per_axis: Optional[int] = None,
    source: str = "",
    check_closure: bool = True,
) -> list[CycleCandidate]:
    """
    Solve a crossing system and pair every root with its involution partner.

    Args:
        cs: The crossing system
        box: Half-width of the (s1, t1) search square
        seeds_per_axis: Newton seeds per axis
        source: Label copied onto each candidate
        check_closure: Integrate each candidate's arcs for the closure report

    Returns:
        Unordered cycles, each reported once, sorted by s1

    Raises:
        NonIsolatedSolutions: If the roots are not isolated
    """
    candidates: list[CycleCandidate] = []
    for s, t in find_roots(cs, box, seeds_per_axis):
        candidate = _canonical(cs, s, t, source)
        duplicate = any(
            abs(candidate.s1 - c.s1) <= Config.DEDUP_RADIUS and abs(candidate.t1 - c.t1) <= Config.DEDUP_RADIUS
            for c in candidates
        )
        if not duplicate:
            candidates.append(candidate)
    if check_closure:
        for candidate in candidates:
            candidate.closure_residual, candidate.time_directions = cycle_closure(cs.system, candidate)
    candidates.sort(key=lambda c: (c.s1, c.t1))
    return candidates


def filter_valid_cycles(candidates: list[CycleCandidate]) -> list[CycleCandidate]:
    """Keep candidates with s1 < s2 and t1 < t2."""
    return [c for c in candidates if c.valid]


def bezout_bound(n: int) -> int:
    """
    Upper bound n(n+1)/2 on crossing cycles for a degree-n central polynomial.

    Examples:
        >>> bezout_bound(2)
        3
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return n * (n + 1) // 2


def solve_circle_class(
    class_tag: CircleClass,
    fields: dict,
    box: Optional[float] = None,
    seeds_per_axis: Optional[int] = None,
    source: str = "",
) -> list[CycleCandidate]:
    """
    Crossing cycles of a circle system with linear centers in every zone.

    The system is pushed to the strip, solved there, and every candidate
    carries its crossing points mapped back to the circle geometry.

    Args:
        class_tag: C2 (external circles) or C3 (internal circles)
        fields: Zone -> linear center field
        box: Search half-width in the strip chart
        seeds_per_axis: Newton seeds per axis
        source: Label copied onto each candidate

    Raises:
        UnsupportedZoneForm: If a zone field is not a linear center
    """
    class_tag = CircleClass(class_tag)
    for zone, f in fields.items():
        if not isinstance(f.tag, LinearCenter):
            raise UnsupportedZoneForm(f"zone {ZoneTag(zone).value}: expected a linear center, got {f.tag!r}")
    config, chart = _CIRCLE_GEOMETRY[class_tag]
    circle = PiecewiseSystem(config, dict(fields), name=source)
    strip = transform_system(circle, chart)
    cs = build_crossing_system(strip)
    candidates = solve_cycles(cs, box, seeds_per_axis, source or class_tag.value)
    back = moebius_inverse(chart)
    for c in candidates:
        c.circle_points = tuple(moebius_apply(back, p) for p in c.crossing_points)
    return candidates


def circle_system(class_tag: CircleClass, fields: dict, name: str = "") -> PiecewiseSystem:
    """The circle system solved by ``solve_circle_class``."""
    config, _ = _CIRCLE_GEOMETRY[CircleClass(class_tag)]
    return PiecewiseSystem(config, dict(fields), name=name)


def circle_chart(class_tag: CircleClass) -> MoebiusMap:
    return _CIRCLE_GEOMETRY[CircleClass(class_tag)][1]
