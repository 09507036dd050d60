"""
First-order Melnikov functions for three-zone systems.

Three independent routes are provided and cross-checked by the tests:

* closed trigonometric series in r for the four circle families
  (``melnikov_closed``), built from assembled coefficients;
* adaptive quadrature over circle arcs (``arc_melnikov_integral``,
  ``melnikov_quadrature``) and the exact arc antiderivative
  (``closed_arc_integral``);
* the weighted four-arc formula along integrated orbits of a general
  system (``melnikov_weighted``) with its one-line variants.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from math import comb
from typing import Callable, Optional, Sequence, Union

import mpmath
import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.linalg import null_space
from scipy.optimize import brentq

from .config import Config
from .field_core import HolomorphicField, LinearCenter, eval_field, level_function, level_gradient
from .geometry import EXTERNAL, EXTERNAL_TO_STRIP, INTERNAL, INTERNAL_TO_STRIP, ZONES, ZoneTag
from .pwhs_system import FlowError, PiecewiseSystem, integrate_in_zone, transform_system

logger = logging.getLogger(__name__)


class MelnikovError(Exception):
    """Base exception for Melnikov computations."""
    pass


class PoleOnArc(MelnikovError):
    """Raised when a perturbation has a pole on (or within 1e-6 of) an arc."""
    pass


class FamilyAbsent(MelnikovError):
    """Raised when no periodic family with the required crossings exists at a level."""
    pass


class DomainViolation(MelnikovError):
    """Raised when r lies outside the open domain of a basis."""
    pass


class RankDeficient(MelnikovError):
    """Raised when an interpolation matrix is numerically singular."""
    pass


# --------------------------------------------------------------------------
# Coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationCoeffs:
    """h^σ(z) = Σ_j (a_j^σ + i b_j^σ) z^j for σ in {+, c, -}."""
    a: dict
    b: dict

    def __post_init__(self):
        lengths = {len(self.a.get(z, ())) for z in ZONES} | {len(self.b.get(z, ())) for z in ZONES}
        if len(lengths) != 1:
            raise ValueError("all coefficient lists must have length ℓ + 1")

    @property
    def degree(self) -> int:
        return len(self.a[ZoneTag.PLUS]) - 1

    @classmethod
    def zeros(cls, degree: int) -> "PerturbationCoeffs":
        return cls({z: (0.0,) * (degree + 1) for z in ZONES}, {z: (0.0,) * (degree + 1) for z in ZONES})

    @classmethod
    def from_vector(cls, vector: Sequence[float], degree: int) -> "PerturbationCoeffs":
        """Inverse of ``as_vector``."""
        n = degree + 1
        v = list(map(float, vector))
        a, b = {}, {}
        for i, zone in enumerate(ZONES):
            a[zone] = tuple(v[2 * i * n: (2 * i + 1) * n])
            b[zone] = tuple(v[(2 * i + 1) * n: (2 * i + 2) * n])
        return cls(a, b)

    def as_vector(self) -> np.ndarray:
        """(a^+, b^+, a^c, b^c, a^-, b^-) flattened."""
        return np.concatenate([np.concatenate([self.a[z], self.b[z]]) for z in ZONES])

    def padded(self, degree: int) -> "PerturbationCoeffs":
        if degree < self.degree:
            raise ValueError(f"perturbation degree {self.degree} exceeds {degree}")
        extra = (0.0,) * (degree - self.degree)
        return PerturbationCoeffs({z: tuple(self.a[z]) + extra for z in ZONES},
                                  {z: tuple(self.b[z]) + extra for z in ZONES})

    def polynomial(self, zone: ZoneTag) -> np.ndarray:
        return np.array([complex(x, y) for x, y in zip(self.a[zone], self.b[zone])])

    def fields(self) -> dict:
        return {z: HolomorphicField.polynomial(self.polynomial(z)) for z in ZONES}


@dataclass(frozen=True)
class TransformedCoeffs:
    """Per zone, P_m = c_m + i d_m of h̃(ρ) = Σ P_m ρ^m, m = 2 - k."""
    terms: dict

    def c(self, zone: ZoneTag, m: int) -> float:
        return float(self.terms[zone].get(m, 0j).real)

    def d(self, zone: ZoneTag, m: int) -> float:
        return float(self.terms[zone].get(m, 0j).imag)


def transform_coeffs(coeffs: PerturbationCoeffs) -> TransformedCoeffs:
    """
    Coefficients of the perturbation after a circle-to-strip Möbius map.

    With β_j = (b_j - i a_j)/2, the pushed perturbation Σ β_j (w - 2i)^j w^(2-j)
    (external circles) or Σ β_j w^j (w + 2i)^(2-j) (internal circles, in
    ρ = w + 2i) expands as Σ_k P_(2-k) ρ^(2-k) with
    P_(2-k) = (-2i)^k Σ_(j>=k) β_j C(j, k).
    """
    ell = coeffs.degree
    terms = {}
    for zone in ZONES:
        beta = [(b - 1j * a) / 2 for a, b in zip(coeffs.a[zone], coeffs.b[zone])]
        terms[zone] = {
            2 - k: (-2j) ** k * sum(beta[j] * comb(j, k) for j in range(k, ell + 1))
            for k in range(ell + 1)
        }
    return TransformedCoeffs(terms)


# --------------------------------------------------------------------------
# Arcs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSpec:
    """Arc c + r e^(it), t_start <= t <= t_end, traversed counterclockwise."""
    center: complex
    radius: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"arc radius must be positive, got {self.radius}")

    def point(self, t: float) -> complex:
        return complex(self.center + self.radius * np.exp(1j * t))

    @property
    def start(self) -> complex:
        return self.point(self.t_start)

    @property
    def end(self) -> complex:
        return self.point(self.t_end)


Perturbation = Union[HolomorphicField, Callable[[complex], complex]]


def _pole_distance(field: HolomorphicField, arc: ArcSpec) -> float:
    poles = field.poles()
    if poles.size == 0:
        return np.inf
    ts = np.linspace(arc.t_start, arc.t_end, 4001)
    pts = arc.center + arc.radius * np.exp(1j * ts)
    best = np.inf
    for p in poles:
        best = min(best, float(np.min(np.abs(pts - p))))
        # exact distance when the nearest circle point lies on the arc
        angle = np.angle(p - arc.center)
        k = np.ceil((arc.t_start - angle) / (2 * np.pi))
        if angle + 2 * np.pi * k <= arc.t_end:
            best = min(best, abs(abs(p - arc.center) - arc.radius))
    return best


def arc_melnikov_integral(B: Perturbation, arc: ArcSpec) -> float:
    """
    Re ∫_arc i·conj(B(z)) dz by adaptive quadrature.

    Args:
        B: Perturbation as a field or a complex callable
        arc: The arc

    Returns:
        The real integral, absolute tolerance QUAD_ABS_TOL

    Raises:
        PoleOnArc: If a pole of B lies within 1e-6 of the arc
    """
    if isinstance(B, HolomorphicField):
        if not B.is_polynomial and _pole_distance(B, arc) <= 1e-6:
            raise PoleOnArc(f"perturbation has a pole within 1e-6 of the arc {arc}")
        evaluate = lambda z: eval_field(B, z)
    else:
        evaluate = B

    def integrand(t: float) -> float:
        e = arc.radius * np.exp(1j * t)
        return (-np.conj(evaluate(arc.center + e)) * e).real

    value, _ = quad(integrand, arc.t_start, arc.t_end, epsabs=Config.QUAD_ABS_TOL,
                    epsrel=1e-12, limit=200)
    return float(value)


def closed_arc_integral(terms: dict, arc: ArcSpec) -> float:
    """
    Exact Re ∫_arc i·conj(Σ P_m ρ^m) dz with ρ = z - arc.center.

    Each term contributes r^(m+1) [G_m(t_end) - G_m(t_start)] where, for
    P_m = c + id and k = m - 1, G_m = (-c sin kt - d cos kt)/k and G_1 = -c t.
    """
    r = arc.radius
    total = 0.0
    for m, p in terms.items():
        c, d = complex(p).real, complex(p).imag
        k = m - 1
        if k == 0:
            g = lambda t: -c * t
        else:
            g = lambda t, k=k: (-c * np.sin(k * t) - d * np.cos(k * t)) / k
        total += r ** (m + 1) * (g(arc.t_end) - g(arc.t_start))
    return float(total)


# --------------------------------------------------------------------------
# Bases
# --------------------------------------------------------------------------

class BasisName(str, Enum):
    STRIP = "strip"
    EXTERNAL = "external"
    INTERNAL_INNER = "internal_inner"
    INTERNAL_OUTER = "internal_outer"


_r = sp.Symbol("r", positive=True)
_h = sp.Symbol("h", positive=True)
_theta1 = sp.asin(1 / _r)
_theta2 = sp.asin(3 / _r)
_pi = sp.pi

_BASIS_EXPRESSIONS = {
    BasisName.STRIP: [
        _r * sp.cos(_theta1), _r ** 2, _r ** 2 * _theta1, _r ** 3 * sp.cos(_theta1),
        _r ** 5 * sp.cos(3 * _theta1),
    ],
    BasisName.EXTERNAL: [
        _r ** 3 * sp.cos(_theta1), _r ** 2 * (2 * _theta1 - _pi), _r ** 2 * _theta1,
        sp.sin(2 * _theta1), _r * sp.cos(_theta1), sp.cos(3 * _theta1) / _r,
    ],
    BasisName.INTERNAL_INNER: [
        _r ** 3 * sp.cos(_theta1), _r ** 2 * (_pi + 2 * _theta1), _r ** 2 * (_pi - 2 * _theta1),
        _r * sp.cos(_theta1), sp.sin(2 * _theta1),
    ],
    BasisName.INTERNAL_OUTER: [
        _r ** 3 * sp.cos(_theta1), _r ** 2 * (_pi + 2 * _theta1), _r * sp.cos(_theta1),
        sp.sin(2 * _theta1), _r ** 3 * sp.cos(_theta2), _r ** 2 * (_pi - 2 * _theta2),
        _r * sp.cos(_theta2), sp.sin(2 * _theta2), _r ** 2 * (_theta2 - _theta1),
    ],
}

_DOMAINS = {
    BasisName.STRIP: (1.0, np.inf),
    BasisName.EXTERNAL: (1.0, np.inf),
    BasisName.INTERNAL_INNER: (1.0, 3.0),
    BasisName.INTERNAL_OUTER: (3.0, np.inf),
}

# highest perturbation degree each closed series accounts for
_DEGREES = {
    BasisName.STRIP: 4,
    BasisName.EXTERNAL: 4,
    BasisName.INTERNAL_INNER: 3,
    BasisName.INTERNAL_OUTER: 3,
}


def _lambdify_both(expr) -> Callable:
    """Evaluate with numpy on floats and arrays, with mpmath on mpf arguments."""
    as_numpy = sp.lambdify(_r, expr, "numpy")
    as_mpmath = sp.lambdify(_r, expr, "mpmath")

    def f(r):
        if isinstance(r, (mpmath.mpf, mpmath.mpc)):
            return as_mpmath(r)
        return as_numpy(r)

    return f


@dataclass(frozen=True)
class MelnikovBasis:
    """Real functions of r spanning a closed Melnikov series on an open domain."""
    name: str
    expressions: tuple
    domain: tuple

    @cached_property
    def functions(self) -> list[Callable]:
        return [_lambdify_both(e) for e in self.expressions]

    def __len__(self) -> int:
        return len(self.expressions)

    def evaluate(self, r) -> np.ndarray:
        """Matrix of f_i(r_j), shape (len(r), n)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        cols = [np.broadcast_to(f(r), r.shape) for f in self.functions]
        return np.stack(cols, axis=-1)

    def contains(self, r: float) -> bool:
        lo, hi = self.domain
        return lo < r < hi

    def in_h(self) -> list:
        """The basis as expressions of the level h, r = sqrt(2h)."""
        return [e.subs(_r, sp.sqrt(2 * _h)) for e in self.expressions]


def melnikov_basis(name: Union[BasisName, str]) -> MelnikovBasis:
    name = BasisName(name)
    return MelnikovBasis(name.value, tuple(_BASIS_EXPRESSIONS[name]), _DOMAINS[name])


def polynomial_basis(degree: int, domain: tuple = (-np.inf, np.inf)) -> MelnikovBasis:
    """Monomials 1, x, ..., x^degree as a basis (used for interpolation checks)."""
    return MelnikovBasis("polynomial", tuple(_r ** k for k in range(degree + 1)), domain)


def assemble(name: Union[BasisName, str], coeffs: PerturbationCoeffs) -> np.ndarray:
    """
    Assembled series coefficients of a family, one per basis function.

    Raises:
        ValueError: If the perturbation degree exceeds what the series covers
    """
    name = BasisName(name)
    coeffs = coeffs.padded(_DEGREES[name])
    P, C, M = ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS

    if name == BasisName.STRIP:
        a, b = coeffs.a, coeffs.b
        return np.array([
            2 * b[M][0] - 2 * b[P][0],
            -np.pi * (a[M][1] + a[P][1]),
            2 * a[M][1] - 4 * a[C][1] + 2 * a[P][1],
            -2 * b[M][2] + 2 * b[P][2] + 2 * (a[M][3] + a[P][3] - 2 * a[C][3]),
            (-2 * b[M][4] + 2 * b[P][4]) / 3,
        ])

    t = transform_coeffs(coeffs)
    c, d = t.c, t.d
    if name == BasisName.EXTERNAL:
        return np.array([
            -2 * d(M, 2) + 2 * d(P, 2),
            c(M, 1) + c(P, 1),
            -4 * c(C, 1),
            c(M, -1) + c(P, -1) - 2 * c(C, -1),
            2 * d(M, 0) - 2 * d(P, 0),
            (2 * d(M, -2) - 2 * d(P, -2)) / 3,
        ])
    if name == BasisName.INTERNAL_INNER:
        return np.array([
            2 * d(C, 2) - 2 * d(M, 2),
            -c(M, 1),
            -c(C, 1),
            2 * d(M, 0) - 2 * d(C, 0),
            c(C, -1) - c(M, -1),
        ])
    return np.array([
        -2 * d(M, 2) + 2 * d(C, 2),
        -c(M, 1),
        2 * d(M, 0) - 2 * d(C, 0),
        -c(M, -1) + c(C, -1),
        2 * d(P, 2) - 2 * d(C, 2),
        -c(P, 1),
        2 * d(C, 0) - 2 * d(P, 0),
        c(P, -1) - c(C, -1),
        -2 * c(C, 1),
    ])


def strip_raw_series(coeffs: PerturbationCoeffs, r: float) -> float:
    """
    Strip-family series before folding r^4 sin 2θ into r^3 cos θ.

    Equal to ``melnikov_closed("strip", ...)`` since r^4 sin 2θ = 2 r^3 cos θ.
    """
    coeffs = coeffs.padded(4)
    a, b = coeffs.a, coeffs.b
    P, C, M = ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS
    theta = np.arcsin(1.0 / r)
    alpha = assemble(BasisName.STRIP, coeffs)
    alpha[3] = -2 * b[M][2] + 2 * b[P][2]
    alpha6 = a[M][3] + a[P][3] - 2 * a[C][3]
    f = melnikov_basis(BasisName.STRIP).evaluate(r)[0]
    return float(alpha @ f + alpha6 * r ** 4 * np.sin(2 * theta))


def melnikov_closed(name: Union[BasisName, str], coeffs: PerturbationCoeffs, r: float) -> float:
    """
    Closed-series Melnikov function of a circle family at radius r.

    Args:
        name: strip, external, internal_inner or internal_outer
        coeffs: Perturbation coefficients in the original coordinate
        r: Orbit radius (r = sqrt(2h))

    Returns:
        Σ α_i f_i(r)

    Raises:
        DomainViolation: If r is outside the open domain of the basis
    """
    basis = melnikov_basis(name)
    if not basis.contains(r):
        raise DomainViolation(f"r = {r} outside {basis.domain} for the {basis.name} family")
    alpha = assemble(name, coeffs)
    return float(alpha @ basis.evaluate(r)[0])


def family_arcs(name: Union[BasisName, str], r: float) -> dict[str, ArcSpec]:
    """
    Circle arcs of a family at radius r, keyed by "-", "c1", "+", "c2"
    (one-line families use "-" and "c").

    The strip and external families circle the origin of the strip chart; the
    internal families circle -2i.
    """
    name = BasisName(name)
    t1 = float(np.arcsin(1.0 / r))
    if name in (BasisName.STRIP, BasisName.EXTERNAL):
        return {
            "-": ArcSpec(0j, r, np.pi + t1, 2 * np.pi - t1),
            "c1": ArcSpec(0j, r, -t1, t1),
            "+": ArcSpec(0j, r, t1, np.pi - t1),
            "c2": ArcSpec(0j, r, np.pi - t1, np.pi + t1),
        }
    center = -2j
    if name == BasisName.INTERNAL_INNER:
        return {
            "-": ArcSpec(center, r, np.pi - t1, 2 * np.pi + t1),
            "c": ArcSpec(center, r, t1, np.pi - t1),
        }
    t2 = float(np.arcsin(3.0 / r))
    return {
        "-": ArcSpec(center, r, np.pi - t1, 2 * np.pi + t1),
        "c1": ArcSpec(center, r, t1, t2),
        "+": ArcSpec(center, r, t2, np.pi - t2),
        "c2": ArcSpec(center, r, np.pi - t2, np.pi - t1),
    }


_ARC_ZONES = {"-": ZoneTag.MINUS, "c": ZoneTag.CENTRAL, "c1": ZoneTag.CENTRAL,
              "c2": ZoneTag.CENTRAL, "+": ZoneTag.PLUS}


def _chart_terms(name: BasisName, coeffs: PerturbationCoeffs) -> dict:
    """Per-zone {m: P_m} of the perturbation in the arc-center coordinate."""
    if name == BasisName.STRIP:
        return {z: {j: complex(p) for j, p in enumerate(coeffs.polynomial(z))} for z in ZONES}
    return transform_coeffs(coeffs).terms


def melnikov_quadrature(name: Union[BasisName, str], coeffs: PerturbationCoeffs, r: float,
                        exact: bool = False) -> float:
    """
    Sum of the family's arc integrals, by quadrature or by the exact antiderivative.
    """
    name = BasisName(name)
    if not melnikov_basis(name).contains(r):
        raise DomainViolation(f"r = {r} outside the domain of the {name.value} family")
    terms = _chart_terms(name, coeffs)
    total = 0.0
    for key, arc in family_arcs(name, r).items():
        zone_terms = terms[_ARC_ZONES[key]]
        if exact:
            total += closed_arc_integral(zone_terms, arc)
        else:
            rho = lambda z, c=arc.center, zt=zone_terms: sum(p * (z - c) ** m for m, p in zt.items())
            total += arc_melnikov_integral(rho, arc)
    return total


def melnikov_by_pushforward(name: Union[BasisName, str], coeffs: PerturbationCoeffs, r: float) -> float:
    """
    Arc-integral Melnikov function of a circle system, with the perturbation
    transported to the strip chart by ``pushforward_field``.

    The unperturbed system is ż = -i(z - 1) in every zone of the external
    (or internal) circle partition.
    """
    name = BasisName(name)
    if name == BasisName.STRIP:
        return melnikov_quadrature(name, coeffs, r)
    config, chart = (EXTERNAL, EXTERNAL_TO_STRIP) if name == BasisName.EXTERNAL else (INTERNAL, INTERNAL_TO_STRIP)
    center = HolomorphicField.from_tag(LinearCenter(-1j, 1.0))
    system = PiecewiseSystem(config, {z: center for z in ZONES}, coeffs.fields(), epsilon=1.0)
    strip = transform_system(system, chart)
    total = 0.0
    for key, arc in family_arcs(name, r).items():
        total += arc_melnikov_integral(strip.perturbations[_ARC_ZONES[key]], arc)
    return total


def realize_perturbation(name: Union[BasisName, str], alpha: Sequence[float]) -> PerturbationCoeffs:
    """
    Perturbation coefficients whose assembled series coefficients equal alpha.

    The assembly is linear; the minimum-norm least-squares preimage is returned.

    Raises:
        RankDeficient: If alpha is not reachable
    """
    name = BasisName(name)
    degree = _DEGREES[name]
    n = 6 * (degree + 1)
    columns = []
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        columns.append(assemble(name, PerturbationCoeffs.from_vector(unit, degree)))
    A = np.stack(columns, axis=1)
    alpha = np.asarray(alpha, dtype=float)
    x, *_ = np.linalg.lstsq(A, alpha, rcond=None)
    if np.linalg.norm(A @ x - alpha) > 1e-9 * max(1.0, np.linalg.norm(alpha)):
        raise RankDeficient(f"coefficients {alpha} are not reachable for the {name.value} family")
    return PerturbationCoeffs.from_vector(x, degree)


# --------------------------------------------------------------------------
# Wronskians and zeros
# --------------------------------------------------------------------------

def wronskian(funcs: Sequence[Callable], x: float, derivatives: Optional[Sequence[Sequence[Callable]]] = None) -> float:
    """
    det [d^k f_i / dx^k (x)], k = 0..n-1.

    Args:
        funcs: The functions
        x: Evaluation point
        derivatives: Optional closed-form derivatives, derivatives[i][k] being
            the k-th derivative of funcs[i]; mpmath numeric differentiation is
            used otherwise

    Returns:
        The Wronskian
    """
    n = len(funcs)
    with mpmath.workdps(30):
        M = mpmath.matrix(n, n)
        for i, f in enumerate(funcs):
            for k in range(n):
                if derivatives is not None:
                    M[k, i] = mpmath.mpf(derivatives[i][k](x))
                else:
                    M[k, i] = mpmath.diff(f, mpmath.mpf(x), k)
        return float(mpmath.det(M))


def basis_wronskian(basis: MelnikovBasis, h: float) -> float:
    """
    Wronskian of a basis with respect to the level h (r = sqrt(2h)).

    Derivatives are exact (sympy) and evaluated at 30 digits.
    """
    exprs = basis.in_h()
    n = len(exprs)
    with mpmath.workdps(30):
        M = mpmath.matrix(n, n)
        for i, e in enumerate(exprs):
            current = e
            for k in range(n):
                M[k, i] = mpmath.mpf(str(sp.N(current.subs(_h, sp.Rational(str(h))), 30)))
                current = sp.diff(current, _h)
        value = mpmath.det(M)
    logger.info(f"W({basis.name})({h}) = {mpmath.nstr(value, 12)}")
    return float(value)


def _derivative(f: Callable[[float], float], x: float) -> float:
    step = 1e-6 * (1.0 + abs(x))
    return (f(x + step) - f(x - step)) / (2 * step)


def _is_simple_zero(f: Callable[[float], float], x: float) -> bool:
    step = 1e-6 * (1.0 + abs(x))
    return f(x - step) * f(x + step) < 0 and abs(_derivative(f, x)) > 1e-10


def count_simple_zeros(f: Callable[[float], float], interval: tuple, grid_n: int = 2000) -> tuple[int, list[float]]:
    """
    Count simple zeros of f on an interval.

    Args:
        f: Real function
        interval: (lo, hi), both finite
        grid_n: Number of scan points (at least 100)

    Returns:
        (count, locations) of zeros with a sign change and |f'| > 1e-10

    Examples:
        >>> count_simple_zeros(lambda x: x * x - 2.0, (0.0, 3.0))[0]
        1
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    lo, hi = map(float, interval)
    xs = np.linspace(lo, hi, grid_n)
    values = np.array([f(x) for x in xs])
    roots: list[float] = []
    for i in range(grid_n - 1):
        y0, y1 = values[i], values[i + 1]
        if not (np.isfinite(y0) and np.isfinite(y1)):
            continue
        if y0 == 0.0:
            candidate = xs[i]
        elif y0 * y1 < 0:
            candidate = brentq(f, xs[i], xs[i + 1], xtol=1e-12)
        else:
            continue
        if _is_simple_zero(f, candidate) and (not roots or abs(candidate - roots[-1]) > 1e-9):
            roots.append(float(candidate))
    return len(roots), roots


def choose_coefficients(basis: MelnikovBasis, targets: Sequence[float]) -> np.ndarray:
    """
    A nonzero combination of the basis vanishing at every target.

    Args:
        basis: The basis
        targets: At most len(basis) - 1 distinct points inside the domain

    Returns:
        Coefficients C (max-norm 1) with each target a certified simple zero of
        Σ C_i f_i

    Raises:
        DomainViolation: If a target lies outside the domain
        RankDeficient: If the interpolation matrix condition exceeds the limit
        MelnikovError: If the zeros cannot be certified after retargeting
    """
    targets = [float(t) for t in targets]
    if len(targets) > len(basis) - 1:
        raise ValueError(f"at most {len(basis) - 1} targets for a basis of {len(basis)} functions")
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    for t in targets:
        if not basis.contains(t):
            raise DomainViolation(f"target {t} outside {basis.domain}")

    functions = basis.functions
    shifted = list(targets)
    for attempt in range(6):
        M = basis.evaluate(shifted)
        scale = np.max(np.abs(M), axis=0)
        scale[scale == 0] = 1.0
        scaled = M / scale
        if len(shifted) > 0:
            condition = np.linalg.cond(scaled)
            if condition > Config.RANK_CONDITION_LIMIT:
                raise RankDeficient(f"interpolation matrix condition {condition:.3e}")
        kernel = null_space(scaled)
        coeffs = kernel[:, 0] / scale
        coeffs = coeffs / np.max(np.abs(coeffs))
        first = coeffs[np.nonzero(np.abs(coeffs) > 1e-14)[0][0]]
        coeffs = coeffs * np.sign(first)

        combo = lambda x: float(sum(c * f(x) for c, f in zip(coeffs, functions)))
        if all(_is_simple_zero(combo, t) for t in shifted):
            return coeffs
        logger.warning(f"zeros not certified at {shifted}; retargeting (attempt {attempt + 1})")
        shifted = [t + 1e-6 * (attempt + 1) for t in targets]
    raise MelnikovError(f"could not certify simple zeros at {targets}")


# --------------------------------------------------------------------------
# Weighted formula on integrated orbits
# --------------------------------------------------------------------------

@dataclass
class FamilyCrossings:
    """Crossing points of one periodic orbit of the family at level h."""
    a_minus: complex
    b_minus: complex
    b_plus: complex
    a_plus: complex


def _level_roots(H: Callable, y: float, h: float) -> list[float]:
    box = Config.SEARCH_BOX
    xs = np.linspace(-box, box, 4001)
    values = np.array([H(x, y) - h for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        v0, v1 = values[i], values[i + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)):
            continue
        if v0 == 0:
            roots.append(float(xs[i]))
        elif v0 * v1 < 0:
            roots.append(float(brentq(lambda x: H(x, y) - h, xs[i], xs[i + 1], xtol=1e-14)))
    return roots


def _integrand(system: PiecewiseSystem, zone: ZoneTag) -> Callable[[complex], float]:
    """-R Im(conj(B) f) with R = Re(-(H_y - i H_x)/f), the time form of R(g dx - f dy)."""
    level = level_function(system.fields[zone])
    B = system.perturbations.get(zone)

    def integrand(z: complex) -> float:
        if B is None:
            return 0.0
        f = system.fields[zone](z)
        hx, hy = level_gradient(level, z)
        R = (-(complex(hy, -hx)) / f).real
        return -R * (np.conj(eval_field(B, z)) * f).imag

    return integrand


def _arc_run(system: PiecewiseSystem, start: complex, zone: ZoneTag, boundary_id: int):
    try:
        run = integrate_in_zone(system, start, zone, Config.ARC_MAX_TIME,
                                integrand=_integrand(system, zone))
    except FlowError as e:
        raise FamilyAbsent(f"orbit from {start} in zone {zone.value} failed: {e}") from e
    if run.event is None or run.event.boundary_id != boundary_id:
        raise FamilyAbsent(f"orbit from {start} in zone {zone.value} does not reach boundary {boundary_id}")
    return run


def family_crossings(system: PiecewiseSystem, h: float) -> tuple[FamilyCrossings, dict[str, float]]:
    """
    Locate A^-, B^-, B^+, A^+ of the orbit with H^- = h on a strip system.

    A^- is the point of {H^-(x, -1) = h} where the minus field enters Σ-. The
    orbit is then followed through Σ-, Σc, Σ+ and Σc; the unweighted arc
    integrals are accumulated on the way.

    Returns:
        (crossings, {"-": ∫L^-, "c1": ∫L^c1, "+": ∫L^+, "c2": ∫L^c2})

    Raises:
        FamilyAbsent: If the crossings or the closing orbit do not exist
    """
    unperturbed = system.with_epsilon(0.0)
    H_minus = level_function(system.fields[ZoneTag.MINUS])
    candidates = [x for x in _level_roots(H_minus, -1.0, h)
                  if system.fields[ZoneTag.MINUS](complex(x, -1.0)).imag < 0]
    if not candidates:
        raise FamilyAbsent(f"no entry point into Σ- on level h = {h}")

    for x in candidates:
        a_minus = complex(x, -1.0)
        try:
            lower = _arc_run(unperturbed, a_minus, ZoneTag.MINUS, 2)
            c1 = _arc_run(unperturbed, lower.event.z, ZoneTag.CENTRAL, 1)
            upper = _arc_run(unperturbed, c1.event.z, ZoneTag.PLUS, 1)
            c2 = _arc_run(unperturbed, upper.event.z, ZoneTag.CENTRAL, 2)
        except FamilyAbsent as e:
            logger.debug(f"candidate A- = {a_minus} rejected: {e}")
            continue
        if abs(c2.event.z - a_minus) > 1e-6:
            logger.debug(f"orbit from {a_minus} does not close ({c2.event.z})")
            continue
        crossings = FamilyCrossings(a_minus, lower.event.z, c1.event.z, upper.event.z)
        integrals = {"-": lower.integral, "c1": c1.integral, "+": upper.integral, "c2": c2.integral}
        return crossings, integrals
    raise FamilyAbsent(f"no closed crossing orbit on level h = {h}")


def _hx(system: PiecewiseSystem, zone: ZoneTag, p: complex) -> float:
    return level_gradient(level_function(system.fields[zone]), p)[0]


def melnikov_weights(system: PiecewiseSystem, crossings: FamilyCrossings) -> dict[str, float]:
    """Ratio weights of the arcs c1, +, c2, - built from H_x at the crossings."""
    P, C, M = ZoneTag.PLUS, ZoneTag.CENTRAL, ZoneTag.MINUS
    A_m, A_p, B_p, B_m = crossings.a_minus, crossings.a_plus, crossings.b_plus, crossings.b_minus
    w1 = _hx(system, M, A_m) / _hx(system, C, A_m)
    w2 = w1 * _hx(system, C, A_p) / _hx(system, P, A_p)
    w3 = w2 * _hx(system, P, B_p) / _hx(system, C, B_p)
    w4 = w3 * _hx(system, C, B_m) / _hx(system, M, B_m)
    return {"c1": w1, "+": w2, "c2": w3, "-": w4}


def melnikov_weighted(
    system: PiecewiseSystem, h: float, arcs: Optional[dict[str, ArcSpec]] = None,
) -> float:
    """
    Weighted four-arc Melnikov function of a strip system at level h.

    Args:
        system: Strip system whose perturbations are the h^σ
        h: Level of H^- on the orbit
        arcs: Optional circle arcs ("-", "c1", "+", "c2") for linear-center
            zones; integrals are then taken by quadrature and the crossings
            read from the arc endpoints

    Returns:
        Σ weight_arc · ∫_arc R(g dx - f dy)

    Raises:
        FamilyAbsent: If the crossing points cannot be found
    """
    if arcs is None:
        crossings, integrals = family_crossings(system, h)
    else:
        crossings = FamilyCrossings(arcs["c2"].end, arcs["c1"].start, arcs["c1"].end, arcs["+"].end)
        integrals = {}
        for key, arc in arcs.items():
            B = system.perturbations.get(_ARC_ZONES[key])
            integrals[key] = 0.0 if B is None else arc_melnikov_integral(B, arc)
    weights = melnikov_weights(system, crossings)
    value = sum(weights[k] * integrals[k] for k in ("c1", "+", "c2", "-"))
    logger.debug(f"M({h}) = {value}, weights {weights}")
    return float(value)


def melnikov_one_line(
    system: PiecewiseSystem, h: float, line: int, arcs: Optional[dict[str, ArcSpec]] = None,
) -> float:
    """
    Two-arc Melnikov function of a family crossing a single line.

    line = 1: orbits cross Im z = 1 at A1, B1 with H^+ = h; the plus arc runs
    A1 -> B1 and the central arc B1 -> A1.
    line = 2: orbits cross Im z = -1 at A2, B2 with H^c = h; the central arc
    runs A2 -> B2 and the minus arc B2 -> A2.

    ``arcs`` (keys "+"/"c" or "c"/"-") switches to quadrature on circle arcs.
    """
    if line not in (1, 2):
        raise ValueError("line must be 1 or 2")
    outer = ZoneTag.PLUS if line == 1 else ZoneTag.MINUS
    C = ZoneTag.CENTRAL
    y = 1.0 if line == 1 else -1.0
    first_zone = outer if line == 1 else C
    second_zone = C if line == 1 else outer
    first_key = "+" if line == 1 else "c"
    second_key = "c" if line == 1 else "-"

    if arcs is None:
        unperturbed = system.with_epsilon(0.0)
        level = level_function(system.fields[first_zone])
        # both first arcs start upward: into Σ+ on line 1, into Σc on line 2
        candidates = [x for x in _level_roots(level, y, h)
                      if system.fields[first_zone](complex(x, y)).imag > 0]
        result = None
        for x in candidates:
            A = complex(x, y)
            try:
                first = _arc_run(unperturbed, A, first_zone, line)
                second = _arc_run(unperturbed, first.event.z, second_zone, line)
            except FamilyAbsent:
                continue
            if abs(second.event.z - A) <= 1e-6:
                result = (A, first.event.z, first.integral, second.integral)
                break
        if result is None:
            raise FamilyAbsent(f"no family crossing only line {line} at level h = {h}")
        A, B, first_integral, second_integral = result
    else:
        A, B = arcs[first_key].start, arcs[first_key].end
        values = []
        for key in (first_key, second_key):
            pert = system.perturbations.get(_ARC_ZONES[key])
            values.append(0.0 if pert is None else arc_melnikov_integral(pert, arcs[key]))
        first_integral, second_integral = values

    if line == 1:
        # M1 = [Hx+(A1)/Hxc(A1)] ∫M^c + [Hx+(A1) Hxc(B1) / (Hxc(A1) Hx+(B1))] ∫M^+
        w_c = _hx(system, outer, A) / _hx(system, C, A)
        w_plus = w_c * _hx(system, C, B) / _hx(system, outer, B)
        return float(w_c * second_integral + w_plus * first_integral)
    # M2 = [Hxc(A2)/Hx-(A2)] ∫M^- + [Hxc(A2) Hx-(B2) / (Hx-(A2) Hxc(B2))] ∫M^c
    w_minus = _hx(system, C, A) / _hx(system, outer, A)
    w_c = w_minus * _hx(system, outer, B) / _hx(system, C, B)
    return float(w_minus * second_integral + w_c * first_integral)
