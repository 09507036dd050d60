"""Holomorphic vector fields, closed-form linear flows and first integrals."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .config import Config
from .utils import homogenized_compose, real_quadratic_modulus, trim_coefficients

logger = logging.getLogger(__name__)


class FieldError(Exception):
    """Base exception for field evaluation and first-integral errors."""
    pass


class PoleEvaluation(FieldError):
    """Raised when a field is evaluated at (or numerically on) one of its poles."""
    pass


class UnsupportedField(FieldError):
    """Raised when no closed-form first integral is available for a field."""
    pass


class ExclusionPoint(FieldError):
    """Raised when a level function is queried at an excluded point."""
    pass


class _PointAtInfinity:
    """Sentinel for the point at infinity of the extended plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "POINT_AT_INFINITY"


POINT_AT_INFINITY = _PointAtInfinity()


def is_infinity(z: object) -> bool:
    """Return True when z is the point-at-infinity sentinel."""
    return z is POINT_AT_INFINITY


# --------------------------------------------------------------------------
# Catalog tags
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    """ż = value."""
    value: complex = 1.0


@dataclass(frozen=True)
class LinearCenter:
    """ż = lam (z - center), lam = a + ib."""
    lam: complex
    center: complex = 0.0


@dataclass(frozen=True)
class Monomial:
    """ż = scale z^n."""
    n: int
    scale: complex = 1j


@dataclass(frozen=True)
class RationalNormal:
    """ż = scale z^n / (1 + c z^(n-1)), n >= 2."""
    n: int
    c: complex
    scale: complex = 1j


@dataclass(frozen=True)
class InversePower:
    """ż = scale / z^n."""
    n: int
    scale: complex = 1j


@dataclass(frozen=True)
class ReciprocalPoly:
    """ż = 1 / p(z), p given by ascending coefficients."""
    coefficients: tuple


@dataclass(frozen=True)
class Transformed:
    """A catalog field pushed forward by a Möbius map.

    ``inverse`` holds (p, q, r, u) with z = (p w + q) / (r w + u), the map
    back to the coordinate where ``base`` lives.
    """
    base: "CatalogTag"
    inverse: tuple


CatalogTag = Union[
    Constant, LinearCenter, Monomial, RationalNormal, InversePower,
    ReciprocalPoly, Transformed,
]


def _tag_rational(tag: CatalogTag) -> tuple[np.ndarray, np.ndarray]:
    """Expand a catalog tag into (numerator, denominator) coefficients."""
    if isinstance(tag, Constant):
        return np.array([tag.value], dtype=complex), np.array([1], dtype=complex)
    if isinstance(tag, LinearCenter):
        return (np.array([-tag.lam * tag.center, tag.lam], dtype=complex),
                np.array([1], dtype=complex))
    if isinstance(tag, Monomial):
        if tag.n < 0:
            raise ValueError("Monomial degree must be non-negative")
        num = np.zeros(tag.n + 1, dtype=complex)
        num[-1] = tag.scale
        return num, np.array([1], dtype=complex)
    if isinstance(tag, RationalNormal):
        if tag.n < 2:
            raise ValueError("RationalNormal needs n >= 2")
        num = np.zeros(tag.n + 1, dtype=complex)
        num[-1] = tag.scale
        den = np.zeros(tag.n, dtype=complex)
        den[0] = 1.0
        den[-1] += tag.c
        return num, den
    if isinstance(tag, InversePower):
        if tag.n < 1:
            raise ValueError("InversePower degree must be at least 1")
        den = np.zeros(tag.n + 1, dtype=complex)
        den[-1] = 1.0
        return np.array([tag.scale], dtype=complex), den
    if isinstance(tag, ReciprocalPoly):
        return np.array([1], dtype=complex), trim_coefficients(tag.coefficients)
    if isinstance(tag, Transformed):
        p, q, r, u = tag.inverse
        # forward map (az+b)/(cz+d) is the inverse of the stored one
        a, b, c, d = u, -q, -r, p
        num, den = _tag_rational(tag.base)
        return pushforward_rational(a, b, c, d, num, den)
    raise TypeError(f"unknown catalog tag {tag!r}")


def pushforward_rational(
    a: complex, b: complex, c: complex, d: complex,
    num: np.ndarray, den: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Rational coefficients of ẇ = (a - cw)^2 / (ad - bc) * f((dw - b)/(a - cw)).

    Denominators are cleared by homogenizing with (a - cw); no common factor
    is cancelled.

    Args:
        a, b, c, d: Coefficients of w = (az + b)/(cz + d)
        num: Ascending numerator coefficients of f
        den: Ascending denominator coefficients of f

    Returns:
        (numerator, denominator) of the pushed-forward field
    """
    det = a * d - b * c
    inv_num = np.array([-b, d], dtype=complex)
    inv_den = np.array([a, -c], dtype=complex)
    degree = max(len(num), len(den)) - 1
    new_num = homogenized_compose(num, inv_num, inv_den, degree)
    new_den = homogenized_compose(den, inv_num, inv_den, degree)
    new_num = P.polymul(P.polypow(inv_den, 2), new_num) / det
    return trim_coefficients(new_num), trim_coefficients(new_den)


# --------------------------------------------------------------------------
# Fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HolomorphicField:
    """
    A rational holomorphic vector field ż = numerator(z) / denominator(z).

    When ``tag`` is set the closed form of the catalog entry is used for
    evaluation and first integrals; the coefficients are kept for cross-checks.
    """
    numerator: tuple
    denominator: tuple
    tag: Optional[CatalogTag] = None

    def __post_init__(self):
        den = trim_coefficients(self.denominator)
        if np.all(den == 0):
            raise ValueError("denominator must not be the zero polynomial")

    @classmethod
    def from_tag(cls, tag: CatalogTag) -> "HolomorphicField":
        """Build a field from a catalog tag, expanding its rational form."""
        num, den = _tag_rational(tag)
        return cls(tuple(num.tolist()), tuple(den.tolist()), tag)

    @classmethod
    def polynomial(cls, coefficients) -> "HolomorphicField":
        """Build a polynomial field from ascending coefficients."""
        return cls(tuple(np.asarray(coefficients, dtype=complex).tolist()), (1.0 + 0j,))

    @property
    def num(self) -> np.ndarray:
        return np.asarray(self.numerator, dtype=complex)

    @property
    def den(self) -> np.ndarray:
        return np.asarray(self.denominator, dtype=complex)

    @property
    def is_polynomial(self) -> bool:
        return len(trim_coefficients(self.denominator)) == 1

    def poles(self) -> np.ndarray:
        """Roots of the denominator."""
        den = trim_coefficients(self.denominator)
        if len(den) < 2:
            return np.zeros(0, dtype=complex)
        return P.polyroots(den)

    def denominator_value(self, z: complex) -> complex:
        return complex(P.polyval(z, self.den))

    def __call__(self, z: complex) -> complex:
        return eval_field(self, z)

    def __add__(self, other: "HolomorphicField") -> "HolomorphicField":
        num = P.polyadd(P.polymul(self.num, other.den), P.polymul(other.num, self.den))
        den = P.polymul(self.den, other.den)
        return HolomorphicField(tuple(np.asarray(num, dtype=complex).tolist()),
                                tuple(np.asarray(den, dtype=complex).tolist()))

    def scaled(self, factor: float) -> "HolomorphicField":
        """Return factor * self (the tag is dropped unless factor is 1)."""
        if factor == 1:
            return self
        return HolomorphicField(tuple((self.num * factor).tolist()), self.denominator)


def _closed_form_value(tag: CatalogTag, z: complex) -> complex:
    if isinstance(tag, Constant):
        return complex(tag.value)
    if isinstance(tag, LinearCenter):
        return tag.lam * (z - tag.center)
    if isinstance(tag, Monomial):
        return tag.scale * z ** tag.n
    if isinstance(tag, RationalNormal):
        return tag.scale * z ** tag.n / (1 + tag.c * z ** (tag.n - 1))
    if isinstance(tag, InversePower):
        return tag.scale / z ** tag.n
    if isinstance(tag, ReciprocalPoly):
        return 1.0 / complex(P.polyval(z, np.asarray(tag.coefficients, dtype=complex)))
    if isinstance(tag, Transformed):
        p, q, r, u = tag.inverse
        zb = (p * z + q) / (r * z + u)
        # ẇ = f(zb) / φ'(w), φ'(w) = (pu - qr) / (rw + u)^2
        return _closed_form_value(tag.base, zb) * (r * z + u) ** 2 / (p * u - q * r)
    raise TypeError(f"unknown catalog tag {tag!r}")


def eval_field(field: HolomorphicField, z: complex) -> complex:
    """
    Evaluate a holomorphic field at a point.

    Args:
        field: The field
        z: Evaluation point

    Returns:
        numerator(z) / denominator(z), via the closed form when tagged

    Raises:
        PoleEvaluation: If |denominator(z)| is below the relative pole tolerance
    """
    z = complex(z)
    den = field.den
    powers = np.abs(z) ** np.arange(len(den))
    scale = max(1.0, float(np.sum(np.abs(den) * powers)))
    den_value = P.polyval(z, den)
    if abs(den_value) < Config.POLE_TOL * scale:
        raise PoleEvaluation(f"field evaluated at a pole near z = {z}")
    if field.tag is not None:
        try:
            return complex(_closed_form_value(field.tag, z))
        except ZeroDivisionError as e:
            raise PoleEvaluation(f"field evaluated at a pole near z = {z}") from e
    return complex(P.polyval(z, field.num) / den_value)


def linear_flow(lam: complex, center: complex, z0: complex, t: float) -> complex:
    """
    Exact flow of ż = lam (z - center).

    Args:
        lam: Multiplier a + ib
        center: Equilibrium
        z0: Initial point
        t: Time

    Returns:
        (z0 - center) e^(lam t) + center
    """
    return complex((z0 - center) * np.exp(lam * t) + center)


# --------------------------------------------------------------------------
# Level functions
# --------------------------------------------------------------------------

Restriction = Callable[[float], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class LevelFunction:
    """
    A first integral H(x, y) of a holomorphic field.

    ``closed_form`` accepts scalars or numpy arrays. ``restriction(y)`` (when
    available) returns real ascending (numerator, denominator) coefficients of
    x -> H(x, y) as an exact ratio of polynomials.
    """
    closed_form: Callable
    domain_exclusions: tuple = ()
    gradient: Optional[Callable[[float, float], tuple[float, float]]] = None
    restriction: Optional[Restriction] = None
    description: str = ""

    def __call__(self, x, y):
        return self.closed_form(x, y)


def _log_potential(z0: complex, q: complex, z):
    # -Im(q ln(z - z0)) for purely imaginary q
    return -q.imag * 0.5 * np.log(np.abs(z - z0) ** 2)


def _from_potential(
    potential: Callable, reciprocal: Callable, exclusions: tuple, description: str,
    restriction: Optional[Restriction] = None,
) -> LevelFunction:
    """Level function H = -Im G with G' = reciprocal = 1/f."""

    def H(x, y):
        return -np.imag(potential(np.asarray(x) + 1j * np.asarray(y)))

    def grad(x, y):
        g = complex(reciprocal(complex(x, y)))
        return -g.imag, -g.real

    return LevelFunction(H, exclusions, grad, restriction, description)


def _center_level(center: complex, description: str) -> LevelFunction:
    def H(x, y):
        z = np.asarray(x) + 1j * np.asarray(y)
        return 0.5 * np.abs(z - center) ** 2

    def grad(x, y):
        return x - center.real, y - center.imag

    def restriction(y):
        return 0.5 * real_quadratic_modulus(1.0, 1j * y - center), np.array([1.0])

    return LevelFunction(H, (), grad, restriction, description)


def _polynomial_restriction(antiderivative: np.ndarray) -> Restriction:
    def restriction(y):
        # G(x + iy) as a polynomial in x, then -Im of its coefficients
        shifted = homogenized_compose(antiderivative, [1j * y, 1.0], [1.0],
                                      len(antiderivative) - 1)
        return -np.asarray(shifted).imag, np.array([1.0])
    return restriction


def _catalog_level(tag: CatalogTag) -> LevelFunction:
    if isinstance(tag, Constant):
        k = complex(tag.value)
        if k == 0:
            raise UnsupportedField("the zero field has no level function")
        anti = np.array([0.0, 1.0 / k], dtype=complex)
        return _from_potential(lambda z: z / k, lambda z: 1.0 / k, (),
                               "H = -Im(z/k)", _polynomial_restriction(anti))

    if isinstance(tag, LinearCenter) or (isinstance(tag, Monomial) and tag.n == 1):
        lam = tag.lam if isinstance(tag, LinearCenter) else tag.scale
        center = tag.center if isinstance(tag, LinearCenter) else 0.0
        if abs(complex(lam).real) > 0 or lam == 0:
            raise UnsupportedField(
                f"linear field with multiplier {lam} is not a center; "
                "no single-valued first integral"
            )
        return _center_level(complex(center), "H = |z - z0|^2 / 2")

    if isinstance(tag, Monomial):
        n, k = tag.n, complex(tag.scale)
        if n == 0:
            return _catalog_level(Constant(k))
        e = 1 - n
        return _from_potential(
            lambda z: z ** e / (e * k), lambda z: 1.0 / (k * z ** n), (0j,),
            f"H = -Im(z^{e} / ({e} k))",
        )

    if isinstance(tag, InversePower):
        n, k = tag.n, complex(tag.scale)
        anti = np.zeros(n + 2, dtype=complex)
        anti[-1] = 1.0 / ((n + 1) * k)
        return _from_potential(
            lambda z: z ** (n + 1) / ((n + 1) * k), lambda z: z ** n / k, (0j,),
            f"H = -Im(z^{n + 1} / ({n + 1} k))", _polynomial_restriction(anti),
        )

    if isinstance(tag, RationalNormal):
        n, c, k = tag.n, complex(tag.c), complex(tag.scale)
        q = c / k
        if abs(q.real) > 1e-14 * max(1.0, abs(q)):
            raise UnsupportedField(
                "logarithmic term of the first integral is multivalued for "
                f"c / scale = {q}"
            )
        q = complex(0.0, q.imag)
        e = 1 - n

        def H(x, y):
            z = np.asarray(x) + 1j * np.asarray(y)
            return -np.imag(z ** e / (e * k)) + _log_potential(0j, q, z)

        def grad(x, y):
            z = complex(x, y)
            g = (1 + c * z ** (n - 1)) / (k * z ** n)
            return -g.imag, -g.real

        return LevelFunction(H, (0j,), grad, None,
                             f"H = -Im(z^{e}/({e} k)) - Im(c/k) ln|z|")

    if isinstance(tag, ReciprocalPoly):
        p = trim_coefficients(tag.coefficients)
        anti = np.asarray(P.polyint(p), dtype=complex)
        return _from_potential(
            lambda z: P.polyval(z, anti),
            lambda z: P.polyval(z, p),
            (),
            "H = -Im of the antiderivative of p",
            _polynomial_restriction(anti),
        )

    if isinstance(tag, Transformed):
        return _pulled_back_level(tag)

    raise UnsupportedField(f"no closed-form first integral for {tag!r}")


def _pulled_back_level(tag: Transformed) -> LevelFunction:
    base = _catalog_level(tag.base)
    p, q, r, u = tag.inverse
    det = p * u - q * r

    def phi(w):
        return (p * w + q) / (r * w + u)

    def H(x, y):
        z = phi(np.asarray(x) + 1j * np.asarray(y))
        return base.closed_form(np.real(z), np.imag(z))

    def grad(x, y):
        w = complex(x, y)
        z = phi(w)
        hx, hy = level_gradient(base, z)
        dphi = det / (r * w + u) ** 2
        # (H∘φ)_x - i (H∘φ)_y = (H_x - i H_y) φ'
        g = complex(hx, -hy) * dphi
        return g.real, -g.imag

    exclusions = []
    if r != 0:
        exclusions.append(complex(-u / r))
    for e in base.domain_exclusions:
        # preimage of e under φ
        den = p - r * e
        if abs(den) > 0:
            exclusions.append(complex((u * e - q) / den))

    restriction = None
    if isinstance(tag.base, LinearCenter) or (
            isinstance(tag.base, Monomial) and tag.base.n == 1):
        z0 = complex(tag.base.center) if isinstance(tag.base, LinearCenter) else 0j

        def restriction(y):
            # |(p - z0 r) w + (q - z0 u)|^2 / (2 |r w + u|^2) on w = x + iy
            alpha, beta = p - z0 * r, q - z0 * u
            num = 0.5 * real_quadratic_modulus(alpha, alpha * 1j * y + beta)
            den = real_quadratic_modulus(r, r * 1j * y + u)
            return num, den

    return LevelFunction(H, tuple(exclusions), grad, restriction,
                         f"pullback of ({base.description})")


def level_function(field: HolomorphicField) -> LevelFunction:
    """
    Closed-form first integral H = -Im G, G' = 1/f, of a catalog field.

    Linear centers use |z - z0|^2 / 2, which has the same level curves.
    Untagged fields of the form k/p are treated as ReciprocalPoly(p/k).

    Args:
        field: The field

    Returns:
        The level function

    Raises:
        UnsupportedField: If no closed form exists
    """
    tag = field.tag
    if tag is None:
        num = trim_coefficients(field.numerator)
        if len(num) == 1 and num[0] != 0:
            tag = ReciprocalPoly(tuple((field.den / num[0]).tolist()))
        else:
            raise UnsupportedField(
                "field is neither a catalog entry nor of the form 1/p"
            )
    return _catalog_level(tag)


def level_gradient(level: LevelFunction, p: complex) -> tuple[float, float]:
    """
    Gradient (H_x, H_y) of a level function.

    Args:
        level: The level function
        p: Evaluation point

    Returns:
        Closed-form gradient when available, else central differences with
        step GRADIENT_STEP * (1 + |p|)

    Raises:
        ExclusionPoint: If p is (numerically) one of the excluded points
    """
    p = complex(p)
    for e in level.domain_exclusions:
        if abs(p - e) <= Config.BOUNDARY_TOL:
            raise ExclusionPoint(f"level function undefined at {p}")
    if level.gradient is not None:
        hx, hy = level.gradient(p.real, p.imag)
        return float(hx), float(hy)
    h = Config.GRADIENT_STEP * (1.0 + abs(p))
    hx = (level(p.real + h, p.imag) - level(p.real - h, p.imag)) / (2 * h)
    hy = (level(p.real, p.imag + h) - level(p.real, p.imag - h)) / (2 * h)
    return float(hx), float(hy)
