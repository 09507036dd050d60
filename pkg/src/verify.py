"""Reproduction suite behind the ``verify`` command."""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import crossing_solver, melnikov, poincare
from .field_core import HolomorphicField, InversePower, Monomial, RationalNormal, level_function
from .geometry import (
    EXTERNAL_TO_STRIP,
    INTERNAL_TO_STRIP,
    STRIP_TO_EXTERNAL,
    STRIP_TO_INTERNAL,
    ZONES,
    pushforward_field,
)
from .melnikov import BasisName, PerturbationCoeffs
from .presets import CIRCLE_EXAMPLES, STRIP_CENTRALS, crossing_d_one, crossing_d_two, strip_params
from .pwhs_system import closure_error, flow, transform_system

logger = logging.getLogger(__name__)

WRONSKIAN_EXPECTED = {
    BasisName.STRIP: (2.0, 8.0),
    BasisName.EXTERNAL: (2.0, -np.sqrt(3.0) * np.pi / 64),
    BasisName.INTERNAL_INNER: (1.0, -384 * np.pi),
}
# g1..g9 in their listed order; the determinant is negative at h = 5
OUTER_WRONSKIAN = (5.0, -0.55155)

ZERO_TARGETS = {
    BasisName.STRIP: [1.5, 2.0, 3.0, 4.0],
    BasisName.EXTERNAL: [1.5, 2.0, 3.0, 4.0, 5.0],
    BasisName.INTERNAL_INNER: [1.2, 1.6, 2.2, 2.7],
    BasisName.INTERNAL_OUTER: [3.05, 3.2, 3.5, 4.0, 5.0, 6.5, 8.5, 11.0],
}
ZERO_INTERVALS = {
    BasisName.STRIP: (1.0001, 12.0),
    BasisName.EXTERNAL: (1.0001, 12.0),
    BasisName.INTERNAL_INNER: (1.0001, 2.9999),
    BasisName.INTERNAL_OUTER: (3.0001, 15.0),
}

# (s1, t1) points the circle examples must reproduce in the strip chart
CIRCLE_EXPECTED_S = {
    "circle_external": [-2.422768823, -1.632401134],
}
CIRCLE_EXPECTED_ST = {
    "circle_internal": [(-1.260240290, -2.5680344499), (-1.128596670, -1.6659961088)],
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "values": self.values}


def _random_coeffs(rng: np.random.Generator, degree: int) -> PerturbationCoeffs:
    return PerturbationCoeffs.from_vector(rng.uniform(-1.0, 1.0, 6 * (degree + 1)), degree)


def check_wronskians() -> CheckResult:
    values, failures = {}, []
    for name, (h, expected) in WRONSKIAN_EXPECTED.items():
        w = melnikov.basis_wronskian(melnikov.melnikov_basis(name), h)
        values[name.value] = w
        if abs(w - expected) > 1e-5 * abs(expected):
            failures.append(f"{name.value}: {w} != {expected}")
    h, reference = OUTER_WRONSKIAN
    w = melnikov.basis_wronskian(melnikov.melnikov_basis(BasisName.INTERNAL_OUTER), h)
    values[BasisName.INTERNAL_OUTER.value] = w
    if not np.isfinite(w) or abs(w - reference) > 1e-3:
        failures.append(f"internal_outer: {w} != {reference} ± 1e-3")
    detail = "; ".join(failures) or f"outer W(5) = {w:.6g}"
    return CheckResult("wronskians", not failures, detail, values=values)


def check_poincare() -> CheckResult:
    values, failures = {}, []
    for label in STRIP_CENTRALS:
        params = strip_params(label)
        s_star = poincare.poincare_fixed_point(params)
        system = poincare.build_strip_system(params)
        s_num = poincare.numeric_fixed_point(system, s_star + 0.05, tol=1e-9)
        gap = closure_error(flow(system, complex(s_star, -1.0), max_crossings=4))
        values[label] = {"closed_form": s_star, "numeric": s_num, "closure": gap}
        if abs(s_num - s_star) > 1e-6 or gap > 1e-5:
            failures.append(f"{label}: |Δs| = {abs(s_num - s_star):.2e}, closure {gap:.2e}")
    return CheckResult("poincare", not failures, "; ".join(failures), values=values)


def check_moebius_corollaries() -> CheckResult:
    values, failures = {}, []
    for label in STRIP_CENTRALS:
        params = strip_params(label)
        s_star = poincare.poincare_fixed_point(params)
        strip = poincare.build_strip_system(params)
        for chart_name, m in (("external", STRIP_TO_EXTERNAL), ("internal", STRIP_TO_INTERNAL)):
            circle = transform_system(strip, m)
            s_num = poincare.numeric_fixed_point(circle, s_star + 0.05, tol=1e-9)
            z0 = m(complex(s_num, -1.0))
            gap = closure_error(flow(circle, z0, max_crossings=4))
            values[f"{label}/{chart_name}"] = {"numeric": s_num, "closure": gap}
            if abs(s_num - s_star) > 1e-6 or gap > 1e-5:
                failures.append(f"{label}/{chart_name}: |Δs| = {abs(s_num - s_star):.2e}, closure {gap:.2e}")
    return CheckResult("moebius_corollaries", not failures, "; ".join(failures), values=values)


def _radii(name: BasisName) -> list[float]:
    lo, hi = melnikov.melnikov_basis(name).domain
    if np.isinf(hi):
        return [lo + 0.5, lo + 1.7, lo + 4.2]
    return [lo + 0.3 * (hi - lo), lo + 0.55 * (hi - lo), lo + 0.85 * (hi - lo)]


def check_melnikov_consistency(sets: int = 20, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = {}
    for name in BasisName:
        degree = melnikov._DEGREES[name]
        largest = 0.0
        for _ in range(sets):
            coeffs = _random_coeffs(rng, degree)
            for r in _radii(name):
                closed = melnikov.melnikov_closed(name, coeffs, r)
                numeric = melnikov.melnikov_quadrature(name, coeffs, r)
                largest = max(largest, abs(closed - numeric))
        worst[name.value] = largest
    failures = [f"{k}: max |Δ| = {v:.2e}" for k, v in worst.items() if v > 1e-8]
    return CheckResult("melnikov_consistency", not failures, "; ".join(failures), values=worst)


def check_transform_coeffs(sets: int = 20, seed: int = 11) -> CheckResult:
    """Expanded coefficients against the pushed perturbation at sample points."""
    rng = np.random.default_rng(seed)
    largest = 0.0
    samples = [1.7 + 0.4j, -2.1 + 1.3j, 0.3 - 2.9j]
    for _ in range(sets):
        coeffs = _random_coeffs(rng, 4)
        expanded = melnikov.transform_coeffs(coeffs)
        for zone in ZONES:
            h = HolomorphicField.polynomial(coeffs.polynomial(zone))
            for m, offset in ((EXTERNAL_TO_STRIP, 0j), (INTERNAL_TO_STRIP, 2j)):
                pushed = pushforward_field(m, h)
                for w in samples:
                    rho = w + offset
                    series = sum(p * rho ** k for k, p in expanded.terms[zone].items())
                    largest = max(largest, abs(pushed(w) - series))
    passed = largest <= 1e-10
    return CheckResult("transform_coeffs", passed, "" if passed else f"max |Δ| = {largest:.2e}",
                       values={"max_error": largest})


def check_zero_counts() -> CheckResult:
    values, failures = {}, []
    for name, targets in ZERO_TARGETS.items():
        basis = melnikov.melnikov_basis(name)
        coefficients = melnikov.choose_coefficients(basis, targets)
        functions = basis.functions
        combo = lambda r, c=coefficients: float(sum(ci * f(r) for ci, f in zip(c, functions)))
        count, zeros = melnikov.count_simple_zeros(combo, ZERO_INTERVALS[name])
        values[name.value] = {"coefficients": coefficients, "zeros": zeros}
        if count < len(targets):
            failures.append(f"{name.value}: {count} simple zeros, expected at least {len(targets)}")
    return CheckResult("zero_counts", not failures, "; ".join(failures), values=values)


def check_realization() -> CheckResult:
    """Chosen series coefficients are reached by an actual perturbation."""
    failures = []
    for name, targets in ZERO_TARGETS.items():
        basis = melnikov.melnikov_basis(name)
        alpha = melnikov.choose_coefficients(basis, targets)
        coeffs = melnikov.realize_perturbation(name, alpha)
        gap = float(np.max(np.abs(melnikov.assemble(name, coeffs) - alpha)))
        if gap > 1e-9:
            failures.append(f"{name.value}: |Δα| = {gap:.2e}")
    return CheckResult("realization", not failures, "; ".join(failures))


def _near(a: float, b: float, tol: float = 1e-6) -> bool:
    return abs(a - b) <= tol


def check_crossing_cycles() -> CheckResult:
    values, failures = {}, []

    one = crossing_solver.solve_cycles(crossing_solver.build_crossing_system(crossing_d_one()), source="d_one")
    valid_one = crossing_solver.filter_valid_cycles(one)
    values["d_one"] = [c.as_dict() for c in one]
    if len(valid_one) != 1 or not (_near(valid_one[0].s1, -1.652018966) and _near(valid_one[0].t1, -1.054037933)):
        failures.append(f"d_one: {[(c.s1, c.t1) for c in valid_one]}")

    two = crossing_solver.solve_cycles(crossing_solver.build_crossing_system(crossing_d_two()), source="d_two")
    valid_two = crossing_solver.filter_valid_cycles(two)
    values["d_two"] = [c.as_dict() for c in two]
    if len(two) != 3 or len(valid_two) != 2:
        failures.append(f"d_two: {len(two)} candidates, {len(valid_two)} valid")

    for key, (class_tag, fields) in CIRCLE_EXAMPLES.items():
        candidates = crossing_solver.solve_circle_class(class_tag, fields(), source=key)
        valid = crossing_solver.filter_valid_cycles(candidates)
        values[key] = [c.as_dict() for c in candidates]
        expected = len(CIRCLE_EXPECTED_S.get(key, [])) + len(CIRCLE_EXPECTED_ST.get(key, []))
        if len(valid) != expected:
            failures.append(f"{key}: {len(valid)} valid cycles, expected {expected}")
        for s in CIRCLE_EXPECTED_S.get(key, []):
            if not any(_near(c.s1, s) or _near(c.s2, s) for c in valid):
                failures.append(f"{key}: no valid cycle through s = {s}")
        for s, t in CIRCLE_EXPECTED_ST.get(key, []):
            if not any((_near(c.s1, s) and _near(c.t1, t)) or (_near(c.s2, s) and _near(c.t2, t)) for c in valid):
                failures.append(f"{key}: no valid cycle through ({s}, {t})")

    for key in ("d_one", "d_two", *CIRCLE_EXAMPLES):
        for c in values[key]:
            if c["valid"] and (c["closure_residual"] is None or c["closure_residual"] > 1e-5):
                failures.append(f"{key}: cycle at s1 = {c['s1']:.9f} closes to {c['closure_residual']}")
    return CheckResult("crossing_cycles", not failures, "; ".join(failures), values=values)


def check_identities() -> CheckResult:
    failures = []
    r = np.linspace(1.001, 50.0, 1000)
    theta = np.arcsin(1.0 / r)
    gap = float(np.max(np.abs(r ** 4 * np.sin(2 * theta) - 2 * r ** 3 * np.cos(theta))))
    if gap > 1e-12 * np.max(r ** 4):
        failures.append(f"r^4 sin 2θ vs 2 r^3 cos θ: {gap:.2e}")

    x = np.linspace(0.3, 5.0, 200)
    H = level_function(HolomorphicField.from_tag(RationalNormal(2, 1.0)))
    if np.max(np.abs(H(x, 1.0) - H(x, -1.0))) > 1e-12:
        failures.append("iz^2/(1+z): H(x, 1) != H(x, -1)")
    y = np.linspace(-3.0, 3.0, 200)
    for tag in (Monomial(3), InversePower(1)):
        H = level_function(HolomorphicField.from_tag(tag))
        X, Y = np.meshgrid(x, y)
        if np.max(np.abs(H(X, Y) - H(X, -Y))) > 1e-12 * max(1.0, np.max(np.abs(H(X, Y)))):
            failures.append(f"{tag}: H(x, y) != H(x, -y)")

    cs = crossing_solver.build_crossing_system(crossing_d_two())
    worst = 0.0
    for s, t in crossing_solver.find_roots(cs):
        worst = max(worst, float(np.max(np.abs(cs.residual(*cs.partner(s, t))))))
    if worst > 1e-9:
        failures.append(f"involution partner residual {worst:.2e}")
    return CheckResult("identities", not failures, "; ".join(failures))


def check_bezout() -> CheckResult:
    failures = []
    if crossing_solver.bezout_bound(1) != 1 or crossing_solver.bezout_bound(2) != 3:
        failures.append("bound formula")
    for builder in (crossing_d_one, crossing_d_two):
        cs = crossing_solver.build_crossing_system(builder())
        valid = crossing_solver.filter_valid_cycles(crossing_solver.solve_cycles(cs, check_closure=False))
        if cs.central_degree is not None and len(valid) > crossing_solver.bezout_bound(cs.central_degree):
            failures.append(f"{builder.__name__}: {len(valid)} cycles exceed the bound")
    return CheckResult("bezout", not failures, "; ".join(failures))


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "wronskians": check_wronskians,
    "poincare": check_poincare,
    "moebius_corollaries": check_moebius_corollaries,
    "melnikov_consistency": check_melnikov_consistency,
    "transform_coeffs": check_transform_coeffs,
    "zero_counts": check_zero_counts,
    "realization": check_realization,
    "crossing_cycles": check_crossing_cycles,
    "identities": check_identities,
    "bezout": check_bezout,
}


def run_verification(only: list[str] = None) -> list[CheckResult]:
    """
    Run the reproduction checks.

    Args:
        only: Names of checks to run (all when None)

    Returns:
        One result per check; a check that raises is reported as failed
    """
    names = list(CHECKS) if not only else only
    results = []
    for name in names:
        if name not in CHECKS:
            raise ValueError(f"unknown check '{name}', expected one of {', '.join(CHECKS)}")
        start = time.perf_counter()
        try:
            result = CHECKS[name]()
        except Exception as e:
            logger.exception(f"check {name} raised")
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        result.seconds = time.perf_counter() - start
        logger.info(f"{name}: {'pass' if result.passed else 'FAIL'} ({result.seconds:.2f} s)")
        results.append(result)
    return results
