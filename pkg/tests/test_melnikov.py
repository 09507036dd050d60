import mpmath
import numpy as np
import pytest

from src.geometry import STRIP, ZONES, ZoneTag
from src.melnikov import (
    ArcSpec,
    BasisName,
    DomainViolation,
    FamilyAbsent,
    MelnikovError,
    PerturbationCoeffs,
    PoleOnArc,
    RankDeficient,
    arc_melnikov_integral,
    assemble,
    basis_wronskian,
    choose_coefficients,
    closed_arc_integral,
    count_simple_zeros,
    family_arcs,
    melnikov_basis,
    melnikov_by_pushforward,
    melnikov_closed,
    melnikov_one_line,
    melnikov_quadrature,
    melnikov_weighted,
    polynomial_basis,
    realize_perturbation,
    strip_raw_series,
    transform_coeffs,
    wronskian,
)
from src.field_core import HolomorphicField, InversePower, Monomial
from src.pwhs_system import PiecewiseSystem

DEGREES = {BasisName.STRIP: 4, BasisName.EXTERNAL: 4, BasisName.INTERNAL_INNER: 3, BasisName.INTERNAL_OUTER: 3}
RADII = {
    BasisName.STRIP: [1.3, 2.5, 4.0],
    BasisName.EXTERNAL: [1.3, 2.5, 4.0],
    BasisName.INTERNAL_INNER: [1.2, 2.0, 2.8],
    BasisName.INTERNAL_OUTER: [3.2, 4.5, 6.0],
}


def _coeffs(seed: int, degree: int) -> PerturbationCoeffs:
    rng = np.random.default_rng(seed)
    return PerturbationCoeffs.from_vector(rng.uniform(-1.0, 1.0, 6 * (degree + 1)), degree)


def test_coefficient_vector_layout():
    coeffs = PerturbationCoeffs.from_vector(np.arange(12.0), 1)
    assert coeffs.a[ZoneTag.PLUS] == (0.0, 1.0)
    assert coeffs.b[ZoneTag.PLUS] == (2.0, 3.0)
    assert coeffs.a[ZoneTag.MINUS] == (8.0, 9.0)
    assert np.array_equal(coeffs.as_vector(), np.arange(12.0))
    assert coeffs.degree == 1
    assert coeffs.padded(3).a[ZoneTag.CENTRAL] == (4.0, 5.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        coeffs.padded(0)


def test_unequal_coefficient_lengths_are_rejected():
    with pytest.raises(ValueError):
        PerturbationCoeffs({z: (1.0,) for z in ZONES}, {z: (1.0, 2.0) for z in ZONES})


def test_transformed_coefficients_of_a_constant():
    # h = i: beta_0 = 1/2, only the rho^2 term survives
    coeffs = PerturbationCoeffs({z: (0.0,) for z in ZONES}, {z: (1.0,) for z in ZONES})
    t = transform_coeffs(coeffs)
    assert t.c(ZoneTag.PLUS, 2) == pytest.approx(0.5)
    assert t.d(ZoneTag.PLUS, 2) == pytest.approx(0.0)
    assert t.c(ZoneTag.PLUS, 1) == 0.0


def test_closed_arc_integral_matches_quadrature():
    arc = ArcSpec(0.5 - 2j, 2.0, 0.3, 2.0)
    terms = {-1: 0.4 - 1j, 0: 1 + 2j, 1: -0.5 + 0.25j, 2: 0.7j}
    rho = lambda z: sum(p * (z - arc.center) ** m for m, p in terms.items())
    assert closed_arc_integral(terms, arc) == pytest.approx(arc_melnikov_integral(rho, arc), abs=1e-9)


def test_pole_on_the_arc_is_reported():
    f = HolomorphicField.from_tag(InversePower(1))
    with pytest.raises(PoleOnArc):
        arc_melnikov_integral(f, ArcSpec(1.0, 1.0, 2.0, 4.0))
    # i/z on the unit quarter circle: the integrand is -sin 2t
    assert arc_melnikov_integral(f, ArcSpec(0j, 1.0, 0.0, np.pi / 2)) == pytest.approx(-1.0, abs=1e-9)


def test_arc_radius_must_be_positive():
    with pytest.raises(ValueError):
        ArcSpec(0j, 0.0, 0.0, 1.0)


@pytest.mark.parametrize("name", list(BasisName), ids=lambda n: n.value)
def test_closed_series_matches_arc_quadrature(name):
    for seed in range(3):
        coeffs = _coeffs(seed, DEGREES[name])
        for r in RADII[name]:
            closed = melnikov_closed(name, coeffs, r)
            assert closed == pytest.approx(melnikov_quadrature(name, coeffs, r), rel=1e-9, abs=1e-8)
            assert closed == pytest.approx(melnikov_quadrature(name, coeffs, r, exact=True), rel=1e-9, abs=1e-8)


@pytest.mark.parametrize("name, r", [
    (BasisName.EXTERNAL, 2.5),
    (BasisName.INTERNAL_INNER, 2.0),
    (BasisName.INTERNAL_OUTER, 4.5),
])
def test_pushed_perturbation_gives_the_same_function(name, r):
    coeffs = _coeffs(5, DEGREES[name])
    assert melnikov_by_pushforward(name, coeffs, r) == pytest.approx(melnikov_closed(name, coeffs, r), rel=1e-9, abs=1e-8)


def test_raw_strip_series_folds_into_the_basis():
    coeffs = _coeffs(9, 4)
    for r in (1.1, 3.0, 12.0):
        assert strip_raw_series(coeffs, r) == pytest.approx(melnikov_closed("strip", coeffs, r), rel=1e-10, abs=1e-7)


def test_zero_perturbation_gives_zero():
    for name in BasisName:
        r = RADII[name][1]
        assert melnikov_closed(name, PerturbationCoeffs.zeros(DEGREES[name]), r) == 0.0


def test_radius_outside_the_domain():
    with pytest.raises(DomainViolation):
        melnikov_closed("strip", PerturbationCoeffs.zeros(4), 0.5)
    with pytest.raises(DomainViolation):
        melnikov_closed("internal_inner", PerturbationCoeffs.zeros(3), 3.5)
    with pytest.raises(DomainViolation):
        melnikov_quadrature("internal_outer", PerturbationCoeffs.zeros(3), 2.0)


def test_degree_above_the_series_is_rejected():
    with pytest.raises(ValueError):
        assemble("internal_inner", PerturbationCoeffs.zeros(4))


def test_strip_coefficients_of_a_single_term():
    # h^+ = i z^4 only feeds the r^5 cos 3θ coefficient
    a = {z: (0.0,) * 5 for z in ZONES}
    b = {z: (0.0,) * 5 for z in ZONES}
    b[ZoneTag.PLUS] = (0.0, 0.0, 0.0, 0.0, 1.0)
    alpha = assemble("strip", PerturbationCoeffs(a, b))
    assert np.allclose(alpha, [0, 0, 0, 0, 2 / 3])


def test_basis_sizes_and_domains():
    sizes = {BasisName.STRIP: 5, BasisName.EXTERNAL: 6, BasisName.INTERNAL_INNER: 5, BasisName.INTERNAL_OUTER: 9}
    for name, n in sizes.items():
        basis = melnikov_basis(name)
        assert len(basis) == n
        assert basis.evaluate([RADII[name][0], RADII[name][1]]).shape == (2, n)
    assert melnikov_basis("internal_inner").contains(2.0)
    assert not melnikov_basis("internal_inner").contains(3.0)


def test_family_arcs_cover_the_circle():
    arcs = family_arcs("strip", 2.0)
    total = sum(arc.t_end - arc.t_start for arc in arcs.values())
    assert total == pytest.approx(2 * np.pi)
    assert arcs["-"].start == pytest.approx(complex(-np.sqrt(3), -1))
    assert arcs["c1"].end == pytest.approx(complex(np.sqrt(3), 1))
    inner = family_arcs("internal_inner", 2.0)
    assert set(inner) == {"-", "c"}
    assert sum(arc.t_end - arc.t_start for arc in inner.values()) == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("name", [BasisName.STRIP, BasisName.EXTERNAL, BasisName.INTERNAL_INNER])
def test_basis_wronskians(name):
    h, expected = {
        BasisName.STRIP: (2.0, 8.0),
        BasisName.EXTERNAL: (2.0, -np.sqrt(3.0) * np.pi / 64),
        BasisName.INTERNAL_INNER: (1.0, -384 * np.pi),
    }[name]
    assert basis_wronskian(melnikov_basis(name), h) == pytest.approx(expected, rel=1e-6)


def test_outer_wronskian_value():
    assert basis_wronskian(melnikov_basis("internal_outer"), 5.0) == pytest.approx(-0.55155, abs=1e-3)


@pytest.mark.parametrize("name, h", [(BasisName.STRIP, 2.0), (BasisName.INTERNAL_OUTER, 5.0)])
def test_numeric_wronskian_of_basis_functions(name, h):
    # W_h = W_r * (dr/dh)^(n(n-1)/2) with r = sqrt(2h)
    basis = melnikov_basis(name)
    n, r = len(basis), np.sqrt(2 * h)
    in_r = wronskian(basis.functions, r)
    assert in_r * r ** (-n * (n - 1) / 2) == pytest.approx(basis_wronskian(basis, h), rel=1e-5)


def test_basis_functions_accept_floats_and_mpf():
    f = melnikov_basis("internal_outer").functions[5]
    assert float(f(mpmath.mpf(4))) == pytest.approx(f(4.0))
    assert f(np.array([4.0, 5.0])).shape == (2,)


def test_wronskian_of_monomials():
    funcs = [lambda x: mpmath.mpf(1), lambda x: x, lambda x: x ** 2]
    assert wronskian(funcs, 0.7) == pytest.approx(2.0, rel=1e-8)
    derivatives = [
        [lambda x: 1.0, lambda x: 0.0, lambda x: 0.0],
        [lambda x: x, lambda x: 1.0, lambda x: 0.0],
        [lambda x: x ** 2, lambda x: 2 * x, lambda x: 2.0],
    ]
    assert wronskian(funcs, 0.7, derivatives) == pytest.approx(2.0)


def test_count_simple_zeros():
    count, roots = count_simple_zeros(np.sin, (0.5, 10.0))
    assert count == 3
    assert roots == pytest.approx([np.pi, 2 * np.pi, 3 * np.pi], abs=1e-9)
    # a double zero is not simple
    assert count_simple_zeros(lambda x: x * x, (-1.0, 1.3))[0] == 0
    with pytest.raises(ValueError):
        count_simple_zeros(np.sin, (0.0, 1.0), grid_n=50)


def test_choose_coefficients_interpolates_polynomials():
    coeffs = choose_coefficients(polynomial_basis(3), [1.0, 2.0, 3.0])
    # (x - 1)(x - 2)(x - 3) scaled to max-norm 1 with a positive leading entry
    assert np.allclose(coeffs, [6 / 11, -1.0, 6 / 11, -1 / 11], atol=1e-9)


def test_choose_coefficients_validates_targets():
    basis = polynomial_basis(3, domain=(0.0, 10.0))
    with pytest.raises(ValueError):
        choose_coefficients(basis, [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        choose_coefficients(basis, [1.0, 1.0])
    with pytest.raises(DomainViolation):
        choose_coefficients(basis, [11.0])
    with pytest.raises(RankDeficient):
        choose_coefficients(basis, [1.0, 1.0 + 1e-13, 2.0])


@pytest.mark.parametrize("name, targets, interval", [
    (BasisName.STRIP, [1.5, 2.0, 3.0, 4.0], (1.0001, 12.0)),
    (BasisName.INTERNAL_OUTER, [3.05, 3.2, 3.5, 4.0, 5.0, 6.5, 8.5, 11.0], (3.0001, 15.0)),
])
def test_prescribed_zeros_are_simple(name, targets, interval):
    basis = melnikov_basis(name)
    coeffs = choose_coefficients(basis, targets)
    combo = lambda r: float(coeffs @ basis.evaluate(r)[0])
    count, roots = count_simple_zeros(combo, interval)
    assert count >= len(targets)
    for t in targets:
        assert min(abs(x - t) for x in roots) < 1e-5


def test_realized_perturbation_reproduces_the_series():
    alpha = [1.0, 2.0, 3.0, 4.0, 5.0]
    coeffs = realize_perturbation("strip", alpha)
    assert np.allclose(assemble("strip", coeffs), alpha)


@pytest.mark.parametrize("name", list(BasisName), ids=lambda n: n.value)
def test_every_series_vector_is_realized(name):
    alpha = np.linspace(-1.0, 1.0, len(melnikov_basis(name)))
    assert np.allclose(assemble(name, realize_perturbation(name, alpha)), alpha, atol=1e-9)


def _perturbed_rotation(coeffs: PerturbationCoeffs) -> PiecewiseSystem:
    f = HolomorphicField.from_tag(Monomial(1))
    return PiecewiseSystem(STRIP, {zone: f for zone in ZONES}, coeffs.fields(), epsilon=0.0)


def test_weighted_formula_on_arcs_reduces_to_the_plain_sum():
    coeffs = _coeffs(3, 4)
    system = _perturbed_rotation(coeffs)
    r = 2.0
    value = melnikov_weighted(system, r * r / 2, arcs=family_arcs("strip", r))
    assert value == pytest.approx(melnikov_quadrature("strip", coeffs, r), abs=1e-9)


def test_weighted_formula_along_integrated_orbits():
    coeffs = _coeffs(4, 2)
    system = _perturbed_rotation(coeffs)
    r = 2.0
    assert melnikov_weighted(system, r * r / 2) == pytest.approx(melnikov_closed("strip", coeffs, r), abs=1e-6)


def test_family_absent_below_the_lines():
    system = _perturbed_rotation(_coeffs(4, 2))
    with pytest.raises(FamilyAbsent):
        melnikov_weighted(system, 0.1)


def test_one_line_formula_on_arcs():
    coeffs = _coeffs(6, 2)
    system = _perturbed_rotation(coeffs)
    arcs = {"+": ArcSpec(0j, 2.0, np.pi / 6, 5 * np.pi / 6), "c": ArcSpec(0j, 2.0, 5 * np.pi / 6, 13 * np.pi / 6)}
    expected = (arc_melnikov_integral(system.perturbations[ZoneTag.PLUS], arcs["+"])
                + arc_melnikov_integral(system.perturbations[ZoneTag.CENTRAL], arcs["c"]))
    assert melnikov_one_line(system, 2.0, 1, arcs) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        melnikov_one_line(system, 2.0, 3, arcs)


def test_melnikov_error_hierarchy():
    assert issubclass(DomainViolation, MelnikovError)
    assert issubclass(FamilyAbsent, MelnikovError)
