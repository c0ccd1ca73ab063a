import random
from fractions import Fraction

import pytest

from processing.elliptic_lattes import lattes_map
from processing.errors import PreconditionError
from processing.exact_arith import INFINITY, IntPolynomial, OrbitPolynomial, discriminant, reduce_proj
from processing.heights import height_comparison_constant
from processing.towers import (
    UnramifiedStatus, preimage_polynomial, preimage_tower, tower_root_residuals,
    unramified_certificate, valuation_histogram,
)


def orbit(*coeffs):
    """Constant term first."""
    return OrbitPolynomial(IntPolynomial.from_coefficients(coeffs))


@pytest.fixture(scope="module")
def tower(x3_minus_2):
    return preimage_tower(x3_minus_2, 7, 2, reduce_proj(3, 1), depth=2)


# --- preimages ---

def test_preimage_of_a_rational_point(f2):
    g = preimage_polynomial(f2, OrbitPolynomial.of_point(reduce_proj(5, 1)))
    assert g.poly.coefficients == (-20, -8, 0, -20, 1)


def test_preimage_of_a_fraction(x3_minus_2):
    L = lattes_map(x3_minus_2, 2)
    g = preimage_polynomial(L, OrbitPolynomial.of_point(reduce_proj(3, 1)))
    assert g.poly.coefficients == (24, 16, 0, -12, 1)
    half = preimage_polynomial(L, OrbitPolynomial.of_point(reduce_proj(1, 2)))
    # 2 N - D = 2x^4 + 32x - 4x^3 + 8, made primitive
    assert half.poly.coefficients == (4, 16, 0, -2, 1)


def test_preimage_degree_multiplies(f2):
    g = OrbitPolynomial.of_point(reduce_proj(1, 1))
    for _ in range(2):
        h = preimage_polynomial(f2, g)
        assert h.degree == 4 * g.degree
        g = h


def test_preimage_roots_map_to_the_orbit(f2):
    g = preimage_polynomial(f2, OrbitPolynomial.of_point(reduce_proj(0, 1)))
    # f2(x) = 0 at x = 0, 2 and the two roots of x^2 + 2x + 4
    assert g.poly.coefficients == (0, -8, 0, 0, 1)


# --- unramified certificates ---

@pytest.mark.parametrize("g, p, expected", [
    (orbit(-2, 0, 1), 3, UnramifiedStatus.CERTIFIED),
    (orbit(-3, 0, 1), 3, UnramifiedStatus.INCONCLUSIVE),
    (orbit(-2, 0, 1), 2, UnramifiedStatus.INCONCLUSIVE),
    (orbit(1, 0, 5), 5, UnramifiedStatus.INCONCLUSIVE),
    (orbit(1, 0, 1), 5, UnramifiedStatus.CERTIFIED),
    (orbit(-7, 5), 5, UnramifiedStatus.CERTIFIED),
    # p divides lead(g) but not disc(g) = -11
    (orbit(1, 1, 3), 3, UnramifiedStatus.CERTIFIED),
    (orbit(1, 3, 3), 3, UnramifiedStatus.INCONCLUSIVE),
    (orbit(24, 16, 0, -12, 1), 7, UnramifiedStatus.CERTIFIED),
    # (3, 5) reduces to a 2-torsion point mod 5, so two preimages collide
    (orbit(24, 16, 0, -12, 1), 5, UnramifiedStatus.INCONCLUSIVE),
])
def test_unramified_certificate_examples(g, p, expected):
    assert unramified_certificate(g, p) is expected


def test_unramified_certificate_matches_discriminant():
    rng = random.Random(29)
    checked = 0
    while checked < 40:
        coeffs = [rng.randint(-30, 30) for _ in range(rng.randint(2, 4))] + [rng.choice([1, 2, 3, 5, 6, 7, 10, 15])]
        f = IntPolynomial.from_coefficients(coeffs)
        if not f.is_squarefree() or f.primitive() != f:
            continue
        g = OrbitPolynomial(f)
        p = rng.choice([2, 3, 5, 7])
        expected = UnramifiedStatus.CERTIFIED if discriminant(g.poly) % p else UnramifiedStatus.INCONCLUSIVE
        assert unramified_certificate(g, p) is expected
        checked += 1


# --- valuation histograms ---

def test_histogram_flags_non_members():
    g = orbit(-3, 0, 1)
    histogram = valuation_histogram(g, 3)
    assert histogram.spectrum.values == (Fraction(1, 2), Fraction(1, 2))
    assert histogram.violations == (Fraction(1, 2),)
    assert not histogram.all_member
    assert valuation_histogram(g, 3, e=2).all_member
    assert histogram.to_dict()["values"] == ["1/2", "1/2"]


def test_histogram_with_mixed_valuations():
    # (x - 9)(x - 1/2)(x - 1/3) over p = 3
    g = OrbitPolynomial.normalize(
        IntPolynomial.from_coefficients((-9, 1))
        * IntPolynomial.from_coefficients((-1, 2))
        * IntPolynomial.from_coefficients((-1, 3))
    )
    histogram = valuation_histogram(g, 3)
    assert histogram.spectrum.values == (Fraction(-1), Fraction(0), Fraction(2))
    assert histogram.all_member


def test_histogram_rejects_bad_ramification_index():
    with pytest.raises(PreconditionError):
        valuation_histogram(orbit(-3, 0, 1), 3, e=0)


# --- towers ---

def test_tower_levels(tower):
    assert [level.level for level in tower] == [0, 1, 2]
    assert [level.orbit.degree for level in tower] == [1, 4, 16]
    assert [level.height_ratio for level in tower] == [Fraction(1), Fraction(1, 4), Fraction(1, 16)]
    assert tower[1].orbit.poly.coefficients == (24, 16, 0, -12, 1)


def test_tower_heights_scale_exactly(tower):
    base = tower[0].canonical_height
    assert base.certified_positive
    for level in tower:
        assert level.canonical_height.value == pytest.approx(base.value * float(level.height_ratio), rel=1e-12)
        assert level.canonical_height.error_bound <= base.error_bound


def test_tower_roots_map_to_q0(x3_minus_2, tower):
    L = lattes_map(x3_minus_2, 2)
    for level in tower:
        assert tower_root_residuals(L, level, reduce_proj(3, 1)) < 1e-6


def test_naive_orbit_height_is_bounded_by_canonical_height(x3_minus_2, tower):
    C = height_comparison_constant(lattes_map(x3_minus_2, 2))
    for level in tower:
        assert level.naive_orbit_height <= level.canonical_height.value + C


def test_certified_levels_have_integral_spectra(tower):
    assert all(level.unramified_at_p is UnramifiedStatus.CERTIFIED for level in tower)
    for level in tower:
        if level.unramified_at_p is UnramifiedStatus.CERTIFIED:
            assert level.spectrum.all_member
    assert tower[1].spectrum.spectrum.values == (Fraction(0),) * 4


def test_tower_records_are_flat(tower):
    record = tower[1].to_record()
    assert record["degree"] == 4
    assert record["height_ratio"] == "1/4"
    assert record["unramified_at_p"] == "certified"
    assert record["spectrum"] == "0/1 0/1 0/1 0/1"
    assert all(not isinstance(value, (dict, list)) for value in record.values())
    assert tower[1].to_dict()["orbit"] == "x**4 - 12*x**3 + 16*x + 24"


def test_tower_with_m_three(x3_minus_2):
    levels = preimage_tower(x3_minus_2, 5, 3, reduce_proj(3, 1), depth=1, tol=1e-4)
    assert [level.orbit.degree for level in levels] == [1, 9]
    assert levels[1].height_ratio == Fraction(1, 9)


@pytest.mark.parametrize("curve, p, m, q0, depth", [
    ("x3_plus_1", 3, 2, reduce_proj(1, 1), 1),        # bad reduction at 3
    ("x3_minus_2", 5, 5, reduce_proj(3, 1), 1),       # p divides m
    ("x3_plus_1", 5, 2, reduce_proj(2, 1), 1),        # q0 preperiodic
    ("x3_minus_2", 5, 2, INFINITY, 1),                # q0 at infinity
    ("x3_minus_2", 5, 3, reduce_proj(3, 1), 3),       # degree cap
    ("x3_minus_2", 5, 2, reduce_proj(3, 1), -1),
])
def test_tower_preconditions(request, curve, p, m, q0, depth):
    with pytest.raises(PreconditionError):
        preimage_tower(request.getfixturevalue(curve), p, m, q0, depth)
