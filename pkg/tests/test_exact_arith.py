import math
import random
from fractions import Fraction

import pytest
from sympy import Matrix

from processing.errors import PreconditionError
from processing.exact_arith import (
    INFINITY, IntPolynomial, OrbitPolynomial, ProjPointQ, complex_roots, discriminant,
    fraction_to_str, homogeneous_evaluate, int_valuation, mahler_height, newton_polygon, primitive_pair,
    reduce_proj, resultant, valuation_spectrum,
)


def poly(*coeffs):
    """Constant term first."""
    return IntPolynomial.from_coefficients(coeffs)


def sylvester_determinant(f: IntPolynomial, g: IntPolynomial) -> int:
    m, n = f.degree, g.degree
    fc = list(reversed(f.coefficients))
    gc = list(reversed(g.coefficients))
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + fc + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gc + [0] * (size - n - 1 - i))
    return int(Matrix(rows).det())


def random_poly(rng, degree, bound=9):
    coeffs = [rng.randint(-bound, bound) for _ in range(degree)]
    lead = 0
    while lead == 0:
        lead = rng.randint(-bound, bound)
    return IntPolynomial.from_coefficients(coeffs + [lead])


# --- projective points ---

@pytest.mark.parametrize("a, b, expected", [
    (2, 4, (1, 2)),
    (5, 0, (1, 0)),
    (6, -9, (-2, 3)),
    (-5, 0, (1, 0)),
    (0, -7, (0, 1)),
])
def test_reduce_proj_examples(a, b, expected):
    point = reduce_proj(a, b)
    assert (point.a, point.b) == expected


def test_reduce_proj_rejects_origin():
    with pytest.raises(PreconditionError):
        reduce_proj(0, 0)


def test_reduce_proj_is_class_invariant():
    rng = random.Random(7)
    for _ in range(100):
        a, b = rng.randint(-50, 50), rng.randint(-50, 50)
        if a == 0 and b == 0:
            continue
        lam = rng.choice([-3, -1, 2, 5, 12])
        assert reduce_proj(lam * a, lam * b) == reduce_proj(a, b)
        point = reduce_proj(a, b)
        assert reduce_proj(point.a, point.b) == point


def test_unnormalized_point_is_rejected():
    with pytest.raises(PreconditionError):
        ProjPointQ(2, 4)


@pytest.mark.parametrize("text, expected", [
    ("3/2", (3, 2)),
    ("-6/4", (-3, 2)),
    ("7", (7, 1)),
    ("inf", (1, 0)),
    ("∞", (1, 0)),
])
def test_parse_point(text, expected):
    point = ProjPointQ.parse(text)
    assert (point.a, point.b) == expected


@pytest.mark.parametrize("text", ["abc", "1/x", "3/", "0/0", ""])
def test_parse_point_rejects_malformed_text(text):
    with pytest.raises(PreconditionError):
        ProjPointQ.parse(text)


def test_point_fraction_roundtrip():
    assert ProjPointQ.from_fraction(Fraction(-3, 9)).as_fraction() == Fraction(-1, 3)
    assert ProjPointQ.from_fraction(None) is INFINITY
    assert str(reduce_proj(1, 2)) == "1/2"
    assert str(INFINITY) == "inf"


# --- polynomials ---

def test_polynomial_basics():
    f = poly(0, -8, 0, 0, 1)
    assert f.degree == 4
    assert f.leading == 1
    assert f.derivative().coefficients == (-8, 0, 0, 4)
    assert f.evaluate(Fraction(2)) == 0
    assert poly(0, 0, 0).is_zero
    assert poly().degree == -1
    assert poly(6, 4, 2).primitive().coefficients == (3, 2, 1)
    assert poly(-6, 0, -2).primitive().coefficients == (3, 0, 1)


def test_squarefree_part():
    # (x - 1)^2 (x + 2)
    f = poly(1, -2, 1) * poly(2, 1)
    assert not f.is_squarefree()
    assert f.squarefree_part() == poly(-2, 1, 1)


@pytest.mark.parametrize("f, g, expected", [
    (poly(1, 0, 1), poly(1, 1), 2),
    (poly(0, 1), poly(0, 1), 0),
    (poly(-2, 0, 1), poly(-2, 0, 1), 0),
    # negative leading coefficient: (-9)^3 * g(4/9)
    (poly(4, -9), poly(-2, -6, 1, 8), 2746),
    (poly(-2, -6, 1, 8), poly(4, -9), -2746),
])
def test_resultant_examples(f, g, expected):
    assert resultant(f, g) == expected


def test_resultant_matches_sylvester_determinant():
    rng = random.Random(2024)
    for _ in range(50):
        f = random_poly(rng, rng.randint(1, 4))
        g = random_poly(rng, rng.randint(1, 4))
        assert resultant(f, g) == sylvester_determinant(f, g)


def test_resultant_with_negative_leading_coefficients():
    rng = random.Random(7)
    for _ in range(60):
        f = random_poly(rng, rng.randint(1, 3))
        g = random_poly(rng, rng.randint(1, 4))
        if f.leading > 0:
            f = IntPolynomial.from_coefficients(-c for c in f.coefficients)
        assert resultant(f, g) == sylvester_determinant(f, g)


def test_resultant_symmetry_and_multiplicativity():
    rng = random.Random(99)
    for _ in range(20):
        f = random_poly(rng, rng.randint(1, 4))
        g = random_poly(rng, rng.randint(1, 4))
        h = random_poly(rng, rng.randint(1, 4))
        assert resultant(f, g) == (-1) ** (f.degree * g.degree) * resultant(g, f)
        assert resultant(f, g * h) == resultant(f, g) * resultant(f, h)


def test_resultant_of_two_zero_polynomials():
    with pytest.raises(PreconditionError):
        resultant(poly(), poly())


@pytest.mark.parametrize("f, expected", [
    (poly(1, 0, 1), -4),
    (poly(-2, 0, 1), 8),
    (poly(-3, 0, 1), 12),
    (poly(-1, 1), 1),
    (poly(3, 0, -1), 12),
    (poly(1, 1, 3), -11),
    (poly(5, -3), 1),
])
def test_discriminant_examples(f, expected):
    assert discriminant(f) == expected


def test_discriminant_of_constant_is_rejected():
    with pytest.raises(PreconditionError):
        discriminant(poly(5))


# --- Newton polygons ---

def test_newton_polygon_examples():
    p = 3
    single = newton_polygon(poly(-p, 1), p)
    assert single.segments == ((Fraction(-1), 1),)

    flat = newton_polygon(poly(-1, 0, 1), 5)
    assert flat.segments == ((Fraction(0), 2),)

    two = newton_polygon(poly(p, 1, p), p)
    assert two.segments == ((Fraction(-1), 1), (Fraction(1), 1))
    assert two.root_valuations() == (Fraction(-1), Fraction(1))


def test_newton_polygon_rejects_zero():
    with pytest.raises(PreconditionError):
        newton_polygon(poly(), 3)


def test_newton_polygon_matches_linear_factor_oracle():
    rng = random.Random(5)
    for _ in range(50):
        p = rng.choice([2, 3, 5, 7])
        exponents = [rng.randint(0, 3) for _ in range(rng.randint(1, 4))]
        f = poly(1)
        for k in exponents:
            unit = 0
            while unit % p == 0:
                unit = rng.randint(-20, 20)
            f = f * poly(-(p ** k) * unit, 1)
        polygon = newton_polygon(f, p)
        assert polygon.root_valuations() == tuple(sorted(Fraction(k) for k in exponents))
        assert polygon.total_length == f.degree
        slopes = [slope for slope, _ in polygon.segments]
        assert slopes == sorted(set(slopes))


# --- orbit polynomials and spectra ---

def test_orbit_polynomial_validation():
    with pytest.raises(PreconditionError):
        OrbitPolynomial(poly(1, -2, 1))  # (x - 1)^2
    with pytest.raises(PreconditionError):
        OrbitPolynomial(poly(2, 4))  # content 2
    assert OrbitPolynomial.normalize(poly(2, -4, 2) * poly(3, 1)).poly == poly(-3, 2, 1)
    assert OrbitPolynomial.of_point(reduce_proj(3, 2)).poly == poly(-3, 2)


@pytest.mark.parametrize("f, p, expected", [
    (poly(-2, 0, 1), 3, (Fraction(0), Fraction(0))),
    (poly(-3, 0, 1), 3, (Fraction(1, 2), Fraction(1, 2))),
])
def test_valuation_spectrum_examples(f, p, expected):
    spectrum = valuation_spectrum(OrbitPolynomial(f), p)
    assert spectrum.values == expected
    assert spectrum.infinite == 0


def test_valuation_spectrum_counts_root_at_zero_separately():
    spectrum = valuation_spectrum(OrbitPolynomial(poly(0, -3, 1)), 3)
    assert spectrum.values == (Fraction(1),)
    assert spectrum.infinite == 1
    assert len(spectrum) == 2


def test_spectrum_sum_matches_constant_and_lead():
    rng = random.Random(11)
    checked = 0
    while checked < 20:
        f = random_poly(rng, rng.randint(1, 5), bound=60)
        if f.coefficients[0] == 0 or not f.is_squarefree():
            continue
        g = OrbitPolynomial.normalize(f)
        p = rng.choice([2, 3, 5])
        spectrum = valuation_spectrum(g, p)
        lead = g.poly.leading
        constant = g.poly.coefficients[0]
        assert spectrum.total == int_valuation(constant, p) - int_valuation(lead, p)
        checked += 1


# --- numeric roots and heights ---

def test_complex_roots_residuals():
    roots = complex_roots(poly(-2, 0, 1))
    assert sorted(float(abs(z)) for z in roots) == pytest.approx([math.sqrt(2)] * 2, rel=1e-12)


@pytest.mark.parametrize("f, expected", [
    (poly(-1, 2), math.log(2)),
    (poly(-2, 0, 1), 0.5 * math.log(2)),
    (poly(0, 1), 0.0),
])
def test_mahler_height_examples(f, expected):
    assert mahler_height(OrbitPolynomial(f)) == pytest.approx(expected, abs=1e-9)


def test_mahler_height_of_rational_roots():
    roots = [Fraction(3, 2), Fraction(-5, 7), Fraction(11, 1), Fraction(1, 4)]
    f = poly(1)
    for r in roots:
        f = f * poly(-r.numerator, r.denominator)
    expected = sum(math.log(max(abs(r.numerator), r.denominator)) for r in roots) / len(roots)
    assert mahler_height(OrbitPolynomial.normalize(f)) == pytest.approx(expected, abs=1e-9)


def test_mahler_height_rejects_constant():
    with pytest.raises(PreconditionError):
        OrbitPolynomial(poly(3))


def test_homogeneous_evaluate():
    # x^4 - 8x as a quartic form at (a, b) = (2, 1) and at infinity
    assert homogeneous_evaluate((0, -8, 0, 0, 1), 2, 1, 4) == 0
    assert homogeneous_evaluate((0, -8, 0, 0, 1), 3, 2, 4) == 81 - 8 * 3 * 8
    assert homogeneous_evaluate((4, 0, 0, 4), 1, 0, 4) == 0
    assert homogeneous_evaluate((0, -8, 0, 0, 1), 1, 0, 4) == 1


def test_primitive_pair():
    num, den = primitive_pair([Fraction(0), Fraction(-2), Fraction(0), Fraction(0), Fraction(1, 4)],
                              [Fraction(1), Fraction(0), Fraction(0), Fraction(1)])
    assert num.coefficients == (0, -8, 0, 0, 1)
    assert den.coefficients == (4, 0, 0, 4)


def test_fraction_to_str():
    assert fraction_to_str(Fraction(1, 3)) == "1/3"
    assert fraction_to_str(Fraction(4)) == "4/1"
    assert fraction_to_str(None) == "inf"
    assert fraction_to_str(math.inf) == "inf"
