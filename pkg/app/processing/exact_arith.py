# processing/exact_arith.py


"""Exact integer, rational and polynomial helpers.

Everything here works on immutable values and returns new ones. Polynomials
are stored as tuples of Python integers, constant term first, and handed to
sympy whenever a real algorithm is needed (subresultant resultants,
discriminants, square-free parts). Complex roots for Mahler measures come from
mpmath's simultaneous iteration solver and are accepted only after a residual
check.

Primary utilities:
 - reduce_proj(a, b): canonical representative of a point of P^1(Q)
 - resultant(f, g), discriminant(f): Sylvester-convention values over ZZ
 - newton_polygon(f, p): lower convex hull of (i, v_p(a_i))
 - valuation_spectrum(g, p): root valuations of an orbit polynomial
 - complex_roots(g), mahler_height(g): certified numeric root data
 - homogeneous_evaluate(coeffs, a, b, d): degree-d form evaluation

Conventions:
 - v_p(p) = 1; v_p(0) = +inf (math.inf).
 - Projective points: gcd(a, b) = 1, b >= 0, infinity is (1, 0).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import gmpy2
import mpmath
import numpy as np
from mpmath.libmp import NoConvergence
from sympy import Poly, Symbol, ZZ
from sympy.polys.subresultants_qq_zz import res_z

from processing.errors import PrecisionError, PreconditionError

logger = logging.getLogger(__name__)

X = Symbol("x")

# Root finder acceptance: |g(z)| / |g'(z)| below this times max(1, |z|).
ROOT_RESIDUAL_TOLERANCE = 1e-12


def int_valuation(n: int, p: int) -> Union[int, float]:
    """p-adic valuation of an integer; math.inf for 0."""
    if n == 0:
        return math.inf
    _, multiplicity = gmpy2.remove(gmpy2.mpz(abs(n)), p)
    return int(multiplicity)


# --- Projective points -------------------------------------------------------

@dataclass(frozen=True)
class ProjPointQ:
    """A point (a : b) of P^1(Q) in normalized form."""
    a: int
    b: int

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise PreconditionError("(0, 0) is not a projective point")
        if math.gcd(self.a, self.b) != 1 or self.b < 0 or (self.b == 0 and self.a != 1):
            raise PreconditionError(
                f"({self.a}, {self.b}) is not normalized; build it with reduce_proj"
            )

    @property
    def is_infinity(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Optional[Fraction]:
        """The affine coordinate a/b, or None for infinity."""
        if self.is_infinity:
            return None
        return Fraction(self.a, self.b)

    @classmethod
    def from_fraction(cls, value: Optional[Fraction]) -> "ProjPointQ":
        if value is None:
            return INFINITY
        value = Fraction(value)
        return reduce_proj(value.numerator, value.denominator)

    @classmethod
    def parse(cls, text: str) -> "ProjPointQ":
        """Reads "a/b", "a" or "inf" (also "∞")."""
        token = text.strip().lower()
        if token in ("inf", "infinity", "∞"):
            return INFINITY
        num, slash, den = token.partition("/")
        try:
            return reduce_proj(int(num), int(den) if slash else 1)
        except ValueError as exc:
            raise PreconditionError(f"not a point of P^1(Q): {text!r}") from exc

    def __str__(self) -> str:
        if self.is_infinity:
            return "inf"
        if self.b == 1:
            return str(self.a)
        return f"{self.a}/{self.b}"


def reduce_proj(a: int, b: int) -> ProjPointQ:
    """Normalizes (a, b) to the unique representative of its class."""
    a, b = int(a), int(b)
    if a == 0 and b == 0:
        raise PreconditionError("reduce_proj: (0, 0) is not a projective point")
    if b == 0:
        return ProjPointQ(1, 0)
    g = math.gcd(a, b)
    a, b = a // g, b // g
    if b < 0:
        a, b = -a, -b
    return ProjPointQ(a, b)


INFINITY = ProjPointQ(1, 0)


# --- Integer polynomials -----------------------------------------------------

@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients constant term first.

    Trailing zeros are stripped, so the zero polynomial has an empty tuple.
    """
    coefficients: Tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_coefficients(cls, coeffs: Iterable[int]) -> "IntPolynomial":
        return cls(tuple(coeffs))

    @classmethod
    def from_poly(cls, poly: Poly) -> "IntPolynomial":
        if poly.is_zero:
            return cls(())
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    @classmethod
    def linear_from_point(cls, point: ProjPointQ) -> "IntPolynomial":
        """b*x - a, the defining polynomial of a finite rational point."""
        if point.is_infinity:
            raise PreconditionError("infinity has no affine defining polynomial")
        return cls((-point.a, point.b))

    def to_poly(self) -> Poly:
        if self.is_zero:
            return Poly(0, X, domain=ZZ)
        return Poly(list(reversed(self.coefficients)), X, domain=ZZ)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1] if self.coefficients else 0

    @property
    def content(self) -> int:
        g = 0
        for c in self.coefficients:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        """Content-1 representative with positive leading coefficient."""
        if self.is_zero:
            return self
        g = self.content
        if self.leading < 0:
            g = -g
        return IntPolynomial(tuple(c // g for c in self.coefficients))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coefficients) if i > 0))

    def squarefree_part(self) -> "IntPolynomial":
        if self.degree < 1:
            return self
        return IntPolynomial.from_poly(self.to_poly().sqf_part()).primitive()

    def is_squarefree(self) -> bool:
        if self.degree < 1:
            return True
        return self.to_poly().gcd(self.derivative().to_poly()).degree() == 0

    def evaluate(self, value: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * value + c
        return acc

    def root_order_at_zero(self) -> int:
        for i, c in enumerate(self.coefficients):
            if c != 0:
                return i
        raise PreconditionError("the zero polynomial vanishes to infinite order")

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial.from_poly(self.to_poly() + other.to_poly())

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial.from_poly(self.to_poly() - other.to_poly())

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial.from_poly(self.to_poly() * other.to_poly())

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return str(self.to_poly().as_expr())


def resultant(f: IntPolynomial, g: IntPolynomial) -> int:
    """Res(f, g) in the Sylvester convention.

    Pseudo-remainder recursion over ZZ (sympy's res_z). The sign follows the
    Sylvester determinant for leading coefficients of either sign.
    """
    if f.is_zero and g.is_zero:
        raise PreconditionError("resultant of two zero polynomials is undefined")
    if f.is_zero or g.is_zero:
        return 0
    if f.degree == 0:
        return f.leading ** g.degree
    if g.degree == 0:
        return g.leading ** f.degree
    return int(res_z(f.to_poly().as_expr(), g.to_poly().as_expr(), X))


def discriminant(f: IntPolynomial) -> int:
    """(-1)^(d(d-1)/2) Res(f, f') / lead(f)."""
    if f.degree < 1:
        raise PreconditionError("discriminant needs a polynomial of degree >= 1")
    d = f.degree
    # lead(f) divides Res(f, f') exactly
    return (-1) ** (d * (d - 1) // 2) * (resultant(f, f.derivative()) // f.leading)


# --- Newton polygons ---------------------------------------------------------

@dataclass(frozen=True)
class NewtonPolygon:
    """Segments (slope, horizontal length), slopes strictly increasing."""
    p: int
    segments: Tuple[Tuple[Fraction, int], ...]

    def root_valuations(self) -> Tuple[Fraction, ...]:
        """Valuations of the nonzero roots, with multiplicity, ascending."""
        values: List[Fraction] = []
        for slope, length in self.segments:
            values.extend([-slope] * length)
        return tuple(sorted(values))

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.segments)


def newton_polygon(f: IntPolynomial, p: int) -> NewtonPolygon:
    """Lower convex hull of {(i, v_p(a_i)) : a_i != 0} (Andrew's monotone chain)."""
    if f.is_zero:
        raise PreconditionError("the zero polynomial has no Newton polygon")
    points = [(i, int_valuation(c, p)) for i, c in enumerate(f.coefficients) if c != 0]

    hull: List[Tuple[int, int]] = []
    for point in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] when it is on or above the chord hull[-2] -> point
            if Fraction(point[1] - y2, point[0] - x2) <= Fraction(y2 - y1, x2 - x1):
                hull.pop()
            else:
                break
        hull.append(point)

    segments = tuple(
        (Fraction(y2 - y1, x2 - x1), x2 - x1)
        for (x1, y1), (x2, y2) in zip(hull, hull[1:])
    )
    return NewtonPolygon(p=p, segments=segments)


# --- Orbit polynomials -------------------------------------------------------

@dataclass(frozen=True)
class OrbitPolynomial:
    """Primitive square-free integer polynomial; its roots form a Galois-stable set."""
    poly: IntPolynomial

    def __post_init__(self):
        if self.poly.degree < 1:
            raise PreconditionError("an orbit polynomial has degree >= 1")
        if self.poly.content != 1 or self.poly.leading < 0:
            raise PreconditionError("orbit polynomials are stored primitive with positive leading coefficient")
        if not self.poly.is_squarefree():
            raise PreconditionError(f"{self.poly} is not square-free")

    @classmethod
    def normalize(cls, poly: IntPolynomial) -> "OrbitPolynomial":
        """Primitive square-free part of `poly`."""
        if poly.degree < 1:
            raise PreconditionError("an orbit polynomial has degree >= 1")
        return cls(poly.squarefree_part())

    @classmethod
    def of_point(cls, point: ProjPointQ) -> "OrbitPolynomial":
        return cls(IntPolynomial.linear_from_point(point))

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __str__(self) -> str:
        return str(self.poly)


@dataclass(frozen=True)
class ValuationSpectrum:
    """Root valuations of an orbit polynomial.

    `values` lists the valuations of the nonzero roots (ascending, with
    multiplicity); a root at 0 is counted in `infinite` instead.
    """
    p: int
    values: Tuple[Fraction, ...]
    infinite: int = 0

    def __len__(self) -> int:
        return len(self.values) + self.infinite

    @property
    def total(self) -> Fraction:
        return sum(self.values, Fraction(0))


def valuation_spectrum(g: OrbitPolynomial, p: int) -> ValuationSpectrum:
    """Multiset of v_p(root) over all roots of g, read off the Newton polygon."""
    order = g.poly.root_order_at_zero()
    stripped = IntPolynomial(g.poly.coefficients[order:])
    if stripped.degree == 0:
        return ValuationSpectrum(p=p, values=(), infinite=order)
    polygon = newton_polygon(stripped, p)
    return ValuationSpectrum(p=p, values=polygon.root_valuations(), infinite=order)


# --- Numeric roots and heights -----------------------------------------------

def complex_roots(g: Union[IntPolynomial, OrbitPolynomial], dps: int = 50) -> List[mpmath.mpc]:
    """All complex roots of g, each certified by its Newton residual.

    Uses mpmath.polyroots (Durand-Kerner simultaneous iteration). A root z is
    accepted when |g(z)| / |g'(z)| < 1e-12 * max(1, |z|). Two attempts are made,
    the second with doubled precision and step budget.
    """
    poly = g.poly if isinstance(g, OrbitPolynomial) else g
    if poly.degree < 1:
        raise PreconditionError("complex_roots needs degree >= 1")
    coeffs = [int(c) for c in reversed(poly.coefficients)]
    bits = max(abs(c).bit_length() for c in coeffs)

    attempt_dps = dps
    for attempt in range(2):
        with mpmath.workdps(attempt_dps):
            try:
                roots = mpmath.polyroots(
                    coeffs,
                    maxsteps=max(100, 20 * poly.degree) * (attempt + 1),
                    cleanup=True,
                    extraprec=max(60, 4 * poly.degree + bits),
                )
            except (NoConvergence, ZeroDivisionError) as exc:
                logger.info("polyroots did not converge at %d digits: %s", attempt_dps, exc)
                attempt_dps *= 2
                continue
            if all(_residual_ok(coeffs, z) for z in roots):
                return list(roots)
        logger.info("root residual check failed at %d digits; retrying", attempt_dps)
        attempt_dps *= 2
    raise PrecisionError(f"could not certify the complex roots of a degree-{poly.degree} polynomial")


def _residual_ok(coeffs: Sequence[int], z: mpmath.mpc) -> bool:
    value, slope = mpmath.polyval(coeffs, z, derivative=True)
    if slope == 0:
        return value == 0
    scale = max(mpmath.mpf(1), abs(z))
    return abs(value) / abs(slope) < ROOT_RESIDUAL_TOLERANCE * scale


def mahler_height(g: OrbitPolynomial, dps: int = 50) -> float:
    """(log|lead| + sum log max(1, |z|)) / deg g: the common Weil height of the orbit."""
    if g.degree < 1:
        raise PreconditionError("mahler_height needs degree >= 1")
    roots = complex_roots(g, dps=dps)
    with mpmath.workdps(dps):
        log_moduli = np.array([float(mpmath.log(abs(z))) if z != 0 else -np.inf for z in roots])
    total = math.log(abs(g.poly.leading)) + float(np.sum(np.maximum(log_moduli, 0.0)))
    return total / g.degree


def homogeneous_evaluate(coeffs: Sequence[int], a, b, d: int):
    """sum_i c_i a^i b^(d-i) for a polynomial viewed as a degree-d form.

    Works for Python ints and gmpy2.mpz alike; the caller picks the type.
    """
    b_powers = [1]
    for _ in range(d):
        b_powers.append(b_powers[-1] * b)
    padded = list(coeffs) + [0] * (d + 1 - len(coeffs))
    acc = padded[d]
    for i in range(d - 1, -1, -1):
        acc = acc * a + padded[i] * b_powers[d - i]
    return acc


def primitive_pair(num: Sequence[Fraction], den: Sequence[Fraction]) -> Tuple[IntPolynomial, IntPolynomial]:
    """Scales a pair of rational coefficient lists to coprime-content integers.

    The common scale makes the joint content 1 and the leading coefficient of
    the higher-degree member positive.
    """
    all_coeffs = [Fraction(c) for c in list(num) + list(den)]
    lcm_den = 1
    for c in all_coeffs:
        lcm_den = lcm_den * c.denominator // math.gcd(lcm_den, c.denominator)
    ints_num = [int(Fraction(c) * lcm_den) for c in num]
    ints_den = [int(Fraction(c) * lcm_den) for c in den]
    g = 0
    for c in ints_num + ints_den:
        g = math.gcd(g, c)
    if g == 0:
        raise PreconditionError("primitive_pair: both members are zero")
    n_poly = IntPolynomial(tuple(c // g for c in ints_num))
    d_poly = IntPolynomial(tuple(c // g for c in ints_den))
    lead_ref = n_poly if n_poly.degree >= d_poly.degree else d_poly
    if lead_ref.leading < 0:
        n_poly = IntPolynomial(tuple(-c for c in n_poly.coefficients))
        d_poly = IntPolynomial(tuple(-c for c in d_poly.coefficients))
    return n_poly, d_poly


def fraction_to_str(value: Optional[Fraction]) -> str:
    """Exact "num/den" rendering used in every machine-readable report."""
    if value is None:
        return "inf"
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"
