# processing/elliptic_lattes.py


"""Elliptic curves over Q and the Lattès maps of multiplication by m.

A curve is kept in long Weierstrass form y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6
with exact rational coefficients. The Lattès map f of [m] satisfies

    f(x(P)) = x([m]P)      for every point P,

and is built from division polynomials of the short model
y^2 = x^3 + A x + B, where x_short = x + b2/12, then conjugated back by that
affine shift.

Primary utilities:
 - EllipticCurve / parse_curve: the curve, its invariants and short form
 - ec_add / ec_negate / ec_multiply: chord-tangent group law
 - division_polynomials(A, B, m): (phi_m, psi_m^2) over QQ
 - lattes_map(E, m) -> LattesMap; check_lattes_commutes / twisted_abscissa_check
 - classify_reduction, has_good_reduction, torsion_points
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
from sympy import Poly, QQ, Rational as SymRational
from sympy.ntheory import divisors, factorint

from processing.errors import PreconditionError
from processing.exact_arith import (
    INFINITY, X, IntPolynomial, ProjPointQ, homogeneous_evaluate, primitive_pair,
    reduce_proj, resultant,
)
from processing.padic_field import vp

logger = logging.getLogger(__name__)


# --- Curves ------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q, nonsingular."""
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.discriminant == 0:
            raise PreconditionError(f"singular curve {self}: discriminant is 0")

    @classmethod
    def short(cls, a4, a6) -> "EllipticCurve":
        return cls(0, 0, 0, a4, a6)

    @property
    def coefficients(self) -> Tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def b_invariants(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self) -> Tuple[Fraction, Fraction]:
        b2, b4, b6, _ = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def short_form(self) -> "ShortForm":
        """y^2 = x^3 + A x + B with x_short = x + shift (shift = b2/12)."""
        b2 = self.b_invariants()[0]
        c4, c6 = self.c_invariants()
        return ShortForm(A=-c4 / 48, B=-c6 / 864, shift=b2 / 12)

    def contains(self, point: "CurvePoint") -> bool:
        if point.is_identity:
            return True
        x, y = point.x, point.y
        a1, a2, a3, a4, a6 = self.coefficients
        return y * y + a1 * x * y + a3 * y == x ** 3 + a2 * x * x + a4 * x + a6

    def __str__(self) -> str:
        return ",".join(_fraction_text(c) for c in self.coefficients)


@dataclass(frozen=True)
class ShortForm:
    A: Fraction
    B: Fraction
    shift: Fraction

    @property
    def curve(self) -> EllipticCurve:
        return EllipticCurve.short(self.A, self.B)


def _fraction_text(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def parse_curve(text: str) -> EllipticCurve:
    """Reads "a1,a2,a3,a4,a6" (each an integer or a/b fraction)."""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 5:
        raise PreconditionError(f"curve needs five coefficients a1,a2,a3,a4,a6, got {text!r}")
    try:
        coeffs = [Fraction(part) for part in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"bad curve coefficient in {text!r}: {exc}") from exc
    return EllipticCurve(*coeffs)


def j_invariant(E: EllipticCurve) -> Fraction:
    c4, _ = E.c_invariants()
    return c4 ** 3 / E.discriminant


class ReductionType(str, Enum):
    TATE_DEGENERATE = "tate_degenerate"
    POTENTIAL_GOOD = "potential_good"


def classify_reduction(E: EllipticCurve, p: int) -> ReductionType:
    """Tate-degenerate exactly when j is not p-integral."""
    if vp(j_invariant(E), p) < 0:
        return ReductionType.TATE_DEGENERATE
    return ReductionType.POTENTIAL_GOOD


def has_good_reduction(E: EllipticCurve, p: int) -> bool:
    """v_p(Delta) = 0 on the given (p-integral) model; sufficient, not necessary."""
    if any(vp(c, p) < 0 for c in E.coefficients if c != 0):
        return False
    return vp(E.discriminant, p) == 0


# --- Points and the group law ------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    """Affine point (x, y), or the identity O when both are None."""
    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise PreconditionError("a curve point needs both coordinates or neither")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @classmethod
    def identity(cls) -> "CurvePoint":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self.x is None

    def x_coordinate(self) -> ProjPointQ:
        """x(P) in P^1(Q), with x(O) = infinity."""
        if self.is_identity:
            return INFINITY
        return ProjPointQ.from_fraction(self.x)

    def __str__(self) -> str:
        if self.is_identity:
            return "O"
        return f"({_fraction_text(self.x)}, {_fraction_text(self.y)})"


def point_on(E: EllipticCurve, x, y) -> CurvePoint:
    point = CurvePoint(x, y)
    if not E.contains(point):
        raise PreconditionError(f"{point} is not on the curve {E}")
    return point


def ec_negate(E: EllipticCurve, P: CurvePoint) -> CurvePoint:
    if P.is_identity:
        return P
    return CurvePoint(P.x, -P.y - E.a1 * P.x - E.a3)


def ec_add(E: EllipticCurve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    if P.is_identity:
        return Q
    if Q.is_identity:
        return P
    a1, a2, a3, a4, a6 = E.coefficients
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return CurvePoint.identity()
        denom = 2 * y1 + a1 * x1 + a3
        slope = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / denom
        intercept = (-x1 ** 3 + a4 * x1 + 2 * a6 - a3 * y1) / denom
    else:
        slope = (y2 - y1) / (x2 - x1)
        intercept = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = slope * slope + a1 * slope - a2 - x1 - x2
    y3 = -(slope + a1) * x3 - intercept - a3
    return CurvePoint(x3, y3)


def ec_multiply(E: EllipticCurve, P: CurvePoint, m: int) -> CurvePoint:
    """[m]P by double-and-add; negative m goes through ec_negate."""
    if m < 0:
        return ec_negate(E, ec_multiply(E, P, -m))
    result = CurvePoint.identity()
    addend = P
    while m:
        if m & 1:
            result = ec_add(E, result, addend)
        addend = ec_add(E, addend, addend)
        m >>= 1
    return result


def generate_points(E: EllipticCurve, generators: Sequence[CurvePoint], count: int) -> List[CurvePoint]:
    """Up to `count` distinct non-identity points k*G1 + l*G2 + ... in a fixed order."""
    seen = set()
    points: List[CurvePoint] = []
    frontier = [CurvePoint.identity()]
    while frontier and len(points) < count:
        next_frontier = []
        for base in frontier:
            for G in generators:
                for candidate in (ec_add(E, base, G), ec_add(E, base, ec_negate(E, G))):
                    if candidate.is_identity or candidate in seen:
                        continue
                    seen.add(candidate)
                    points.append(candidate)
                    next_frontier.append(candidate)
                    if len(points) >= count:
                        return points
        frontier = next_frontier
    return points


def torsion_points(E: EllipticCurve) -> List[CurvePoint]:
    """All rational torsion points, O first.

    Nagell-Lutz on the integral model Y^2 = X^3 - 27 c4 u^4 X - 54 c6 u^6 with
    X = u^2 (36 x + 3 b2), Y = u^3 108 (2y + a1 x + a3); every candidate is
    confirmed by [n]P = O for some n <= 12.
    """
    b2 = E.b_invariants()[0]
    c4, c6 = E.c_invariants()
    u = math.lcm(c4.denominator, c6.denominator)
    a = int(-27 * c4 * u ** 4)
    b = int(-54 * c6 * u ** 6)
    disc = 4 * a ** 3 + 27 * b ** 2

    candidates = set()
    for Y in _square_divisor_roots(disc):
        for sign in ((1, -1) if Y else (1,)):
            for X_val in _integer_roots((b - Y * Y, a, 0, 1)):
                candidates.add((X_val, sign * Y))

    found = [CurvePoint.identity()]
    for X_val, Y in sorted(candidates):
        x = (Fraction(X_val, u * u) - 3 * b2) / 36
        y = (Fraction(Y, 108 * u ** 3) - E.a1 * x - E.a3) / 2
        point = CurvePoint(x, y)
        if not E.contains(point):
            continue
        if any(ec_multiply(E, point, n).is_identity for n in range(1, 13)):
            found.append(point)
    return found


def _square_divisor_roots(n: int) -> List[int]:
    """Every y >= 0 with y^2 | n (y = 0 included)."""
    roots = [1]
    for prime, exponent in factorint(abs(n)).items():
        roots = [r * prime ** k for r in roots for k in range(exponent // 2 + 1)]
    return [0] + sorted(roots)


def _integer_roots(coeffs: Sequence[int]) -> List[int]:
    """Integer roots of a monic polynomial, coefficients constant term first."""
    coeffs = list(coeffs)
    roots = []
    shift = 0
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        shift += 1
    if shift:
        roots.append(0)
    if len(coeffs) <= 1:
        return roots
    for d in divisors(abs(coeffs[0])):
        for r in (d, -d):
            if sum(c * r ** i for i, c in enumerate(coeffs)) == 0:
                roots.append(r)
    return roots


# --- Division polynomials ----------------------------------------------------

def division_polynomials(A, B, m: int) -> Tuple[Poly, Poly]:
    """(phi_m, psi_m^2) for y^2 = x^3 + A x + B, as sympy Polys over QQ.

    Uses psi_k = y^(k+1 mod 2) g_k with the usual recursion written for g_k,
    so everything stays a polynomial in x; F = x^3 + A x + B replaces y^2.
    """
    m = abs(m)
    if m < 2:
        raise PreconditionError("division polynomials are built for |m| >= 2")
    A = SymRational(Fraction(A).numerator, Fraction(A).denominator)
    B = SymRational(Fraction(B).numerator, Fraction(B).denominator)
    F = Poly(X ** 3 + A * X + B, X, domain=QQ)
    g = [
        Poly(0, X, domain=QQ),
        Poly(1, X, domain=QQ),
        Poly(2, X, domain=QQ),
        Poly(3 * X ** 4 + 6 * A * X ** 2 + 12 * B * X - A ** 2, X, domain=QQ),
        Poly(4 * (X ** 6 + 5 * A * X ** 4 + 20 * B * X ** 3 - 5 * A ** 2 * X ** 2
                  - 4 * A * B * X - 8 * B ** 2 - A ** 3), X, domain=QQ),
    ]
    F2 = F * F
    for n in range(5, m + 2):
        k = n // 2
        if n % 2:
            if k % 2 == 0:
                g.append(g[k + 2] * g[k] ** 3 * F2 - g[k - 1] * g[k + 1] ** 3)
            else:
                g.append(g[k + 2] * g[k] ** 3 - g[k - 1] * g[k + 1] ** 3 * F2)
        else:
            g.append((g[k] * (g[k + 2] * g[k - 1] ** 2 - g[k - 2] * g[k + 1] ** 2)).quo_ground(2))

    x_poly = Poly(X, X, domain=QQ)
    if m % 2 == 0:
        psi_sq = F * g[m] ** 2
        phi = x_poly * psi_sq - g[m + 1] * g[m - 1]
    else:
        psi_sq = g[m] ** 2
        phi = x_poly * psi_sq - F * g[m + 1] * g[m - 1]
    return phi, psi_sq


def _poly_fractions(poly: Poly) -> List[Fraction]:
    """Coefficients constant term first, as Fractions."""
    return [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]


# --- Lattès maps -------------------------------------------------------------

@dataclass(frozen=True)
class LattesMap:
    """f = N/D on P^1 with f(x(P)) = x([m]P).

    `shift` records the conjugation: the short model lives in x + shift.
    """
    curve: EllipticCurve
    m: int
    numerator: IntPolynomial
    denominator: IntPolynomial
    shift: Fraction

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    def resultant(self) -> int:
        return resultant(self.numerator, self.denominator)

    def apply_lift(self, a: int, b: int) -> Tuple[int, int]:
        """The degree-d forms (N_h(a, b), D_h(a, b)) before gcd removal."""
        d = self.degree
        return (
            homogeneous_evaluate(self.numerator.coefficients, a, b, d),
            homogeneous_evaluate(self.denominator.coefficients, a, b, d),
        )

    def apply(self, point: ProjPointQ) -> ProjPointQ:
        num, den = self.apply_lift(point.a, point.b)
        return reduce_proj(num, den)

    def iterate(self, point: ProjPointQ, n: int) -> ProjPointQ:
        for _ in range(n):
            point = self.apply(point)
        return point

    def apply_complex(self, z):
        """f(z) for an mpmath number; a pole returns mpmath.inf."""
        num = mpmath.polyval(list(reversed(self.numerator.coefficients)), z)
        den = mpmath.polyval(list(reversed(self.denominator.coefficients)), z)
        if den == 0:
            return mpmath.inf
        return num / den

    def to_dict(self) -> dict:
        return {
            "curve": str(self.curve),
            "m": self.m,
            "degree": self.degree,
            "numerator": str(self.numerator),
            "denominator": str(self.denominator),
            "numerator_coefficients": list(self.numerator.coefficients),
            "denominator_coefficients": list(self.denominator.coefficients),
            "conjugation": f"x_short = x + {_fraction_text(self.shift)}",
        }


def lattes_map(E: EllipticCurve, m: int) -> LattesMap:
    """The Lattès map of [m]; depends only on |m| since x o [-1] = x."""
    if abs(m) < 2:
        raise PreconditionError(f"a Lattès map needs |m| >= 2, got m = {m}")
    m = abs(m)
    short = E.short_form()
    phi, psi_sq = division_polynomials(short.A, short.B, m)
    c = SymRational(short.shift.numerator, short.shift.denominator)
    # f(x) = phi(x + c) / psi^2(x + c) - c
    den = psi_sq.shift(c)
    num = phi.shift(c) - den.mul_ground(c)
    numerator, denominator = primitive_pair(_poly_fractions(num), _poly_fractions(den))
    lattes = LattesMap(curve=E, m=m, numerator=numerator, denominator=denominator, shift=short.shift)
    if lattes.degree != m * m or lattes.resultant() == 0:
        raise PreconditionError(f"degenerate Lattès map for m = {m} on {E}")
    logger.debug("lattes_map: m=%d degree=%d", m, lattes.degree)
    return lattes


def check_lattes_commutes(L: LattesMap, samples: Iterable[CurvePoint]) -> bool:
    """True iff f(x(P)) = x([m]P) exactly for every sample."""
    for P in samples:
        if not L.curve.contains(P):
            raise PreconditionError(f"sample {P} is not on the curve")
        expected = ec_multiply(L.curve, P, L.m).x_coordinate()
        if L.apply(P.x_coordinate()) != expected:
            logger.info("Lattès diagram fails at %s", P)
            return False
    return True


def twisted_abscissa_check(L: LattesMap, x0) -> bool:
    """Checks f(x0) = x([m]P) for any rational x0, P possibly defined over Q(sqrt(d)).

    With s = x0 + shift and d = s^3 + A s + B, the point (d s, d^2) lies on
    the twist Y^2 = X^3 + A d^2 X + B d^3, and x-coordinates correspond by
    X = d (x + shift).
    """
    x0 = Fraction(x0)
    short = L.curve.short_form()
    s = x0 + short.shift
    d = s ** 3 + short.A * s + short.B
    if d == 0:
        expected = INFINITY if L.m % 2 == 0 else ProjPointQ.from_fraction(x0)
    else:
        twist = EllipticCurve.short(short.A * d * d, short.B * d ** 3)
        image = ec_multiply(twist, CurvePoint(d * s, d * d), L.m)
        expected = INFINITY if image.is_identity else ProjPointQ.from_fraction(image.x / d - short.shift)
    return L.apply(ProjPointQ.from_fraction(x0)) == expected
