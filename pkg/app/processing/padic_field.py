# processing/padic_field.py


"""p-adic numbers with per-value precision, and the Tate parametrization.

A PadicNumber is unit * p^valuation where the unit is only known modulo
p^precision (relative precision). The "zero at this precision" element has
unit 0, precision 0 and stores its absolute precision in `valuation`.
Arithmetic propagates precision pessimistically; nothing ever claims more
digits than its inputs justify. There is no global precision state.

Tate curve utilities:
 - j_from_q(q): j(q) = (1 + 240 s3(q))^3 / (q prod (1 - q^n)^24)
 - q_from_j(j, p, N): the Tate parameter, by Newton iteration with precision
   doubling on 1/j(q) = q - 744 q^2 + ...
 - tate_model(q, N): a4 = -5 s3(q), a6 = -(5 s3(q) + 7 s5(q)) / 12 for
   y^2 + xy = x^3 + a4 x + a6

The integer q-expansions are produced once per truncation degree with sympy's
ring_series and cached.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple, Union

import gmpy2
from sympy import QQ
from sympy.ntheory import divisor_sigma
from sympy.polys.ring_series import rs_mul, rs_pow, rs_series_inversion
from sympy.polys.rings import ring

from processing.errors import PrecisionError, PreconditionError
from processing.exact_arith import int_valuation

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def vp(x: Rational, p: int) -> Union[int, float]:
    """Additive p-adic valuation of an exact rational, math.inf for 0."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    return int_valuation(x.numerator, p) - int_valuation(x.denominator, p)


@dataclass(frozen=True, eq=False)
class PadicNumber:
    """unit * p^valuation, unit known modulo p^precision."""
    p: int
    valuation: int
    unit: int
    precision: int

    def __post_init__(self):
        if self.precision < 0:
            raise PrecisionError("negative relative precision")
        if self.precision == 0 and self.unit != 0:
            raise PrecisionError("a zero-precision element must have unit 0")
        if self.precision > 0 and self.unit % self.p == 0:
            raise PrecisionError("unit part divisible by p")

    # --- constructors ---

    @classmethod
    def zero(cls, p: int, absolute_precision: int) -> "PadicNumber":
        return cls(p, absolute_precision, 0, 0)

    @classmethod
    def from_rational(cls, x: Rational, p: int, precision: int) -> "PadicNumber":
        """x with `precision` correct relative digits (x = 0 gives zero mod p^precision)."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, precision)
        v = vp(x, p)
        num, den = x.numerator, x.denominator
        if v > 0:
            num //= p ** v
        elif v < 0:
            den //= p ** (-v)
        modulus = p ** precision
        unit = num * int(gmpy2.invert(den, modulus)) % modulus
        return cls(p, v, unit, precision)

    @classmethod
    def from_int(cls, n: int, p: int, precision: int) -> "PadicNumber":
        return cls.from_rational(Fraction(n), p, precision)

    # --- basic properties ---

    @property
    def is_zero(self) -> bool:
        """True when the element is zero at its precision."""
        return self.precision == 0

    @property
    def absolute_precision(self) -> int:
        return self.valuation + self.precision

    def to_integer(self) -> int:
        """Representative in [0, p^absolute_precision) for integral elements."""
        if self.valuation < 0 and not self.is_zero:
            raise PreconditionError("element is not integral")
        if self.is_zero:
            return 0
        return self.unit * self.p ** self.valuation

    def with_absolute_precision(self, absolute: int) -> "PadicNumber":
        """Forgets digits beyond p^absolute (never adds any)."""
        if absolute >= self.absolute_precision:
            return self
        if self.is_zero or absolute <= self.valuation:
            return PadicNumber.zero(self.p, min(absolute, self.absolute_precision))
        keep = absolute - self.valuation
        return PadicNumber(self.p, self.valuation, self.unit % self.p ** keep, keep)

    # --- arithmetic ---

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise PreconditionError("p-adic numbers over different primes")
            return other
        value = Fraction(other)
        if value == 0:
            return PadicNumber.zero(self.p, max(self.absolute_precision, self.precision))
        v = vp(value, self.p)
        digits = max(self.precision, self.absolute_precision - v, 1)
        return PadicNumber.from_rational(value, self.p, digits)

    def __neg__(self) -> "PadicNumber":
        if self.is_zero:
            return self
        return PadicNumber(self.p, self.valuation, (-self.unit) % self.p ** self.precision, self.precision)

    def __add__(self, other) -> "PadicNumber":
        other = self._coerce(other)
        p = self.p
        absolute = min(self.absolute_precision, other.absolute_precision)
        low = min(self.valuation, other.valuation)
        if absolute <= low:
            return PadicNumber.zero(p, absolute)
        total = self.unit * p ** (self.valuation - low) + other.unit * p ** (other.valuation - low)
        span = absolute - low
        total %= p ** span
        if total == 0:
            return PadicNumber.zero(p, absolute)
        shift = int_valuation(total, p)
        keep = span - shift
        return PadicNumber(p, low + shift, (total // p ** shift) % p ** keep, keep)

    __radd__ = __add__

    def __sub__(self, other) -> "PadicNumber":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PadicNumber":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "PadicNumber":
        other = self._coerce(other)
        p = self.p
        if self.is_zero or other.is_zero:
            absolute = min(self.valuation + other.absolute_precision, other.valuation + self.absolute_precision)
            return PadicNumber.zero(p, absolute)
        digits = min(self.precision, other.precision)
        modulus = p ** digits
        return PadicNumber(p, self.valuation + other.valuation, self.unit * other.unit % modulus, digits)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero:
            raise PrecisionError("division by an element that is zero at its precision")
        modulus = self.p ** self.precision
        return PadicNumber(self.p, -self.valuation, int(gmpy2.invert(self.unit, modulus)), self.precision)

    def __truediv__(self, other) -> "PadicNumber":
        other = self._coerce(other)
        if other.is_zero:
            raise PrecisionError("division by an element that is zero at its precision")
        if self.is_zero:
            return PadicNumber.zero(self.p, self.absolute_precision - other.valuation)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "PadicNumber":
        return self._coerce(other) / self

    def __pow__(self, exponent: int) -> "PadicNumber":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self._coerce(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def congruent(self, other, absolute: int = None) -> bool:
        """Equality modulo p^absolute (default: the common precision).

        False when the operands are not both known modulo p^absolute.
        """
        difference = self - self._coerce(other)
        if absolute is None:
            absolute = difference.absolute_precision
        elif difference.absolute_precision < absolute:
            return False
        return difference.is_zero or difference.valuation >= absolute

    def __repr__(self) -> str:
        if self.is_zero:
            return f"O({self.p}^{self.valuation})"
        return f"{self.unit}*{self.p}^{self.valuation} + O({self.p}^{self.absolute_precision})"


# --- integer q-expansions ----------------------------------------------------

def _integral_coefficients(series, degree: int) -> Tuple[int, ...]:
    coeffs = [0] * (degree + 1)
    for monom, coeff in series.terms():
        k = monom[0]
        if k <= degree:
            if coeff.denominator != 1:
                raise PrecisionError("q-expansion coefficient is not integral")
            coeffs[k] = int(coeff.numerator)
    return tuple(coeffs)


@lru_cache(maxsize=None)
def sigma_series(k: int, degree: int) -> Tuple[int, ...]:
    """Coefficients of s_k(q) = sum n^k q^n / (1 - q^n) = sum sigma_k(m) q^m."""
    return (0,) + tuple(int(divisor_sigma(m, k)) for m in range(1, degree + 1))


@lru_cache(maxsize=None)
def inverse_j_series(degree: int) -> Tuple[int, ...]:
    """Coefficients of 1/j(q) = q prod(1 - q^n)^24 / (1 + 240 s3(q))^3 up to q^degree."""
    R, t = ring("t", QQ)
    prec = degree + 1
    product = R(1)
    for n in range(1, degree + 1):
        product = rs_mul(product, rs_pow(1 - t ** n, 24, t, prec), t, prec)
    sigma3 = sigma_series(3, degree)
    eisenstein = R(1) + sum((240 * c * t ** m for m, c in enumerate(sigma3) if c), R(0))
    denominator = rs_series_inversion(rs_pow(eisenstein, 3, t, prec), t, prec)
    series = rs_mul(t * product, denominator, t, prec)
    return _integral_coefficients(series, degree)


def _evaluate_series(coeffs: Sequence[int], q: PadicNumber) -> PadicNumber:
    acc = q._coerce(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * q + c
    return acc


def _series_degree(v_q: int, absolute: int) -> int:
    """Smallest D with (D + 1) * v(q) >= absolute: the dropped tail is below precision."""
    return max(1, -(-absolute // v_q) - 1)


def _require_tate_parameter(q: PadicNumber) -> None:
    if q.is_zero or q.valuation < 1:
        raise PreconditionError("a Tate parameter needs 0 < v(q) < infinity")


def j_from_q(q: PadicNumber, precision: int = None) -> PadicNumber:
    """j(q) = 1/q + 744 + 196884 q + ... evaluated p-adically."""
    _require_tate_parameter(q)
    absolute = q.absolute_precision if precision is None else min(q.absolute_precision, precision + 2 * q.valuation)
    degree = _series_degree(q.valuation, absolute)
    inverse_j = _evaluate_series(inverse_j_series(degree), q).with_absolute_precision(absolute)
    return inverse_j.inverse()


def q_from_j(j: Rational, p: int, precision: int) -> PadicNumber:
    """The Tate parameter q with j(q) = j, correct so that j(q) = j mod p^precision.

    Newton iteration on J(q) = 1/j(q) starting at q0 = 1/j, doubling the
    number of correct digits per step. q is returned with 2 v(q) guard digits
    so that the roundtrip j(q) is known modulo p^precision.
    """
    j = Fraction(j)
    v_j = vp(j, p)
    if v_j >= 0:
        raise PreconditionError(
            f"v_{p}(j) = {v_j} >= 0: no Tate parameter (potential good reduction at {p})"
        )
    w = -v_j
    target = precision + 2 * w
    degree = _series_degree(w, target)
    coeffs = inverse_j_series(degree)
    derivative = tuple(i * c for i, c in enumerate(coeffs))[1:]

    u = PadicNumber.from_rational(1 / j, p, target - w).to_integer()
    q = u
    correct = 2 * w
    while True:
        modulus = p ** min(2 * correct, target) if correct < target else p ** target
        value = _horner_mod(coeffs, q, modulus)
        slope = _horner_mod(derivative, q, modulus)
        q = (q - (value - u) * int(gmpy2.invert(slope, modulus))) % modulus
        logger.debug("q_from_j: %d digits", min(2 * correct, target))
        if correct >= target:
            break
        correct = min(2 * correct, target)

    modulus = p ** target
    if (_horner_mod(coeffs, q, modulus) - u) % modulus != 0:
        raise PrecisionError("Newton iteration for the Tate parameter did not converge")
    result = PadicNumber.from_int(q, p, target - w)
    if result.valuation != w:
        raise PrecisionError("Tate parameter has the wrong valuation")
    return result


def _horner_mod(coeffs: Sequence[int], x: int, modulus: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


# --- Tate models -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TateModel:
    """y^2 + xy = x^3 + a4 x + a6 with a4, a6 given by the Tate series in q."""
    p: int
    q: PadicNumber
    a4: PadicNumber
    a6: PadicNumber
    precision: int

    @property
    def v_q(self) -> int:
        return self.q.valuation

    def j_invariant(self) -> PadicNumber:
        """c4^3 / Delta of the model (a1 = 1, a2 = a3 = 0)."""
        a4, a6 = self.a4, self.a6
        c4 = 1 - 48 * a4
        b8 = a6 - a4 * a4
        delta = -b8 - 64 * a4 ** 3 - 432 * a6 * a6 + 72 * a4 * a6
        return c4 ** 3 / delta


def tate_model(q: PadicNumber, precision: int) -> TateModel:
    """Coefficients a4, a6 of the Tate curve E_q modulo p^precision.

    The series for a6 is divided by 12; for p in {2, 3} that costs v_p(12)
    digits, so the sums are taken with that many guard digits first.
    """
    _require_tate_parameter(q)
    p = q.p
    guard = int_valuation(12, p)
    absolute = precision + guard
    degree = _series_degree(q.valuation, absolute)
    working_q = q.with_absolute_precision(absolute)
    s3 = _evaluate_series(sigma_series(3, degree), working_q).with_absolute_precision(absolute)
    s5 = _evaluate_series(sigma_series(5, degree), working_q).with_absolute_precision(absolute)
    if guard:
        logger.debug("tate_model: %d guard digit(s) for the division by 12 at p=%d", guard, p)
    a4 = (-5 * s3).with_absolute_precision(precision)
    a6 = (-(5 * s3 + 7 * s5) / 12).with_absolute_precision(precision)
    return TateModel(p=p, q=q, a4=a4, a6=a6, precision=precision)


def s_series(k: int, q: PadicNumber, absolute: int) -> PadicNumber:
    """s_k(q) modulo p^absolute."""
    _require_tate_parameter(q)
    degree = _series_degree(q.valuation, absolute)
    return _evaluate_series(sigma_series(k, degree), q.with_absolute_precision(absolute)).with_absolute_precision(absolute)
