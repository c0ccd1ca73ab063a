# processing/tate_berkovich.py


"""Disk seminorms on the Tate algebra and the skeleton of a Tate curve.

Everything is measured in valuation units (v_p(p) = 1): a disk point (0, r)
with r = p^(-t) is stored by its log-radius t, and the seminorm of a Laurent
series sum b_n X^n at that point is reported as

    min_n ( v(b_n) + n t ),

the valuation form of max_n |b_n| r^n. For the x-coordinate of the Tate
parametrization,

    x(X) = sum_{k>=1} k/(1 - q^k) X^k + sum_{k>=1} k q^k/(1 - q^k) X^(-k) - 2 s1(q),

so on the skeleton 0 < t < v(q) the value is min(t, v(q) - t) (a tent). The
discarded terms beyond X^(+-K) are bounded below by (K + 1) min(t, v(q) - t),
which is what certifies a truncated computation.

Also here: Tate's series for (x(zeta), y(zeta)) and the curve-equation check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple, Union

from processing.errors import PrecisionError, PreconditionError
from processing.exact_arith import int_valuation
from processing.padic_field import PadicNumber, TateModel, s_series

logger = logging.getLogger(__name__)

Valuation = Union[Fraction, float]

DEFAULT_TRUNCATION = 2
MAX_TRUNCATION = 1 << 12
# extra relative digits when an exact zeta is converted
ZETA_GUARD = 8


# --- Disk points and series --------------------------------------------------

@dataclass(frozen=True)
class DiskPoint:
    """The type-II point (0, p^(-t)); only center 0 is supported."""
    t: Fraction
    center: Optional[PadicNumber] = None

    def __post_init__(self):
        object.__setattr__(self, "t", Fraction(self.t))
        if self.center is not None and not self.center.is_zero:
            raise PreconditionError("disk points with a nonzero center are not supported")

    def on_skeleton(self, v_q) -> bool:
        return 0 < self.t < v_q


@dataclass(frozen=True)
class TailBound:
    """Discarded terms X^(+-k), k > order, have valuation >= shift + k min(t, slope - t)."""
    order: int
    slope: Fraction
    shift: Fraction = Fraction(0)

    def at(self, t: Fraction) -> Fraction:
        return self.shift + (self.order + 1) * min(t, self.slope - t)

    def shifted(self, amount) -> "TailBound":
        return TailBound(self.order, self.slope, self.shift + Fraction(amount))


@dataclass(frozen=True, eq=False)
class TateSeriesElement:
    """A truncated Laurent series sum_{|n| <= K} b_n X^n with certified tails."""
    p: int
    coefficients: Tuple[Tuple[int, PadicNumber], ...]
    precision: int
    tails: Tuple[TailBound, ...] = ()
    radius_range: Optional[Tuple[Fraction, Fraction]] = None

    @classmethod
    def from_mapping(cls, p: int, coeffs: Dict[int, PadicNumber], precision: int, **kwargs) -> "TateSeriesElement":
        return cls(p, tuple(sorted(coeffs.items())), precision, **kwargs)

    @classmethod
    def monomial(cls, p: int, n: int, coefficient=1, precision: int = 40) -> "TateSeriesElement":
        c = coefficient if isinstance(coefficient, PadicNumber) else PadicNumber.from_rational(coefficient, p, precision)
        return cls(p, ((n, c),), precision)

    @classmethod
    def constant(cls, p: int, value, precision: int = 40) -> "TateSeriesElement":
        return cls.monomial(p, 0, value, precision)

    @property
    def truncation(self) -> Optional[int]:
        return min((tail.order for tail in self.tails), default=None)

    def coefficient(self, n: int) -> Optional[PadicNumber]:
        for k, c in self.coefficients:
            if k == n:
                return c
        return None

    def as_dict(self) -> Dict[int, PadicNumber]:
        return dict(self.coefficients)

    def tail_bound(self, t: Fraction) -> Valuation:
        return min((tail.at(t) for tail in self.tails), default=math.inf)

    @property
    def tail_valuation_bound(self) -> Valuation:
        """Lower bound of every discarded term over the declared radius range."""
        if not self.tails:
            return math.inf
        if self.radius_range is None:
            raise PreconditionError("no radius range declared for this series")
        low, high = self.radius_range
        return min(self.tail_bound(low), self.tail_bound(high))

    def __add__(self, other: "TateSeriesElement") -> "TateSeriesElement":
        if other.p != self.p:
            raise PreconditionError("series over different primes")
        merged = self.as_dict()
        for n, c in other.coefficients:
            merged[n] = merged[n] + c if n in merged else c
        return TateSeriesElement.from_mapping(
            self.p, merged, min(self.precision, other.precision),
            tails=self.tails + other.tails,
            radius_range=_intersect(self.radius_range, other.radius_range),
        )

    def scale(self, factor) -> "TateSeriesElement":
        """factor * self for a p-adic or exact rational scalar."""
        if not isinstance(factor, PadicNumber):
            factor = PadicNumber.from_rational(factor, self.p, self.precision)
        if factor.is_zero:
            raise PrecisionError("scaling by an element that is zero at its precision")
        return TateSeriesElement(
            self.p,
            tuple((n, c * factor) for n, c in self.coefficients),
            self.precision,
            tails=tuple(tail.shifted(factor.valuation) for tail in self.tails),
            radius_range=self.radius_range,
        )

    def __mul__(self, other: "TateSeriesElement") -> "TateSeriesElement":
        if self.tails or other.tails:
            raise PreconditionError("products are only defined for tail-free series")
        product: Dict[int, PadicNumber] = {}
        for n, c in self.coefficients:
            for k, e in other.coefficients:
                term = c * e
                product[n + k] = product[n + k] + term if n + k in product else term
        return TateSeriesElement.from_mapping(self.p, product, min(self.precision, other.precision))


def _intersect(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return (max(a[0], b[0]), min(a[1], b[1]))


@dataclass(frozen=True)
class SeminormValue:
    """Valuation of a disk seminorm, known to lie in [lower, upper].

    `exact` means lower == upper; `value` is the best known upper end.
    """
    lower: Valuation
    upper: Valuation

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> Valuation:
        return self.upper


def disk_seminorm(s: TateSeriesElement, point: DiskPoint) -> SeminormValue:
    """min_n (v(b_n) + n t), certified against imprecise coefficients and tails."""
    t = point.t
    if s.radius_range is not None and s.tails:
        low, high = s.radius_range
        if not low <= t <= high:
            raise PreconditionError(f"t = {t} is outside the declared radius range [{low}, {high}]")

    candidate: Valuation = math.inf
    floor: Valuation = s.tail_bound(t)
    for n, c in s.coefficients:
        if c.is_zero:
            # only v(b_n) >= absolute precision is known
            floor = min(floor, c.valuation + n * t)
        else:
            candidate = min(candidate, c.valuation + n * t)

    if floor > candidate:
        return SeminormValue(lower=candidate, upper=candidate)
    return SeminormValue(lower=floor, upper=candidate)


# --- The Tate x-series and the skeleton --------------------------------------

def _working_q(M: TateModel) -> PadicNumber:
    return M.q.with_absolute_precision(M.precision + 2 * M.v_q)


@lru_cache(maxsize=64)
def _x_series_coefficients(p: int, q_unit: int, q_valuation: int, q_precision: int, K: int, N: int):
    q = PadicNumber(p, q_valuation, q_unit, q_precision)
    coeffs: Dict[int, PadicNumber] = {}
    power = q
    for k in range(1, K + 1):
        denom = 1 - power
        coeffs[k] = k / denom
        coeffs[-k] = k * power / denom
        power = power * q
    constant = -2 * s_series(1, q, N + q_valuation)
    coeffs[0] = constant
    return tuple(sorted(coeffs.items()))


def tate_x_series(
    M: TateModel,
    K: int,
    radius_range: Optional[Tuple[Fraction, Fraction]] = None,
) -> TateSeriesElement:
    """The x-coordinate of the Tate parametrization as a Laurent series in X, truncated at |n| <= K."""
    if K < 1:
        raise PreconditionError("truncation order K must be >= 1")
    if M.v_q <= 0:
        raise PreconditionError("a Tate parameter needs v(q) > 0")
    q = _working_q(M)
    coeffs = _x_series_coefficients(q.p, q.unit, q.valuation, q.precision, K, M.precision)
    if radius_range is not None:
        low, high = Fraction(radius_range[0]), Fraction(radius_range[1])
        if not 0 < low <= high < M.v_q:
            raise PreconditionError(f"radius range [{low}, {high}] is not inside (0, {M.v_q})")
        radius_range = (low, high)
    return TateSeriesElement(
        p=M.p,
        coefficients=coeffs,
        precision=M.precision,
        tails=(TailBound(order=K, slope=Fraction(M.v_q)),),
        radius_range=radius_range,
    )


def skeleton_val(M: TateModel, t, K: Optional[int] = None) -> Fraction:
    """Seminorm valuation of x at the skeleton point (0, p^(-t)); equals min(t, v(q) - t).

    K is doubled until the truncation certificate holds.
    """
    t = Fraction(t)
    if not 0 < t < M.v_q:
        raise PreconditionError(f"t = {t} is not a skeleton point: need 0 < t < v(q) = {M.v_q}")
    order = K or DEFAULT_TRUNCATION
    point = DiskPoint(t)
    while order <= MAX_TRUNCATION:
        result = disk_seminorm(tate_x_series(M, order), point)
        if result.exact:
            return result.value
        logger.info("skeleton_val: t=%s not certified at K=%d, doubling", t, order)
        order *= 2
    raise PrecisionError(f"could not certify the seminorm at t = {t} with K <= {MAX_TRUNCATION}")


@dataclass(frozen=True)
class BlockEstimates:
    """Valuations of the positive block, the negative block and the constant term."""
    positive: Fraction
    negative: Fraction
    constant: Fraction

    @property
    def bound(self) -> Fraction:
        return min(self.positive, self.negative, self.constant)


def block_valuations(M: TateModel, t) -> BlockEstimates:
    """Block-wise estimates: sum_{k>=1} gives t, sum_{k<=-1} gives v(q) - t, the constant v(2q)."""
    t = Fraction(t)
    if not 0 < t < M.v_q:
        raise PreconditionError(f"t = {t} is not a skeleton point")
    return BlockEstimates(
        positive=t,
        negative=M.v_q - t,
        constant=Fraction(int_valuation(2, M.p) + M.v_q),
    )


def value_group_witnesses(M: TateModel, ts: Iterable, e: int = 1) -> List[Tuple[Fraction, Fraction]]:
    """(t, skeleton_val(t)) pairs whose value is not in (1/e)Z."""
    if e < 1:
        raise PreconditionError("ramification index must be positive")
    witnesses = []
    for t in ts:
        value = skeleton_val(M, t)
        if (value * e).denominator != 1:
            witnesses.append((Fraction(t), value))
    return witnesses


# --- Tate's parametrization --------------------------------------------------

@dataclass(frozen=True, eq=False)
class TatePointCheck:
    x: PadicNumber
    y: PadicNumber
    residual_valuation: int
    doubling_valuation: int

    def to_dict(self) -> dict:
        return {
            "x": repr(self.x),
            "y": repr(self.y),
            "residual_valuation": self.residual_valuation,
            "two_torsion_valuation": self.doubling_valuation,
        }


def _as_padic(value, p: int, precision: int) -> PadicNumber:
    if isinstance(value, PadicNumber):
        return value
    return PadicNumber.from_rational(value, p, precision)


def tate_coordinates(M: TateModel, zeta, precision: int) -> Tuple[PadicNumber, PadicNumber]:
    """(x(zeta), y(zeta)) for 0 <= v(zeta) <= v(q), zeta not in q^Z.

    Terms with n < 0 are rewritten through w = q^m / zeta so that every
    summand is a power series in something of positive valuation:
        u/(1-u)^2 = w/(1-w)^2,   u^2/(1-u)^3 = -w/(1-w)^3   for u = 1/w.
    """
    p = M.p
    zeta = _as_padic(zeta, p, precision + ZETA_GUARD)
    if zeta.is_zero:
        raise PreconditionError("zeta must be nonzero")
    v_zeta = zeta.valuation
    if not 0 <= v_zeta <= M.v_q:
        raise PreconditionError(f"v(zeta) = {v_zeta} is outside [0, v(q)]; reduce it modulo v(q) first")

    q = _working_q(M)
    one_minus = 1 - zeta
    boundary = 1 - q / zeta
    if one_minus.is_zero or boundary.is_zero:
        raise PrecisionError("zeta is the identity of E_q (in q^Z) at this precision")
    guard = 2 * max(0, one_minus.valuation, boundary.valuation) + 2
    absolute = precision + guard

    x = PadicNumber.zero(p, absolute)
    y = PadicNumber.zero(p, absolute)
    # n >= 0
    u = zeta.with_absolute_precision(absolute)
    n = 0
    while n == 0 or u.valuation < absolute:
        denom = 1 - u
        x = x + u / (denom * denom)
        y = y + u * u / (denom * denom * denom)
        u = (u * q).with_absolute_precision(absolute)
        n += 1
        if u.is_zero:
            break
    # n = -m, m >= 1
    w = (q / zeta).with_absolute_precision(absolute)
    while not w.is_zero and w.valuation < absolute:
        denom = 1 - w
        x = x + w / (denom * denom)
        y = y - w / (denom * denom * denom)
        w = (w * q).with_absolute_precision(absolute)

    s1 = s_series(1, q, absolute)
    x = (x - 2 * s1).with_absolute_precision(absolute)
    y = (y + s1).with_absolute_precision(absolute)
    return x, y


def verify_tate_point(M: TateModel, zeta, precision: int) -> TatePointCheck:
    """Evaluates Tate's series at zeta and returns the curve-equation residual valuation.

    The residual y^2 + xy - x^3 - a4 x - a6 should vanish to about `precision`
    digits; the valuation of 2y + x measures how close the point is to 2-torsion.
    """
    zeta_p = _as_padic(zeta, M.p, precision + ZETA_GUARD)
    if zeta_p.is_zero or not 0 <= zeta_p.valuation < M.v_q:
        raise PreconditionError("zeta needs 0 <= v(zeta) < v(q)")
    x, y = tate_coordinates(M, zeta_p, precision)
    residual = y * y + x * y - x * x * x - M.a4 * x - M.a6
    doubling = 2 * y + x
    return TatePointCheck(
        x=x,
        y=y,
        residual_valuation=residual.valuation,
        doubling_valuation=doubling.valuation,
    )
