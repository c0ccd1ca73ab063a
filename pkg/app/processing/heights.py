# processing/heights.py


"""Naive and canonical heights on P^1(Q) for Lattès maps.

Canonical heights are computed as the limit h(f^n(P)) / d^n. Iterates are
kept as coprime integer pairs (gmpy2.mpz) and reduced every step, so the
estimate bundles every place of Q into one exact gcd plus one archimedean log.

The comparison constant C bounds |h(f(P)) - d h(P)| on all of P^1(Q):
 - upper part: log((d + 1) max|coeff|), from the triangle inequality;
 - lower part: log(2 d H), where H bounds the integer cofactors in
   S N + T D = lambda y^(2d-1) (and the same with x and y swapped).
Telescoping gives |hhat(P) - h(f^n(P)) / d^n| <= C / ((d - 1) d^n).

Defaults: tol 1e-6, 64 iterations, 2^25 bits per coordinate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import gmpy2
from sympy import QQ

from processing.elliptic_lattes import LattesMap
from processing.errors import PreconditionError, ResourceError
from processing.exact_arith import IntPolynomial, ProjPointQ, homogeneous_evaluate, reduce_proj

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERATIONS = 64
DEFAULT_MAX_BITS = 2 ** 25

_LOG2 = math.log(2.0)


def _log_abs(n) -> float:
    """log|n| for arbitrarily large integers (ints or mpz)."""
    n = gmpy2.mpz(n)
    if n == 0:
        raise PreconditionError("log of zero")
    n = abs(n)
    bits = gmpy2.bit_length(n)
    shift = max(0, bits - 64)
    return math.log(int(n >> shift)) + shift * _LOG2


def naive_height(P: ProjPointQ) -> float:
    """log max(|a|, |b|) on the normalized representative."""
    return _log_abs(max(abs(P.a), abs(P.b)))


@dataclass(frozen=True)
class HeightEstimate:
    value: float
    error_bound: float
    iterations_used: int

    @property
    def certified_positive(self) -> bool:
        return self.value - self.error_bound > 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_bound": self.error_bound,
            "iterations_used": self.iterations_used,
        }


@dataclass(frozen=True)
class ComparisonConstants:
    upper: float
    lower: float

    @property
    def value(self) -> float:
        return max(self.upper, self.lower)


def _cofactor_height(num: IntPolynomial, den: IntPolynomial) -> int:
    """Max |coeff| of integer S, T with S num + T den = lambda (a nonzero integer)."""
    s, t, h = num.to_poly().set_domain(QQ).gcdex(den.to_poly().set_domain(QQ))
    if h.degree() != 0:
        raise PreconditionError("numerator and denominator share a factor")
    coeffs = s.all_coeffs() + t.all_coeffs()
    scale = 1
    for c in coeffs:
        scale = math.lcm(scale, int(c.q))
    return max(abs(int(c * scale)) for c in coeffs)


def _reversed(poly: IntPolynomial, d: int) -> IntPolynomial:
    """x^d poly(1/x)."""
    padded = list(poly.coefficients) + [0] * (d + 1 - len(poly.coefficients))
    return IntPolynomial(tuple(reversed(padded)))


def comparison_constants(L: LattesMap) -> ComparisonConstants:
    d = L.degree
    if d < 2:
        raise PreconditionError("height comparison needs degree >= 2")
    biggest = max(abs(c) for c in L.numerator.coefficients + L.denominator.coefficients)
    upper = math.log((d + 1) * biggest)

    cofactors = max(
        _cofactor_height(L.numerator, L.denominator),
        _cofactor_height(_reversed(L.numerator, d), _reversed(L.denominator, d)),
    )
    lower = math.log(2 * d * cofactors)
    return ComparisonConstants(upper=upper, lower=lower)


def height_comparison_constant(L: LattesMap) -> float:
    """C with |h(f(P)) - d h(P)| <= C on P^1(Q)."""
    return comparison_constants(L).value


def iterate_orbit(L: LattesMap, P: ProjPointQ, max_bits: Optional[int] = None) -> Iterator[Tuple[gmpy2.mpz, gmpy2.mpz]]:
    """Yields the normalized lifts of P, f(P), f^2(P), ... forever.

    Any common factor of the two forms divides Res(N, D) because the input
    pair is coprime, so the gcd is taken against the resultant.
    """
    d = L.degree
    res = gmpy2.mpz(abs(L.resultant()))
    num_coeffs = [gmpy2.mpz(c) for c in L.numerator.coefficients]
    den_coeffs = [gmpy2.mpz(c) for c in L.denominator.coefficients]
    a, b = gmpy2.mpz(P.a), gmpy2.mpz(P.b)
    while True:
        yield a, b
        if max_bits is not None and max(gmpy2.bit_length(a), gmpy2.bit_length(b)) > max_bits:
            return
        A = homogeneous_evaluate(num_coeffs, a, b, d)
        B = homogeneous_evaluate(den_coeffs, a, b, d)
        g = gmpy2.gcd(gmpy2.gcd(res, A % res), B % res)
        if g > 1:
            A, B = A // g, B // g
        if B < 0 or (B == 0 and A < 0):
            A, B = -A, -B
        a, b = A, B


def canonical_height(
    L: LattesMap,
    P: ProjPointQ,
    tol: float = DEFAULT_TOL,
    max_bits: int = DEFAULT_MAX_BITS,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    constant: Optional[float] = None,
) -> HeightEstimate:
    """hhat_f(P) by iterating the normalized lift.

    The loop stops once C / ((d - 1) d^n) <= tol / d, so the error bound
    is at most tol / d; d * hhat(P) and hhat(f(P)) then agree within 2 tol.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    d = L.degree
    C = height_comparison_constant(L) if constant is None else constant
    target = tol / d

    estimate = None
    for n, (a, b) in enumerate(iterate_orbit(L, P)):
        bits = max(gmpy2.bit_length(a), gmpy2.bit_length(b))
        h = _log_abs(max(abs(a), abs(b)))
        scale = float(d) ** n
        estimate = HeightEstimate(value=h / scale, error_bound=C / ((d - 1) * scale), iterations_used=n)
        if estimate.error_bound <= target:
            return estimate
        if bits > max_bits:
            logger.warning("canonical_height: %d bits after %d iterations exceeds budget %d", bits, n, max_bits)
            raise ResourceError(
                f"coefficient growth exceeded {max_bits} bits after {n} iterations", estimate=estimate
            )
        if n >= max_iterations:
            logger.warning("canonical_height: iteration cap %d reached", max_iterations)
            raise ResourceError(f"iteration cap {max_iterations} reached", estimate=estimate)
    raise AssertionError("iterate_orbit is infinite")


@dataclass(frozen=True)
class WanderingCertificate:
    """An iterate whose naive height exceeds C/(d-1) + 1, so hhat > 0."""
    iterate: int
    height: float
    threshold: float


@dataclass(frozen=True)
class PreperiodicResult:
    status: str
    tail: Optional[int] = None
    cycle: Optional[int] = None
    certificate: Optional[WanderingCertificate] = None
    orbit: Tuple[ProjPointQ, ...] = field(default=(), compare=False)

    @property
    def is_preperiodic(self) -> bool:
        return self.status == "preperiodic"

    def to_dict(self) -> dict:
        out = {"status": self.status, "preperiodic": self.is_preperiodic}
        if self.is_preperiodic:
            out.update(tail=self.tail, cycle=self.cycle, orbit=[str(q) for q in self.orbit])
        if self.certificate is not None:
            out["certificate"] = {
                "iterate": self.certificate.iterate,
                "naive_height": self.certificate.height,
                "threshold": self.certificate.threshold,
            }
        return out


def is_preperiodic(
    L: LattesMap,
    P: ProjPointQ,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    constant: Optional[float] = None,
) -> PreperiodicResult:
    """Exact orbit search in P^1(Q).

    Returns "preperiodic" with (tail, cycle) on the first repetition,
    "wandering" with a height certificate once h(f^k(P)) > C/(d-1) + 1, and
    "inconclusive" when the iteration cap comes first.
    """
    d = L.degree
    C = height_comparison_constant(L) if constant is None else constant
    threshold = C / (d - 1) + 1.0

    seen = {}
    orbit: List[ProjPointQ] = []
    for n, (a, b) in enumerate(iterate_orbit(L, P)):
        point = reduce_proj(int(a), int(b))
        if point in seen:
            first = seen[point]
            return PreperiodicResult("preperiodic", tail=first, cycle=n - first, orbit=tuple(orbit))
        h = naive_height(point)
        if h > threshold:
            return PreperiodicResult(
                "wandering", certificate=WanderingCertificate(iterate=n, height=h, threshold=threshold)
            )
        if n >= max_iterations:
            logger.info("is_preperiodic: no repetition or certificate within %d iterations", max_iterations)
            return PreperiodicResult("inconclusive")
        seen[point] = n
        orbit.append(point)
    raise AssertionError("iterate_orbit is infinite")
