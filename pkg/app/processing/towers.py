# processing/towers.py


"""Preimage towers of a Lattès map and their arithmetic at a prime p.

Starting from a rational, non-preperiodic q0, level n of the tower is the
orbit polynomial of { x : f^n(x) = q0 }. Canonical heights along the tower
are exact multiples of the level-0 value: hhat_f(q_n) = hhat_f(q0) / m^(2n).

Per level the module reports:
 - the orbit polynomial (square-free, primitive)
 - the exact height ratio 1/m^(2n) and the resulting canonical height
 - the Mahler (naive) orbit height
 - an unramifiedness certificate at p (p does not divide the discriminant)
 - the Newton-polygon valuation spectrum at p

valuation_histogram flags which root valuations lie in (1/e)Z.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath
from sympy import Poly

from processing.elliptic_lattes import EllipticCurve, LattesMap, classify_reduction, has_good_reduction, lattes_map, ReductionType
from processing.errors import PreconditionError
from processing.exact_arith import (
    X, IntPolynomial, OrbitPolynomial, ProjPointQ, ValuationSpectrum, complex_roots, discriminant,
    fraction_to_str, mahler_height, valuation_spectrum,
)
from processing.heights import HeightEstimate, canonical_height, height_comparison_constant, is_preperiodic

logger = logging.getLogger(__name__)

# largest orbit degree a tower may reach (m = 2: depth 3, m = 3: depth 2)
MAX_TOWER_DEGREE = 81


class UnramifiedStatus(str, Enum):
    CERTIFIED = "certified"
    INCONCLUSIVE = "inconclusive"


def preimage_polynomial(L: LattesMap, g: OrbitPolynomial) -> OrbitPolynomial:
    """Square-free part of Res_Y(g(Y), N(X) - Y D(X)).

    Up to sign that resultant is D^k g(N/D) = sum_i g_i N^i D^(k-i), k = deg g,
    which is what gets computed.
    """
    coeffs = g.poly.coefficients
    k = len(coeffs) - 1
    N = L.numerator.to_poly()
    D = L.denominator.to_poly()

    n_powers = [Poly(1, X, domain=N.domain)]
    d_powers = [Poly(1, X, domain=D.domain)]
    for _ in range(k):
        n_powers.append(n_powers[-1] * N)
        d_powers.append(d_powers[-1] * D)
    total = Poly(0, X, domain=N.domain)
    for i, c in enumerate(coeffs):
        if c:
            total += (n_powers[i] * d_powers[k - i]).mul_ground(c)

    result = IntPolynomial.from_poly(total)
    if result.degree < 1:
        raise PreconditionError(f"degenerate preimage polynomial for {g} under f (resultant is constant)")
    reduced = result.squarefree_part()
    if reduced.degree < result.degree:
        logger.info("preimage_polynomial: %d colliding preimage(s) removed", result.degree - reduced.degree)
    return OrbitPolynomial(reduced)


def unramified_certificate(g: OrbitPolynomial, p: int) -> UnramifiedStatus:
    """Certified iff p does not divide disc(g).

    When p does not divide lead(g) this is a square-free test of g mod p;
    otherwise the discriminant is computed over ZZ.
    """
    if g.degree == 1:
        return UnramifiedStatus.CERTIFIED
    reduced = Poly(list(reversed(g.poly.coefficients)), X, modulus=p)
    if reduced.degree() != g.degree:
        if discriminant(g.poly) % p:
            return UnramifiedStatus.CERTIFIED
        return UnramifiedStatus.INCONCLUSIVE
    if reduced.gcd(reduced.diff(X)).degree() != 0:
        return UnramifiedStatus.INCONCLUSIVE
    return UnramifiedStatus.CERTIFIED


@dataclass(frozen=True)
class ValuationHistogram:
    p: int
    e: int
    spectrum: ValuationSpectrum
    flags: Tuple[Tuple[Fraction, bool], ...]

    @property
    def violations(self) -> Tuple[Fraction, ...]:
        return tuple(sorted({value for value, member in self.flags if not member}))

    @property
    def all_member(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "e": self.e,
            "values": [fraction_to_str(v) for v in self.spectrum.values],
            "infinite": self.spectrum.infinite,
            "all_member": self.all_member,
            "violations": [fraction_to_str(v) for v in self.violations],
        }


def valuation_histogram(g: OrbitPolynomial, p: int, e: int = 1) -> ValuationHistogram:
    """Root valuations of g at p, each flagged by membership in (1/e)Z."""
    if e < 1:
        raise PreconditionError("ramification index must be a positive integer")
    spectrum = valuation_spectrum(g, p)
    flags = tuple((value, (value * e).denominator == 1) for value in spectrum.values)
    return ValuationHistogram(p=p, e=e, spectrum=spectrum, flags=flags)


@dataclass(frozen=True)
class TowerLevel:
    level: int
    orbit: OrbitPolynomial
    height_ratio: Fraction
    canonical_height: HeightEstimate
    naive_orbit_height: float
    unramified_at_p: UnramifiedStatus
    spectrum: ValuationHistogram

    def to_record(self) -> dict:
        """Flat row for CSV hand-off."""
        return {
            "level": self.level,
            "degree": self.orbit.degree,
            "height_ratio": fraction_to_str(self.height_ratio),
            "canonical_height": self.canonical_height.value,
            "canonical_height_error_bound": self.canonical_height.error_bound,
            "naive_orbit_height": self.naive_orbit_height,
            "unramified_at_p": self.unramified_at_p.value,
            "spectrum": " ".join(fraction_to_str(v) for v in self.spectrum.spectrum.values),
            "spectrum_in_value_group": self.spectrum.all_member,
        }

    def to_dict(self) -> dict:
        out = self.to_record()
        out["orbit"] = str(self.orbit)
        out["spectrum"] = self.spectrum.to_dict()
        return out


def _check_tower_input(E: EllipticCurve, p: int, m: int, q0: ProjPointQ, depth: int) -> None:
    if depth < 0:
        raise PreconditionError("depth must be >= 0")
    if abs(m) ** (2 * depth) > MAX_TOWER_DEGREE:
        raise PreconditionError(f"depth {depth} for m = {m} exceeds the orbit degree cap {MAX_TOWER_DEGREE}")
    if m % p == 0:
        raise PreconditionError(f"p = {p} divides m = {m}")
    if not has_good_reduction(E, p) or classify_reduction(E, p) is not ReductionType.POTENTIAL_GOOD:
        raise PreconditionError(f"the model {E} does not have good reduction at p = {p}")
    if q0.is_infinity:
        raise PreconditionError("q0 must be a finite rational point")


def preimage_tower(
    E: EllipticCurve,
    p: int,
    m: int,
    q0: ProjPointQ,
    depth: int,
    tol: float = 1e-6,
    e: int = 1,
    dps: int = 50,
    max_bits: Optional[int] = None,
    max_iterations: Optional[int] = None,
) -> List[TowerLevel]:
    """Levels 0..depth of the preimage tower of q0 under the Lattès map of [m].

    Needs good reduction at p on the given model, p not dividing m, and a
    q0 that is not preperiodic.
    """
    _check_tower_input(E, p, m, q0, depth)
    L = lattes_map(E, m)
    C = height_comparison_constant(L)

    limits = {}
    if max_iterations is not None:
        limits["max_iterations"] = max_iterations
    orbit_check = is_preperiodic(L, q0, constant=C, **limits)
    if orbit_check.is_preperiodic:
        raise PreconditionError(f"q0 = {q0} is preperiodic (tail {orbit_check.tail}, cycle {orbit_check.cycle})")
    if orbit_check.status == "inconclusive":
        logger.warning("preimage_tower: could not certify that q0 = %s wanders", q0)

    if max_bits is not None:
        limits["max_bits"] = max_bits
    base = canonical_height(L, q0, tol=tol, constant=C, **limits)

    levels: List[TowerLevel] = []
    orbit = OrbitPolynomial.of_point(q0)
    for n in range(depth + 1):
        if n:
            orbit = preimage_polynomial(L, orbit)
        ratio = Fraction(1, L.m ** (2 * n))
        height = HeightEstimate(
            value=base.value * float(ratio),
            error_bound=base.error_bound * float(ratio),
            iterations_used=base.iterations_used,
        )
        levels.append(TowerLevel(
            level=n,
            orbit=orbit,
            height_ratio=ratio,
            canonical_height=height,
            naive_orbit_height=mahler_height(orbit, dps=dps),
            unramified_at_p=unramified_certificate(orbit, p),
            spectrum=valuation_histogram(orbit, p, e),
        ))
        logger.info("preimage_tower: level %d degree %d", n, orbit.degree)
    return levels


def tower_root_residuals(L: LattesMap, level: TowerLevel, q0: ProjPointQ, dps: int = 50) -> float:
    """max |f^n(z) - q0| over the numerically approximated roots z of the level."""
    target = q0.as_fraction()
    if target is None:
        raise PreconditionError("q0 must be finite")
    roots = complex_roots(level.orbit, dps=dps)
    worst = 0.0
    with mpmath.workdps(dps):
        goal = mpmath.mpf(target.numerator) / target.denominator
        for z in roots:
            value = z
            for _ in range(level.level):
                value = L.apply_complex(value)
            worst = max(worst, float(abs(value - goal)))
    return worst
