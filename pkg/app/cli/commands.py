# cli/commands.py


"""One function per subcommand.

Each cmd_* takes already-parsed inputs plus the RunConfig and returns a
report dict: {"command": ..., "config": ..., ...}. Tabular commands add a
"rows" list that the CSV writer uses. Nothing here prints; main.py owns
stdout and exit codes.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from sympy import Poly, ZZ, SympifyError, sympify
from sympy.polys.polyerrors import CoercionFailed, PolynomialError

from cli.settings import RunConfig
from processing.elliptic_lattes import EllipticCurve, classify_reduction, j_invariant, lattes_map, parse_curve
from processing.errors import PreconditionError, ResourceError
from processing.exact_arith import (
    X, IntPolynomial, OrbitPolynomial, ProjPointQ, discriminant, fraction_to_str,
)
from processing.heights import canonical_height, comparison_constants, is_preperiodic
from processing.padic_field import PadicNumber, j_from_q, q_from_j, tate_model
from processing.tate_berkovich import block_valuations, skeleton_val, tate_coordinates, verify_tate_point
from processing.towers import preimage_tower, tower_root_residuals, unramified_certificate, valuation_histogram

logger = logging.getLogger(__name__)

# numeric tower check is skipped above this orbit degree
MAX_RESIDUAL_DEGREE = 64

# report status of a command that ran out of its bit or iteration budget
BUDGET_EXHAUSTED = "budget_exhausted"


def _report(command: str, config: RunConfig, **payload) -> Dict[str, Any]:
    report = {"command": command, "config": config.to_dict()}
    report.update(payload)
    return report


def _curve(curve) -> EllipticCurve:
    return curve if isinstance(curve, EllipticCurve) else parse_curve(curve)


def _point(point) -> ProjPointQ:
    return point if isinstance(point, ProjPointQ) else ProjPointQ.parse(str(point))


def parse_rational(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"not a rational number: {text!r}") from exc


def parse_polynomial(text: str) -> IntPolynomial:
    """Integer polynomial in x, e.g. "x^2 - 3"."""
    try:
        poly = Poly(sympify(text.replace("^", "**")), X, domain=ZZ)
    except (SympifyError, CoercionFailed, PolynomialError, TypeError) as exc:
        raise PreconditionError(f"not an integer polynomial in x: {text!r}") from exc
    return IntPolynomial.from_poly(poly)


def cmd_lattes(curve, m: int, config: RunConfig) -> Dict[str, Any]:
    E = _curve(curve)
    L = lattes_map(E, m)
    payload = L.to_dict()
    payload["resultant"] = str(L.resultant())
    return _report("lattes", config, lattes=payload, rows=[payload])


def cmd_height(curve, m: int, point, config: RunConfig) -> Dict[str, Any]:
    L = lattes_map(_curve(curve), m)
    P = _point(point)
    constants = comparison_constants(L)
    C = constants.value
    orbit = is_preperiodic(L, P, max_iterations=config.max_iterations, constant=C)
    status = "ok"
    try:
        estimate = canonical_height(
            L, P, tol=config.tol, max_bits=config.max_bits,
            max_iterations=config.max_iterations, constant=C,
        )
    except ResourceError as exc:
        if exc.estimate is None:
            raise
        # partial estimate, reported with its larger bound
        logger.warning("height: %s; reporting the partial estimate", exc)
        estimate, status = exc.estimate, BUDGET_EXHAUSTED
    row = {
        "point": str(P),
        "status": status,
        "value": estimate.value,
        "error_bound": estimate.error_bound,
        "iterations_used": estimate.iterations_used,
        "preperiodic": orbit.is_preperiodic,
        "orbit_status": orbit.status,
        "comparison_constant": C,
    }
    return _report("height", config, **row, comparison_upper=constants.upper,
                   comparison_lower=constants.lower, rows=[row])


def cmd_preperiodic(curve, m: int, point, config: RunConfig) -> Dict[str, Any]:
    L = lattes_map(_curve(curve), m)
    P = _point(point)
    result = is_preperiodic(L, P, max_iterations=config.max_iterations)
    row = {"point": str(P), **result.to_dict()}
    return _report("preperiodic", config, **row, rows=[row])


def _tate_model_for(E: EllipticCurve, p: int, precision: int):
    j = j_invariant(E)
    q = q_from_j(j, p, precision)
    return j, q, tate_model(q, precision)


def cmd_skeleton(curve, p: int, ts: Sequence, config: RunConfig) -> Dict[str, Any]:
    E = _curve(curve)
    _, q, model = _tate_model_for(E, p, config.precision)
    rows = []
    witnesses = []
    for t in ts:
        t = parse_rational(t)
        value = skeleton_val(model, t, config.truncation)
        blocks = block_valuations(model, t)
        in_value_group = (value * config.e).denominator == 1
        if not in_value_group:
            witnesses.append(fraction_to_str(t))
        rows.append({
            "t": fraction_to_str(t),
            "val": fraction_to_str(value),
            "block_bound": fraction_to_str(blocks.bound),
            "in_value_group": in_value_group,
        })
    return _report(
        "skeleton", config, curve=str(E), p=p, v_q=model.v_q,
        reduction=classify_reduction(E, p).value, witnesses=witnesses, rows=rows,
    )


def cmd_tate_verify(curve, p: int, zetas: Sequence, config: RunConfig) -> Dict[str, Any]:
    E = _curve(curve)
    _, q, model = _tate_model_for(E, p, config.precision)
    rows = []
    for zeta in zetas:
        zeta = parse_rational(zeta)
        check = verify_tate_point(model, zeta, config.precision)
        zeta_p = PadicNumber.from_rational(zeta, p, config.precision + 8)
        shifted_x, _ = tate_coordinates(model, zeta_p * model.q, config.precision)
        rows.append({
            "zeta": fraction_to_str(zeta),
            "residual_valuation": check.residual_valuation,
            "two_torsion_valuation": check.doubling_valuation,
            "periodicity_valuation": (check.x - shifted_x).valuation,
            "x": repr(check.x),
            "y": repr(check.y),
        })
    return _report("tate-verify", config, curve=str(E), p=p, precision=config.precision, rows=rows)


def cmd_q_from_j(curve, p: int, config: RunConfig, j=None) -> Dict[str, Any]:
    """Tate parameter of a curve (or of an explicit j) with the j(q) roundtrip."""
    if j is None:
        E = _curve(curve)
        j = j_invariant(E)
    j = parse_rational(j)
    q = q_from_j(j, p, config.precision)
    back = j_from_q(q, config.precision)
    roundtrip = back.congruent(j, absolute=config.precision)
    row = {
        "j": fraction_to_str(j),
        "p": p,
        "v_q": q.valuation,
        "q": repr(q),
        "q_digits": str(q.to_integer()),
        "roundtrip_ok": roundtrip,
    }
    return _report("q-from-j", config, **row, rows=[row])


def cmd_tower(curve, p: int, m: int, q0, config: RunConfig) -> Dict[str, Any]:
    E = _curve(curve)
    q0 = _point(q0)
    levels = preimage_tower(
        E, p, m, q0, config.depth, tol=config.tol, e=config.e, dps=config.dps,
        max_bits=config.max_bits, max_iterations=config.max_iterations,
    )
    L = lattes_map(E, m)
    C = comparison_constants(L).value
    rows = []
    for level in levels:
        record = level.to_record()
        record["orbit"] = str(level.orbit)
        record["naive_within_bound"] = level.naive_orbit_height <= level.canonical_height.value + C
        if level.orbit.degree <= MAX_RESIDUAL_DEGREE:
            record["root_residual"] = tower_root_residuals(L, level, q0, dps=config.dps)
        rows.append(record)
    return _report(
        "tower", config, curve=str(E), p=p, m=abs(m), q0=str(q0),
        comparison_constant=C, levels=[level.to_dict() for level in levels], rows=rows,
    )


def cmd_spectrum(poly, p: int, config: RunConfig) -> Dict[str, Any]:
    g = poly if isinstance(poly, OrbitPolynomial) else OrbitPolynomial.normalize(parse_polynomial(poly))
    histogram = valuation_histogram(g, p, config.e)
    row = {
        "polynomial": str(g),
        "discriminant": str(discriminant(g.poly)),
        "unramified_at_p": unramified_certificate(g, p).value,
        **histogram.to_dict(),
    }
    return _report("spectrum", config, **row, rows=[row])


COMMANDS = {
    "lattes": cmd_lattes,
    "height": cmd_height,
    "preperiodic": cmd_preperiodic,
    "skeleton": cmd_skeleton,
    "tate-verify": cmd_tate_verify,
    "q-from-j": cmd_q_from_j,
    "tower": cmd_tower,
    "spectrum": cmd_spectrum,
}
