# processing/file_handler.py


"""Fixture corpus loading.

Reads the YAML curve corpus and turns each entry into a CurveFixture with a
parsed curve and on-curve generators. Entries are kept in file order so that
batch reports come out in a stable order.

Primary utilities:
 - load_fixtures(path): list of CurveFixture (default: the bundled corpus)
 - fixture_by_name(fixtures, name): lookup with a clear error
 - parse_point(E, text): "x,y" (each a rational) checked against E

Expected YAML shape:
        curves:
          - name: tate_x3_6
            coefficients: "1,0,0,0,6"
            generators: []            # list of "x,y" strings
            tate_primes: [2, 3]
            good_primes: []
            tower: {p: 7, m: 2, q0: "3"}   # optional
"""

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import yaml

from processing.elliptic_lattes import CurvePoint, EllipticCurve, parse_curve, point_on
from processing.errors import PreconditionError

DEFAULT_FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures", "curves.yaml")


@dataclass(frozen=True)
class CurveFixture:
    name: str
    curve: EllipticCurve
    generators: Tuple[CurvePoint, ...] = ()
    tate_primes: Tuple[int, ...] = ()
    good_primes: Tuple[int, ...] = ()
    tower: Optional[Dict[str, Any]] = field(default=None, compare=False, hash=False)
    notes: str = ""


def parse_point(E: EllipticCurve, text: str) -> CurvePoint:
    parts = [part.strip() for part in str(text).split(",")]
    if len(parts) != 2:
        raise PreconditionError(f"a point is written \"x,y\", got {text!r}")
    return point_on(E, Fraction(parts[0]), Fraction(parts[1]))


def load_fixtures(path: Optional[str] = None) -> List[CurveFixture]:
    path = path or DEFAULT_FIXTURES
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as exc:
        raise PreconditionError(f"could not read fixture file {path}: {exc}") from exc
    entries = (data or {}).get("curves", [])
    fixtures = []
    for entry in entries:
        curve = parse_curve(str(entry["coefficients"]))
        fixtures.append(CurveFixture(
            name=str(entry["name"]),
            curve=curve,
            generators=tuple(parse_point(curve, g) for g in entry.get("generators", []) or []),
            tate_primes=tuple(int(p) for p in entry.get("tate_primes", []) or []),
            good_primes=tuple(int(p) for p in entry.get("good_primes", []) or []),
            tower=entry.get("tower"),
            notes=str(entry.get("notes", "")),
        ))
    return fixtures


def fixture_by_name(fixtures: List[CurveFixture], name: str) -> CurveFixture:
    for fixture in fixtures:
        if fixture.name == name:
            return fixture
    raise PreconditionError(f"no fixture named {name!r}; known: {', '.join(f.name for f in fixtures)}")
