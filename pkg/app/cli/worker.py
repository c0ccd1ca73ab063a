# cli/worker.py


"""Batch runner over the fixture corpus.

Expands each fixture into independent work items for one command, runs them
(in a process pool when jobs > 1) and collects one row per item in corpus
order, whatever the completion order was.

Per item:
1. Build the command's inputs from the fixture (generators, primes, tower spec).
2. Run the cmd_* function.
3. Record its rows with status "ok", or a single row with status "error"
   and the message; the batch carries on.

A tqdm progress bar goes to stderr.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from tqdm import tqdm

from cli.commands import COMMANDS
from cli.settings import RunConfig
from processing.elliptic_lattes import check_lattes_commutes, generate_points, lattes_map, twisted_abscissa_check
from processing.errors import LattesHeightError
from processing.file_handler import CurveFixture

logger = logging.getLogger(__name__)

SKELETON_TS = ("1/5", "1/3", "2/5", "1/2", "3/5", "4/5")
TATE_ZETAS = ("2", "5", "-2", "4", "7")
SAMPLE_COUNT = 20
BATCH_COMMANDS = ("lattes", "diagram", "height", "preperiodic", "skeleton", "tate-verify", "q-from-j", "tower")


@dataclass(frozen=True)
class BatchItem:
    fixture: str
    command: str
    kwargs: Dict[str, Any] = field(hash=False)


def cmd_diagram(curve, m: int, config: RunConfig, generators=()) -> Dict[str, Any]:
    """Exact Lattès diagram check on group samples plus twisted abscissae."""
    L = lattes_map(curve, m)
    samples = generate_points(curve, list(generators), SAMPLE_COUNT) if generators else []
    group_ok = check_lattes_commutes(L, samples)
    abscissae = [Fraction(k, 3) for k in range(-SAMPLE_COUNT // 2, SAMPLE_COUNT // 2)]
    twisted_ok = all(twisted_abscissa_check(L, x0) for x0 in abscissae)
    row = {
        "m": abs(m),
        "group_samples": len(samples),
        "group_ok": group_ok,
        "twisted_samples": len(abscissae),
        "twisted_ok": twisted_ok,
    }
    return {"command": "diagram", "config": config.to_dict(), **row, "rows": [row]}


_RUNNERS = dict(COMMANDS, diagram=cmd_diagram)


def expand_items(fixtures: List[CurveFixture], command: str, m: int = 2) -> List[BatchItem]:
    """Work items for `command`, in corpus order."""
    if command not in BATCH_COMMANDS:
        raise LattesHeightError(f"batch does not support {command!r}")
    items: List[BatchItem] = []
    for fx in fixtures:
        curve = fx.curve
        if command == "lattes":
            items.append(BatchItem(fx.name, command, {"curve": curve, "m": m}))
        elif command == "diagram":
            items.append(BatchItem(fx.name, command, {"curve": curve, "m": m, "generators": fx.generators}))
        elif command in ("height", "preperiodic"):
            for point in fx.generators:
                items.append(BatchItem(fx.name, command, {"curve": curve, "m": m, "point": point.x_coordinate()}))
        elif command == "skeleton":
            for p in fx.tate_primes:
                items.append(BatchItem(fx.name, command, {"curve": curve, "p": p, "ts": SKELETON_TS}))
        elif command == "tate-verify":
            for p in fx.tate_primes:
                zetas = tuple(z for z in TATE_ZETAS if Fraction(z) % p != 0)
                items.append(BatchItem(fx.name, command, {"curve": curve, "p": p, "zetas": zetas}))
        elif command == "q-from-j":
            for p in fx.tate_primes:
                items.append(BatchItem(fx.name, command, {"curve": curve, "p": p}))
        elif command == "tower" and fx.tower:
            spec = fx.tower
            items.append(BatchItem(fx.name, command, {
                "curve": curve, "p": int(spec["p"]), "m": int(spec.get("m", m)), "q0": str(spec["q0"]),
            }))
    return items


def _run_item(job: Tuple[BatchItem, RunConfig]) -> List[Dict[str, Any]]:
    item, config = job
    base = {"fixture": item.fixture, "command": item.command}
    try:
        report = _RUNNERS[item.command](config=config, **item.kwargs)
    except LattesHeightError as exc:
        logger.warning("batch item %s/%s failed: %s", item.fixture, item.command, exc)
        return [{**base, "status": "error", "error": str(exc)}]
    except Exception as exc:  # keep the batch alive
        logger.exception("batch item %s/%s crashed", item.fixture, item.command)
        return [{**base, "status": "error", "error": f"{type(exc).__name__}: {exc}"}]
    return [{**base, "status": "ok", **row} for row in report.get("rows", [])]


def run_batch(fixtures: List[CurveFixture], command: str, config: RunConfig, m: int = 2) -> Dict[str, Any]:
    items = expand_items(fixtures, command, m)
    jobs = [(item, config) for item in items]
    rows: List[Dict[str, Any]] = []
    progress = tqdm(total=len(jobs), desc=f"batch {command}", unit="item", disable=len(jobs) == 0)
    try:
        if config.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                for item_rows in pool.map(_run_item, jobs):
                    rows.extend(item_rows)
                    progress.update(1)
        else:
            for job in jobs:
                rows.extend(_run_item(job))
                progress.update(1)
    finally:
        progress.close()
    failures = sum(1 for row in rows if row["status"] == "error")
    return {
        "command": "batch",
        "batch_command": command,
        "config": config.to_dict(),
        "items": len(items),
        "failures": failures,
        "rows": rows,
    }
