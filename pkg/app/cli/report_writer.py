# cli/report_writer.py


"""Serializes command reports to stdout or a file.

JSON: exact rationals become "num/den" strings, never floats.
CSV: the report's "rows" list (or the report itself as a single row) goes
through pandas, config columns prefixed with "config.".
"""

import json
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, TextIO

import pandas as pd

from processing.exact_arith import ProjPointQ, fraction_to_str


def _default(value: Any):
    if isinstance(value, Fraction):
        return fraction_to_str(value)
    if isinstance(value, ProjPointQ):
        return str(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if hasattr(value, "value"):  # enums
        return value.value
    return str(value)


def report_rows(report: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Flat rows for tabular output; nested values are JSON-encoded."""
    rows = report.get("rows")
    if rows is None:
        rows = [{k: v for k, v in report.items() if k != "config"}]
    config = report.get("config", {})
    flat = []
    for row in rows:
        record = {}
        for key, value in row.items():
            if isinstance(value, (dict, list, tuple)):
                value = json.dumps(value, default=_default)
            elif not isinstance(value, (int, float, str, bool, type(None))):
                value = _default(value)
            record[key] = value
        for key, value in config.items():
            record[f"config.{key}"] = value
        flat.append(record)
    return flat


def write_report(report: Dict[str, Any], output: str = "json", stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stdout
    if output == "csv":
        pd.DataFrame(report_rows(report)).to_csv(stream, index=False)
    else:
        json.dump(report, stream, indent=2, default=_default)
        stream.write("\n")
