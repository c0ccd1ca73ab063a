# cli/settings.py


"""Run configuration and logging setup.

A RunConfig is assembled from three layers, lowest priority first:
1. dataclass defaults;
2. a flat JSON settings file (--config PATH), the same shape save_settings writes;
3. flags given on the command line.

Every report embeds RunConfig.to_dict(), so a run can be repeated exactly by
saving its settings (--save-config PATH) and loading them back.
"""

import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from pythonjsonlogger.json import JsonFormatter

from processing.errors import PreconditionError

OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    precision: int = 40
    truncation: Optional[int] = None  # None = auto
    tol: float = 1e-6
    depth: int = 2
    output: str = "json"
    jobs: int = 1
    max_bits: int = 2 ** 25
    max_iterations: int = 64
    e: int = 1
    dps: int = 50
    verbose: bool = False
    log_json: bool = False

    def __post_init__(self):
        if self.output not in OUTPUT_FORMATS:
            raise PreconditionError(f"output must be one of {OUTPUT_FORMATS}, got {self.output!r}")
        if self.precision < 1:
            raise PreconditionError("precision must be >= 1")
        if self.truncation is not None and self.truncation < 1:
            raise PreconditionError("truncation must be >= 1 (or omitted for auto)")
        if self.tol <= 0:
            raise PreconditionError("tol must be positive")
        if self.jobs < 1 or self.e < 1 or self.depth < 0:
            raise PreconditionError("jobs and e must be >= 1, depth >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def updated(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def load_settings(path: str) -> RunConfig:
    """Reads a flat JSON dict; unknown keys are ignored with a warning."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"could not read settings file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise PreconditionError(f"settings file {path} must hold a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        logging.getLogger(__name__).warning("ignoring unknown settings keys: %s", ", ".join(unknown))
    return RunConfig(**{k: v for k, v in data.items() if k in _FIELD_NAMES})


def save_settings(config: RunConfig, path: str) -> None:
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=4)


def build_config(args) -> RunConfig:
    """Defaults, then --config, then explicit flags (argparse leaves unset ones as None)."""
    base = load_settings(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {name: getattr(args, name, None) for name in _FIELD_NAMES}
    # store_true flags only override when set
    for flag in ("verbose", "log_json"):
        if not overrides.get(flag):
            overrides[flag] = None
    return base.updated(**overrides)


def configure_logging(verbose: bool = False, json_logs: bool = False) -> None:
    """One stderr handler on the root logger; stdout stays reserved for reports."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(JsonFormatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
