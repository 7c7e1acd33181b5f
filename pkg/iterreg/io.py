"""Input/output operations for iterreg: CSV tables, JSON documents, config files."""

import csv
import json
import logging
from dataclasses import asdict, fields, is_dataclass
from typing import Any, Dict, List, Optional, Sequence

from .errors import ConfigError
from .experiments import SweepRecord
from .problems import DiscreteProblem, problem_to_json

logger = logging.getLogger(__name__)

RECORD_HEADER = ["param", "error", "residual_norm", "solution_norm", "method"]


def format_value(value: Any) -> Any:
    """Floats with 17 significant digits so a CSV round trip is exact."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def _write_csv(header: List[str], rows: Sequence[Sequence[Any]], output_file: str,
               seed: Optional[int]):
    with open(output_file, "w", newline="") as csvfile:
        if seed is not None:
            csvfile.write(f"# seed={seed}\n")
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.debug(f"Wrote {len(rows)} rows to {output_file}")


def save_records_csv(records: Sequence[SweepRecord], output_file: str,
                     seed: Optional[int] = None):
    """Save sweep records, one row per grid point in grid order."""
    rows = [
        (r.parameter, r.error, r.residual_norm, r.solution_norm, r.method) for r in records
    ]
    _write_csv(RECORD_HEADER, rows, output_file, seed)


def save_rows_csv(rows: Sequence[Any], output_file: str, seed: Optional[int] = None):
    """Save a homogeneous list of dataclass rows; the header is the field names."""
    if not rows:
        _write_csv([], [], output_file, seed)
        return
    header = [f.name for f in fields(rows[0])]
    _write_csv(header, [tuple(asdict(row).values()) for row in rows], output_file, seed)


def _jsonable(value: Any) -> Any:
    if is_dataclass(value):
        return {key: _jsonable(item) for key, item in asdict(value).items()}
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


def save_json(rows: Sequence[Any], output_file: str, seed: Optional[int] = None):
    """Save rows as ``{"seed": ..., "rows": [...]}``."""
    document = {"seed": seed, "rows": _jsonable(list(rows))}
    with open(output_file, "w") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    logger.debug(f"Wrote {len(rows)} rows to {output_file}")


def save_problem_json(problem: DiscreteProblem, output_file: str):
    with open(output_file, "w") as f:
        f.write(problem_to_json(problem))
    logger.info(f"Problem {problem.kind} n={problem.n} saved to {output_file}")


def read_config_file(config_file: str) -> Dict[str, Any]:
    """Load a JSON run configuration; it must hold a single object."""
    try:
        with open(config_file, "r") as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError([f"config: cannot read {config_file}: {e}"]) from e
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: {config_file} is not valid JSON: {e}"]) from e
    if not isinstance(document, dict):
        raise ConfigError([f"config: {config_file} must contain a JSON object"])
    return document
