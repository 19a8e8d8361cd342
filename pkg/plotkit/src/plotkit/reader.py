"""Reader for the versioned experiment CSV schema."""

from __future__ import annotations

import csv
from dataclasses import dataclass

SCHEMA = "phaseshadow-csv/1"
COLUMNS = [
    "experiment",
    "n",
    "p_e",
    "mode",
    "N",
    "estimate",
    "stderr",
    "variance",
    "ng_mean",
    "time_ms",
    "seed",
]

_FLOAT_FIELDS = ("p_e", "estimate", "stderr", "variance", "ng_mean", "time_ms")
_INT_FIELDS = ("n", "N", "seed")


@dataclass(frozen=True)
class Row:
    experiment: str
    n: int
    p_e: float
    mode: str
    N: int
    estimate: float
    stderr: float
    variance: float
    ng_mean: float
    time_ms: float
    seed: int


class SchemaError(ValueError):
    pass


def read_rows(path) -> list[Row]:
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# {SCHEMA}":
            raise SchemaError(f"expected '# {SCHEMA}' header, got {first!r}")
        reader = csv.DictReader(fh)
        if reader.fieldnames != COLUMNS:
            raise SchemaError(f"column mismatch: {reader.fieldnames}")
        rows = []
        for rec in reader:
            kwargs = {"experiment": rec["experiment"], "mode": rec["mode"]}
            for key in _FLOAT_FIELDS:
                kwargs[key] = float(rec[key])
            for key in _INT_FIELDS:
                kwargs[key] = int(rec[key])
            rows.append(Row(**kwargs))
    if not rows:
        raise SchemaError("no data rows")
    return rows
