"""Result rows and their CSV / JSON serialization."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    user: str
    snr_db: float
    rate_bits_per_use: float
    error_rate: float
    ci95_low: float
    ci95_high: float
    trials: int
    errors: int
    wall_seconds: float

    def __post_init__(self):
        if self.user not in ("A", "B"):
            raise ValueError(f"user must be A or B, got {self.user!r}")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate {self.error_rate} outside [0, 1]")


COLUMNS = tuple(f.name for f in dataclasses.fields(ResultRow))
_TYPES = {f.name: f.type for f in dataclasses.fields(ResultRow)}


def _cast(name: str, text: str):
    kind = _TYPES[name]
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in dataclasses.astuple(r)])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected header {header}")
    return [ResultRow(**{k: _cast(k, v) for k, v in zip(COLUMNS, rec)}) for rec in reader if rec]


def rows_to_json(rows) -> str:
    return json.dumps([dataclasses.asdict(r) for r in rows], indent=2)


def rows_from_json(text: str) -> list[ResultRow]:
    return [ResultRow(**obj) for obj in json.loads(text)]


def write_results(rows, path, format: str = "csv") -> None:
    """Write ``rows`` to ``path``; ``path`` of None or "-" means standard output."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    text = rows_to_csv(rows) if format == "csv" else rows_to_json(rows) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    # newline="" keeps the RFC 4180 CRLF line endings intact
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
