"""Load daily price series, take log-returns and rank-transform them."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from importlib import resources
from pathlib import Path

import numpy as np

from .stats import PseudoObservations, pseudo_observations

__all__ = [
    "AlignedSeries",
    "IngestError",
    "load_prices",
    "load_pair",
    "align",
    "log_returns",
    "to_pseudo_observations",
    "reference_dataset_path",
    "load_reference_dataset",
]

MIN_ROWS = 3
_MISSING = {"", "na", "nan", "null", "none", "."}


class IngestError(ValueError):
    """Malformed or insufficient input data."""


@dataclass(frozen=True)
class AlignedSeries:
    """Two numeric series on a shared, strictly increasing date index."""

    timestamps: tuple[date, ...]
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if not (len(self.timestamps) == len(self.x) == len(self.y)):
            raise IngestError("timestamps, x and y must have equal lengths")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise IngestError(f"timestamps not strictly increasing at {b.isoformat()}")

    def __len__(self) -> int:
        return len(self.timestamps)


def _parse_float(text: str, where: str) -> float | None:
    s = text.strip()
    if s.lower() in _MISSING:
        return None
    try:
        return float(s)
    except ValueError:
        raise IngestError(f"{where}: cannot parse {text!r} as a number") from None


def _read_columns(path, columns, timestamp_column):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for name in (timestamp_column, *columns):
            if name not in header:
                raise IngestError(f"{path}: no column {name!r} (have {', '.join(header)})")
        out = {}
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            try:
                ts = date.fromisoformat(row[timestamp_column].strip())
            except (ValueError, AttributeError):
                raise IngestError(f"{where}: cannot parse timestamp {row[timestamp_column]!r}") from None
            if ts in out:
                raise IngestError(f"{path}: duplicate timestamp {ts.isoformat()}")
            out[ts] = tuple(_parse_float(row[c] or "", where) for c in columns)
    return out


def _build(rows: dict, source) -> AlignedSeries:
    kept = sorted((ts, v) for ts, v in rows.items() if all(x is not None for x in v))
    if len(kept) < MIN_ROWS:
        raise IngestError(f"{source}: only {len(kept)} usable rows, need at least {MIN_ROWS}")
    ts = tuple(k for k, _ in kept)
    x = np.array([v[0] for _, v in kept])
    y = np.array([v[1] for _, v in kept])
    return AlignedSeries(ts, x, y)


def load_prices(path, column_x: str, column_y: str, timestamp_column: str = "date") -> AlignedSeries:
    """Read two price columns from one CSV with a header row.

    Rows missing either value are dropped; dates must be ISO-8601 and
    unique, and rows are returned in date order.
    """
    return _build(_read_columns(path, (column_x, column_y), timestamp_column), path)


def load_pair(path_x, column_x: str, path_y, column_y: str, timestamp_column: str = "date") -> AlignedSeries:
    """Read one column from each of two files and inner-join on date."""
    left = _read_columns(path_x, (column_x,), timestamp_column)
    right = _read_columns(path_y, (column_y,), timestamp_column)
    joined = {ts: (left[ts][0], right[ts][0]) for ts in left.keys() & right.keys()}
    return _build(joined, f"{path_x} + {path_y}")


def align(a: AlignedSeries, b: AlignedSeries) -> AlignedSeries:
    """Inner join of ``a.x`` and ``b.x`` on shared dates."""
    bx = dict(zip(b.timestamps, b.x))
    rows = {ts: (float(v), float(bx[ts])) for ts, v in zip(a.timestamps, a.x) if ts in bx}
    return _build(rows, "aligned series")


def log_returns(s: AlignedSeries) -> AlignedSeries:
    """Differences of log prices, stamped with the later date."""
    for name, arr in (("x", s.x), ("y", s.y)):
        bad = np.flatnonzero(~(arr > 0))
        if bad.size:
            k = int(bad[0])
            raise IngestError(f"nonpositive price {arr[k]!r} in {name} on {s.timestamps[k].isoformat()}")
    rx = np.array([math.log(b / a) for a, b in zip(s.x, s.x[1:])])
    ry = np.array([math.log(b / a) for a, b in zip(s.y, s.y[1:])])
    return AlignedSeries(s.timestamps[1:], rx, ry)


def to_pseudo_observations(s: AlignedSeries, convention: str = "weibull") -> PseudoObservations:
    """Rank-transform both series; see :func:`mickcopula.stats.pseudo_observations`."""
    return pseudo_observations(s.x, s.y, convention=convention)


def reference_dataset_path() -> Path:
    """Path of the bundled synthetic index-price fixture."""
    return Path(str(resources.files("mickcopula") / "data" / "reference_prices.csv"))


def load_reference_dataset() -> AlignedSeries:
    """Bundled synthetic DJI/SP500-style prices (1636 rows).

    The series are synthetic: they are constructed so that their daily
    log-returns have tau 0.802, rho 0.939 and 5%/1% tail dependences
    (0.827, 0.753, 0.812, 0.937) under the ``rank / (N + 1)`` transform.
    They are not market data.
    """
    return load_prices(reference_dataset_path(), "DJI", "SP500")
