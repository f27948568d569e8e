"""Plain-CSV persistence with exact float round-trips."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .metrics import MetricRecord


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_array_csv(path, prefix: str, array: np.ndarray,
                    first_step: int = 1) -> None:
    """Write a (T, d) array as rows ``t, <prefix>0..<prefix>{d-1}``."""
    array = np.atleast_2d(np.asarray(array, dtype=np.float64))
    header = ["t"] + [f"{prefix}{i}" for i in range(array.shape[1])]
    rows = [[first_step + k] + list(array[k]) for k in range(array.shape[0])]
    write_csv(path, header, rows)


def read_array_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_array_csv`: returns (steps, values)."""
    header, rows = read_csv(path)
    if header[0] != "t":
        raise ValueError(f"unexpected header in {path}: {header[:2]}")
    steps = np.array([int(r[0]) for r in rows], dtype=np.intp)
    values = np.array([[float(v) for v in r[1:]] for r in rows])
    if values.size == 0:
        values = values.reshape(0, len(header) - 1)
    return steps, values


def write_metric_records(path, records: list[MetricRecord]) -> None:
    write_csv(path, MetricRecord.CSV_HEADER, [r.to_row() for r in records])


def read_metric_records(path) -> list[MetricRecord]:
    header, rows = read_csv(path)
    if tuple(header) != MetricRecord.CSV_HEADER:
        raise ValueError(f"unexpected metrics header in {path}")
    return [MetricRecord.from_row(r) for r in rows]
