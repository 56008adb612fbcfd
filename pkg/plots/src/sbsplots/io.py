"""CSV ingestion with explicit column validation."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class MissingColumnError(ValueError):
    """A required column is absent from the CSV header."""

    def __init__(self, path, column: str, header: list[str]):
        self.column = column
        super().__init__(
            f"{path}: missing required column {column!r} (header has {header})"
        )


def read_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read the required columns of a CSV into arrays keyed by column name.

    Numeric columns become float arrays; non-numeric columns stay as string
    arrays. Raises on an empty file, a missing column, or ragged rows.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        header = [h.strip() for h in header]
        for column in required:
            if column not in header:
                raise MissingColumnError(path, column, header)
        index = {column: header.index(column) for column in required}
        raw: dict[str, list[str]] = {column: [] for column in required}
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{row_no}: expected {len(header)} fields")
            for column, i in index.items():
                raw[column].append(row[i])
    if not next(iter(raw.values())):
        raise ValueError(f"{path}: no data rows")
    out: dict[str, np.ndarray] = {}
    for column, values in raw.items():
        try:
            out[column] = np.array([float(v) for v in values])
        except ValueError:
            out[column] = np.array(values)
    return out
