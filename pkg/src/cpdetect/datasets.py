"""Bundled example data and the series-file format used by the CLI.

A series file is a CSV with one observation per row: either a single
``value`` column or ``label,value``.  Lines starting with ``#`` are
comments; a non-numeric first row is treated as a header.  Row order is
time order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class SeriesParseError(ValueError):
    """Malformed series file; the message names the offending line."""


@dataclass(frozen=True)
class TimeSeries:
    """Ordered observations with optional per-point labels (e.g. years)."""

    values: np.ndarray
    labels: tuple | None = None

    def __len__(self) -> int:
        return len(self.values)

    def label_of(self, position: int) -> str:
        """Label of 1-based position; falls back to the position itself."""
        if self.labels is None:
            return str(position)
        return str(self.labels[position - 1])


def _parse_rows(rows, source: str) -> TimeSeries:
    values, labels = [], []
    have_labels = None
    for lineno, row in rows:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        try:
            value = float(cells[-1])
        except ValueError:
            if not values:  # header row
                continue
            raise SeriesParseError(f"{source}:{lineno}: non-numeric value {cells[-1]!r}")
        if not np.isfinite(value):
            raise SeriesParseError(f"{source}:{lineno}: value must be finite")
        row_has_label = len(cells) >= 2
        if have_labels is None:
            have_labels = row_has_label
        elif have_labels != row_has_label:
            raise SeriesParseError(f"{source}:{lineno}: inconsistent column count")
        values.append(value)
        if row_has_label:
            labels.append(cells[0])
    if not values:
        raise SeriesParseError(f"{source}: no observations found")
    return TimeSeries(
        values=np.array(values), labels=tuple(labels) if labels else None
    )


def read_series(path) -> TimeSeries:
    path = Path(path)
    with open(path, newline="") as fh:
        return _parse_rows(enumerate(csv.reader(fh), start=1), str(path))


def read_series_text(text: str, source: str = "<string>") -> TimeSeries:
    return _parse_rows(enumerate(csv.reader(io.StringIO(text)), start=1), source)


def write_series(path, series: TimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if series.labels is not None:
            writer.writerow(["label", "value"])
            for label, v in zip(series.labels, series.values):
                writer.writerow([label, repr(float(v))])
        else:
            writer.writerow(["value"])
            for v in series.values:
                writer.writerow([repr(float(v))])


def nile() -> TimeSeries:
    """Average annual Nile flow at Aswan, 1871-1970 (labels are years)."""
    text = resources.files("cpdetect").joinpath("data/nile.csv").read_text()
    return read_series_text(text, source="nile.csv")
