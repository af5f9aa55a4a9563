"""Return panels: construction, CSV ingestion and date-bucket splitting.

A panel is an (m, n) float64 matrix of m observation rows (dates, strictly
increasing ISO-8601 strings) by n named columns.  Panels are immutable
after construction; every transformation returns a new panel.
"""

from __future__ import annotations

import csv
import datetime
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DroppedDataWarning

__all__ = [
    "SamplePanel",
    "BucketSplit",
    "ingest_csv",
    "read_wide_csv",
    "write_wide_csv",
    "split_buckets",
    "center",
]


def _check_date(text: str, context: str) -> str:
    try:
        datetime.date.fromisoformat(text)
    except ValueError:
        raise DataError(f"{context}: invalid ISO date {text!r}") from None
    return text


@dataclass(frozen=True)
class SamplePanel:
    """Immutable (m, n) observation matrix with dated rows and named columns."""

    data: np.ndarray
    column_ids: tuple
    row_ids: tuple

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order="C")
        if data.ndim != 2:
            raise DataError(f"panel data must be 2-d, got shape {data.shape}")
        m, n = data.shape
        if m < 2:
            raise DataError(f"panel needs at least 2 rows, got {m}")
        if n < 1:
            raise DataError("panel needs at least 1 column")
        if not np.all(np.isfinite(data)):
            raise DataError("panel data contains non-finite entries")
        columns = tuple(str(c) for c in self.column_ids)
        rows = tuple(str(r) for r in self.row_ids)
        if len(columns) != n:
            raise DataError(f"{len(columns)} column ids for {n} columns")
        if len(rows) != m:
            raise DataError(f"{len(rows)} row ids for {m} rows")
        if len(set(columns)) != n:
            raise DataError("duplicate column ids")
        for r in rows:
            _check_date(r, "row id")
        for a, b in zip(rows, rows[1:]):
            if a >= b:
                raise DataError(f"row dates not strictly increasing at {b!r}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "column_ids", columns)
        object.__setattr__(self, "row_ids", rows)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def column(self, column_id: str) -> np.ndarray:
        try:
            j = self.column_ids.index(column_id)
        except ValueError:
            raise DataError(f"no column {column_id!r} in panel") from None
        return self.data[:, j]

    def with_data(self, data, column_ids=None) -> "SamplePanel":
        """New panel with the same dates and replaced values/columns."""
        return SamplePanel(
            data,
            self.column_ids if column_ids is None else tuple(column_ids),
            self.row_ids,
        )


@dataclass(frozen=True)
class BucketSplit:
    """A panel split into disjoint in-sample and out-of-sample date ranges."""

    in_sample: SamplePanel
    out_sample: SamplePanel

    def __post_init__(self):
        if self.in_sample.column_ids != self.out_sample.column_ids:
            raise DataError("bucket columns differ")
        if self.in_sample.row_ids[-1] >= self.out_sample.row_ids[0]:
            raise DataError("bucket date ranges overlap")


def split_buckets(panel: SamplePanel, boundary_date: str) -> BucketSplit:
    """Split rows at a boundary date: strictly before it vs. on or after.

    The boundary must fall inside the panel's date range so that neither
    bucket is empty.
    """
    boundary = _check_date(str(boundary_date), "boundary")
    n_in = sum(1 for r in panel.row_ids if r < boundary)
    if n_in == 0 or n_in == panel.m:
        raise DataError(
            f"boundary {boundary} leaves an empty bucket "
            f"(panel covers {panel.row_ids[0]} to {panel.row_ids[-1]})"
        )
    return BucketSplit(
        in_sample=SamplePanel(panel.data[:n_in], panel.column_ids, panel.row_ids[:n_in]),
        out_sample=SamplePanel(panel.data[n_in:], panel.column_ids, panel.row_ids[n_in:]),
    )


def center(panel: SamplePanel) -> SamplePanel:
    """Subtract each column's mean."""
    return panel.with_data(panel.data - panel.data.mean(axis=0))


def _open_text(path_or_file, mode="r"):
    if hasattr(path_or_file, "read") or hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, mode, newline=""), True


def ingest_csv(path_or_file, fill_missing: bool = True) -> SamplePanel:
    """Build a panel from long-format CSV rows ``date,symbol,return``.

    The cross product of observed dates and symbols is assembled with
    dates sorted ascending and symbols sorted alphabetically.  Pairs not
    present in the file are filled with 0.0 when ``fill_missing`` is true;
    otherwise symbols with any missing date are dropped (with a warning).
    Duplicate (date, symbol) pairs and unparseable rows are errors.
    """
    handle, owned = _open_text(path_or_file)
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty input file") from None
        if [h.strip().lower() for h in header] != ["date", "symbol", "return"]:
            raise DataError(f"expected header date,symbol,return, got {header!r}")
        values: dict = {}
        dates: set = set()
        symbols: set = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise DataError(f"line {lineno}: expected 3 fields, got {len(row)}")
            date = _check_date(row[0].strip(), f"line {lineno}")
            symbol = row[1].strip()
            if not symbol:
                raise DataError(f"line {lineno}: empty symbol")
            try:
                value = float(row[2])
            except ValueError:
                raise DataError(f"line {lineno}: bad return {row[2]!r}") from None
            if not np.isfinite(value):
                raise DataError(f"line {lineno}: non-finite return {row[2]!r}")
            key = (date, symbol)
            if key in values:
                raise DataError(f"line {lineno}: duplicate row for {symbol} on {date}")
            values[key] = value
            dates.add(date)
            symbols.add(symbol)
    finally:
        if owned:
            handle.close()
    if not values:
        raise DataError("no data rows in input")
    date_list = sorted(dates)
    symbol_list = sorted(symbols)
    if not fill_missing:
        complete = [s for s in symbol_list if all((d, s) in values for d in date_list)]
        dropped = sorted(set(symbol_list) - set(complete))
        if dropped:
            warnings.warn(
                f"dropped {len(dropped)} symbols with missing dates: "
                + ", ".join(dropped[:10])
                + ("..." if len(dropped) > 10 else ""),
                DroppedDataWarning,
                stacklevel=2,
            )
        symbol_list = complete
        if not symbol_list:
            raise DataError("every symbol has missing dates; nothing to ingest")
    data = np.zeros((len(date_list), len(symbol_list)))
    for i, d in enumerate(date_list):
        for j, s in enumerate(symbol_list):
            data[i, j] = values.get((d, s), 0.0)
    return SamplePanel(data, tuple(symbol_list), tuple(date_list))


def read_wide_csv(path_or_file) -> SamplePanel:
    """Read a wide-format panel: header ``date,<sym1>,<sym2>,...``, one row per date."""
    handle, owned = _open_text(path_or_file)
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty input file") from None
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise DataError("wide CSV must start with a 'date' column")
        columns = tuple(h.strip() for h in header[1:])
        rows = []
        dates = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            dates.append(_check_date(row[0].strip(), f"line {lineno}"))
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise DataError(f"line {lineno}: bad numeric field") from None
    finally:
        if owned:
            handle.close()
    if not rows:
        raise DataError("no data rows in input")
    return SamplePanel(np.array(rows), columns, tuple(dates))


def write_wide_csv(panel: SamplePanel, path_or_file) -> None:
    """Write a panel in wide format; floats use repr for exact round-trip."""
    handle, owned = _open_text(path_or_file, "w")
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("date",) + panel.column_ids)
        for i, date in enumerate(panel.row_ids):
            writer.writerow([date] + [repr(v) for v in panel.data[i].tolist()])
    finally:
        if owned:
            handle.close()
