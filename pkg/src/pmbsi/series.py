"""Series ingestion, positivity shifting and chronological splitting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from os import PathLike
from typing import BinaryIO, Sequence, TextIO, Union

import numpy as np

from .errors import DataError

Source = Union[bytes, str, BinaryIO, TextIO]

_MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "none", "?"}


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    """Ordered samples plus the provenance needed to undo preprocessing.

    ``raw`` keeps the samples as they were before any positivity shift so
    that :func:`unshift_series` is exact; ``offset`` is the constant that was
    added to obtain ``values``.
    """

    values: np.ndarray
    offset: float = 0.0
    fill_mask: np.ndarray | None = None
    raw: np.ndarray | None = None
    name: str = ""

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError("series must be one-dimensional")
        mask = (np.zeros(len(values), dtype=bool) if self.fill_mask is None
                else np.array(self.fill_mask, dtype=bool))
        if mask.shape != values.shape:
            raise DataError("fill_mask length does not match values")
        raw = values.copy() if self.raw is None else np.array(self.raw, dtype=float)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "fill_mask", _frozen(mask))
        object.__setattr__(self, "raw", _frozen(raw))
        object.__setattr__(self, "offset", float(self.offset))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index):
        return self.values[index]

    def segment(self, start: int, stop: int) -> "TimeSeries":
        """Contiguous sub-series ``[start, stop)`` carrying the same offset."""
        return TimeSeries(self.values[start:stop], self.offset,
                          self.fill_mask[start:stop], self.raw[start:stop], self.name)

    def with_values(self, values: Sequence[float]) -> "TimeSeries":
        """Same provenance, new (e.g. extended) sample vector."""
        values = np.asarray(values, dtype=float)
        return TimeSeries(values, self.offset, None, values - self.offset, self.name)


@dataclass(frozen=True)
class SplitSpec:
    valid_fraction: float
    train_eval_ratio: tuple[float, float] = (6.0, 4.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.valid_fraction < 1.0:
            raise DataError("valid_fraction must lie in (0, 1)")
        a, b = self.train_eval_ratio
        if a <= 0 or b <= 0:
            raise DataError("train_eval_ratio entries must be positive")


def _parse_float(token: str) -> float | None:
    token = token.strip()
    if token.lower() in _MISSING_TOKENS:
        return None
    try:
        x = float(token)
    except ValueError:
        return None
    return x if math.isfinite(x) else None


def _read_text(source: Source | PathLike) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, (str, PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_series(source: Source | PathLike, name: str = "") -> TimeSeries:
    """Parse one-value-per-line CSV text into a gap-filled :class:`TimeSeries`.

    ``source`` may be raw bytes, a binary/text stream or a file path. A
    non-numeric first line is taken as a header. Later blank or non-numeric
    records are missing values, filled by linear interpolation between the
    nearest valid neighbours (nearest value beyond the ends). At least three
    records, two of them observed, are required.
    """
    text = _read_text(source)
    if text.startswith("\ufeff"):
        text = text[1:]
    rows = [row[-1] if row else "" for row in csv.reader(io.StringIO(text))]
    if rows and rows[0].strip() and _parse_float(rows[0]) is None:
        rows = rows[1:]
    # a trailing newline must not count as a missing record
    while rows and not rows[-1].strip():
        rows.pop()
    if not rows:
        raise DataError("empty series")

    parsed = [_parse_float(r) for r in rows]
    mask = np.array([x is None for x in parsed])
    idx = np.flatnonzero(~mask)
    if len(parsed) < 3 or len(idx) < 2:
        raise DataError("series too short")
    known = np.array([parsed[i] for i in idx], dtype=float)
    values = np.interp(np.arange(len(parsed)), idx, known)
    return TimeSeries(values, 0.0, mask, name=name)


def read_series(path: str | PathLike) -> TimeSeries:
    from pathlib import Path

    return load_series(path, name=Path(path).stem)


def dump_series(ts: TimeSeries, keep_gaps: bool = True) -> str:
    """Serialize to the CSV text accepted by :func:`load_series`.

    With ``keep_gaps`` the filled positions are written blank again, so a
    reload reproduces both the values and the fill mask.
    """
    lines = []
    for x, filled in zip(ts.raw, ts.fill_mask):
        lines.append("" if keep_gaps and filled else repr(float(x)))
    return "\n".join(lines) + "\n"


def default_epsilon(values: np.ndarray) -> float:
    span = float(np.max(values) - np.min(values))
    return max(0.1 * span, 1e-6)


def shift_positive(ts: TimeSeries, epsilon: float | None = None) -> TimeSeries:
    """Add a constant so every sample is strictly positive.

    Series that are already positive come back unchanged. The applied
    constant accumulates into ``offset``; ``raw`` is untouched.
    """
    if epsilon is None:
        epsilon = default_epsilon(ts.values)
    if not epsilon > 0:
        raise DataError("epsilon must be positive")
    lo = float(np.min(ts.values))
    if lo > 0:
        return ts
    shift = abs(lo) + epsilon
    return TimeSeries(ts.values + shift, ts.offset + shift, ts.fill_mask, ts.raw, ts.name)


def unshift(forecast, ts: TimeSeries):
    """Map a forecast (scalar or array) back to the original data scale."""
    if isinstance(forecast, (list, tuple)):
        forecast = np.asarray(forecast, dtype=float)
    return forecast - ts.offset


def unshift_series(ts: TimeSeries) -> TimeSeries:
    """Exact inverse of :func:`shift_positive` for the stored samples."""
    return TimeSeries(ts.raw, 0.0, ts.fill_mask, ts.raw, ts.name)


def _floor(x: float) -> int:
    # guards cut points such as 100 * 0.6 = 59.999...
    return int(math.floor(x + 1e-9))


def split_indices(n: int, spec: SplitSpec) -> tuple[int, int]:
    """Return ``(train_end, eval_end)``; validation is ``[eval_end, n)``."""
    eval_end = _floor(n * (1.0 - spec.valid_fraction))
    a, b = spec.train_eval_ratio
    train_end = _floor(eval_end * a / (a + b))
    if train_end <= 0 or eval_end <= train_end or eval_end >= n:
        raise DataError("degenerate split")
    return train_end, eval_end


def split_three(ts: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    train_end, eval_end = split_indices(len(ts), spec)
    return (ts.segment(0, train_end), ts.segment(train_end, eval_end),
            ts.segment(eval_end, len(ts)))
