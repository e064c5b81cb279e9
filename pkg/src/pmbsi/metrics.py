"""Error measures used as GA fitness and in reports.

Two SMAPE variants are provided. ``standard`` divides the absolute error by
the mean of ``|A|`` and ``|F|`` and ranges over [0, 200]. ``literal`` is
``0.5 * |A - F| / (|A| + |F|)`` and can never exceed 50, so it is exactly a
quarter of the standard value; published SMAPE figures above 50 (54.303315,
for instance) are only reachable with the standard definition, which is
therefore the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SMAPE_VARIANTS = ("standard", "literal")

SMAPE_NOTE = (
    "smape uses the standard variant (|A-F| / ((|A|+|F|)/2), range 0-200). "
    "The literal variant 0.5*|A-F|/(|A|+|F|) is capped at 50 and equals "
    "standard/4; reported values above 50 such as 54.303315 are "
    "unattainable under it, hence standard is the default."
)


def _pair(actual, forecast) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(forecast, dtype=float).ravel()
    if a.shape != f.shape:
        raise ValueError(f"length mismatch: {a.size} actual vs {f.size} forecast")
    if a.size == 0:
        raise ValueError("no points to score")
    return a, f


def mae(actual, forecast) -> float:
    a, f = _pair(actual, forecast)
    return float(np.mean(np.abs(a - f)))


def smape(actual, forecast, variant: str = "standard") -> float:
    """Symmetric MAPE in percent; points with ``|A| + |F| = 0`` score 0."""
    a, f = _pair(actual, forecast)
    denom = np.abs(a) + np.abs(f)
    safe = np.where(denom == 0, 1.0, denom)
    ratio = np.where(denom == 0, 0.0, np.abs(a - f) / safe)
    if variant == "standard":
        return float(100.0 * np.mean(2.0 * ratio))
    if variant == "literal":
        return float(100.0 * np.mean(0.5 * ratio))
    raise ValueError(f"unknown smape variant {variant!r}; expected one of {SMAPE_VARIANTS}")


@dataclass(frozen=True)
class ErrorSummary:
    mae: float
    smape: float
    n: int


def summarize(actual, forecast, variant: str = "standard") -> ErrorSummary:
    a, f = _pair(actual, forecast)
    return ErrorSummary(mae(a, f), smape(a, f, variant), int(a.size))
