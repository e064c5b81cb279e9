"""Pointwise string maps of a positive series.

The deformed return ``1 - (a/b)**Q`` is evaluated as
``-expm1(Q * log1p((a - b) / b))``: the difference ``a - b`` is formed
before any rounding of the ratio, so ``Q = 1`` reproduces the plain return
``(b - a) / b`` to a few ulps and ``a == b`` gives exactly zero.
"""

from __future__ import annotations

import numpy as np

from .errors import PositivityError, WindowError


def _values(ts) -> np.ndarray:
    return np.asarray(getattr(ts, "values", ts), dtype=float)


def _sample(v: np.ndarray, i: int) -> float:
    if i < 0 or i >= len(v):
        raise WindowError(f"window out of bounds: index {i} not in [0, {len(v)})")
    x = float(v[i])
    if not x > 0:
        raise PositivityError(f"positivity violated at index {i} (value {x!r})")
    return x


def q_return(a, b, Q: float):
    """``1 - (a / b) ** Q`` for positive ``a``, ``b`` (scalars or arrays).

    Overflow at large ``Q`` propagates as ``-inf``; callers treat
    non-finite results as undefined.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = -np.expm1(Q * np.log1p((a - b) / b))
    out = np.where(a == b, 0.0, out)
    return out if out.ndim else float(out)


def p1_map(ts, tau: int, h: int) -> float:
    """Plain one-end-point map ``(p(tau+h) - p(tau)) / p(tau+h)``."""
    if h < 0:
        raise WindowError("lag must be non-negative")
    v = _values(ts)
    a, b = _sample(v, tau), _sample(v, tau + h)
    return (b - a) / b


def p1_q_map(ts, tau: int, h: int, Q: float) -> float:
    if not Q > 0:
        raise ValueError("Q must be positive")
    if h < 0:
        raise WindowError("lag must be non-negative")
    v = _values(ts)
    return q_return(_sample(v, tau), _sample(v, tau + h), Q)


def p2_q_map(ts, tau: int, h: int, l_s: int, Q: float) -> float:
    """Two-end-point map: product of the deformed trends over
    ``[tau, tau+h]`` and ``[tau+h, tau+l_s]``. Vanishes at ``h = 0`` and
    ``h = l_s``."""
    if not Q > 0:
        raise ValueError("Q must be positive")
    if not 0 <= h <= l_s:
        raise WindowError(f"lag {h} outside [0, {l_s}]")
    v = _values(ts)
    a, m, e = _sample(v, tau), _sample(v, tau + h), _sample(v, tau + l_s)
    return q_return(a, m, Q) * q_return(m, e, Q)
