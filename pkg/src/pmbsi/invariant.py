"""The weighted mixed-string invariant and its auxiliary decomposition.

For a window starting at ``tau`` with end sample ``x = p(tau + l_s)``::

    C(tau) = A1 + A3 + A4 + (A2 + A5) / x**Q

where the ``A`` terms only read ``p(tau) .. p(tau + l_s - l_pr)``. Equating
``C`` at two windows ``l_pr`` apart and solving for ``x`` gives the forecast
(see :mod:`pmbsi.predictor`).

All sums over the lag run sequentially in ``h`` so that a window gives the
same bits whether it is evaluated alone or inside a batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError, WindowError
from .stringmap import q_return


@dataclass(frozen=True)
class StringParams:
    l_s: int
    l_pr: int
    eta1: float = 0.0
    eta2: float = 0.0
    Q: float = 1.0

    def __post_init__(self) -> None:
        if int(self.l_s) != self.l_s or int(self.l_pr) != self.l_pr:
            raise ParameterError("l_s and l_pr must be integers")
        object.__setattr__(self, "l_s", int(self.l_s))
        object.__setattr__(self, "l_pr", int(self.l_pr))
        for name in ("eta1", "eta2", "Q"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.l_pr < 1:
            raise ParameterError("l_pr must be a positive integer")
        if self.l_s <= self.l_pr:
            raise ParameterError(f"l_s ({self.l_s}) must exceed l_pr ({self.l_pr})")
        if not (-1 < self.eta1 < 1 and -1 < self.eta2 < 1):
            raise ParameterError("eta1 and eta2 must lie in (-1, 1)")
        if not (self.Q > 0 and np.isfinite(self.Q)):
            raise ParameterError("Q must be positive and finite")

    @property
    def lam(self) -> int:
        """Summation range ``l_s - l_pr``."""
        return self.l_s - self.l_pr

    def as_dict(self) -> dict:
        return {"l_s": self.l_s, "l_pr": self.l_pr, "eta1": self.eta1,
                "eta2": self.eta2, "Q": self.Q}


@dataclass(frozen=True)
class AuxVariables:
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    c_hist: float


@lru_cache(maxsize=None)
def _weight_table(l_s: int, l_pr: int) -> tuple[np.ndarray, float]:
    lam = l_s - l_pr
    w0 = 1.0 / float(np.sum(np.exp(-np.arange(l_s + 1) / lam)))
    h = np.arange(lam + 1)
    w = np.where(h <= l_s / 2.0, 1.0 - w0, w0)
    w.setflags(write=False)
    total = 0.0
    for x in w:
        total += float(x)
    return w, total


def weights(params: StringParams) -> np.ndarray:
    """``W(h)`` for ``h = 0 .. lam`` (read-only, cached per ``(l_s, l_pr)``)."""
    return _weight_table(params.l_s, params.l_pr)[0]


def weight_sum(params: StringParams) -> float:
    return _weight_table(params.l_s, params.l_pr)[1]


def weight(h: int, params: StringParams) -> float:
    """Bimodal weight: ``1 - W0`` up to half the string length, ``W0`` after."""
    if not 0 <= h <= params.lam:
        raise WindowError(f"lag {h} outside [0, {params.lam}]")
    return float(weights(params)[h])


# -- window kernels ---------------------------------------------------------
# ``win`` is a 2-D array, one row per window, column j holding p(tau + j).

def c_windows(win: np.ndarray, params: StringParams) -> np.ndarray:
    """Invariant ``C`` for each row of ``win`` (``l_s + 1`` columns)."""
    w = weights(params)
    base, end, Q = win[:, 0], win[:, params.l_s], params.Q
    acc_rs = np.zeros(len(win))
    acc_r = np.zeros(len(win))
    acc_s = np.zeros(len(win))
    with np.errstate(invalid="ignore", over="ignore"):
        for h in range(params.lam + 1):
            mid = win[:, h]
            r = q_return(base, mid, Q)
            s = q_return(mid, end, Q)
            acc_rs += w[h] * (r * s)
            acc_r += w[h] * r
            acc_s += w[h] * s
        e1, e2 = params.eta1, params.eta2
        return (1 - e1) * (1 - e2) * acc_rs + e1 * (1 - e2) * acc_r + e2 * acc_s


def aux_windows(win: np.ndarray, params: StringParams, scale=None):
    """``A1 .. A5`` for each row of ``win`` (``lam + 1`` columns).

    With ``scale`` given, the ``p**Q`` factors of ``A2``/``A5`` are computed
    for ``p / scale``; the ratio ``(A2 + A5) / x**Q`` is unchanged when ``x``
    is measured in the same unit.
    """
    w = weights(params)
    Q = params.Q
    n = len(win)
    base = win[:, 0]
    unit = win if scale is None else win / np.asarray(scale, dtype=float)[:, None]
    s_r = np.zeros(n)
    s_rp = np.zeros(n)
    s_w = np.zeros(n)
    s_wp = np.zeros(n)
    with np.errstate(invalid="ignore", over="ignore"):
        for h in range(params.lam + 1):
            r = q_return(base, win[:, h], Q)
            pq = np.power(unit[:, h], Q)
            s_r += w[h] * r
            s_rp += w[h] * (r * pq)
            s_w += w[h]
            s_wp += w[h] * pq
        e1, e2 = params.eta1, params.eta2
        k1 = (1 - e1) * (1 - e2)
        return (k1 * s_r, -(k1 * s_rp), e1 * (1 - e2) * s_r, e2 * s_w, -(e2 * s_wp))


# -- public single-window API -----------------------------------------------

def _values(ts) -> np.ndarray:
    return np.asarray(getattr(ts, "values", ts), dtype=float)


def _window(v: np.ndarray, start: int, length: int) -> np.ndarray:
    if start < 0 or start + length > len(v):
        raise WindowError(
            f"window out of bounds: [{start}, {start + length}) not in [0, {len(v)})")
    return v[start:start + length][None, :]


def compute_C(ts, tau: int, params: StringParams) -> float:
    win = _window(_values(ts), tau, params.l_s + 1)
    return float(c_windows(win, params)[0])


def compute_aux(ts, tau_prime: int, params: StringParams) -> AuxVariables:
    """Auxiliaries at ``tau'`` plus ``C`` of the window ``l_pr`` earlier.

    Reads ``p(tau' - l_pr) .. p(tau' + lam)`` only; in particular the sample
    at ``tau' + l_s`` (the one being forecast) is never touched.
    """
    v = _values(ts)
    win = _window(v, tau_prime, params.lam + 1)
    hist = _window(v, tau_prime - params.l_pr, params.l_s + 1)
    a = aux_windows(win, params)
    c_hist = c_windows(hist, params)
    return AuxVariables(*(float(x[0]) for x in a), float(c_hist[0]))


@dataclass(frozen=True)
class DriftStats:
    mean: float
    max: float
    n: int


def invariant_drift(ts, params: StringParams, taus) -> DriftStats:
    """Residual ``|C(tau) - C(tau + l_pr)|`` over a range of window starts."""
    taus = np.asarray(list(taus), dtype=int)
    if taus.size == 0:
        raise ValueError("empty range")
    v = _values(ts)
    if taus.min() < 0 or taus.max() + params.l_pr + params.l_s >= len(v):
        raise WindowError("window out of bounds")
    starts = np.concatenate([taus, taus + params.l_pr])
    win = v[starts[:, None] + np.arange(params.l_s + 1)]
    c = c_windows(win, params)
    d = np.abs(c[: len(taus)] - c[len(taus):])
    return DriftStats(float(np.mean(d)), float(np.max(d)), int(len(d)))
