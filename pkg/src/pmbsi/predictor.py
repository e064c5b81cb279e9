"""Closed-form forecasts, undefined-value fallback, iterated and naive
predictions.

A forecast for ``p(tau0 + l_pr)`` reads the ``l_s + 1`` samples
``p(tau0 - l_s) .. p(tau0)`` and nothing later. Window-batch kernels are
shared by the single-point and the range APIs so both give identical bits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import WindowError
from .invariant import StringParams, aux_windows, c_windows

DENOMINATOR_EPS = 1e-12


class Substitution(str, enum.Enum):
    NONE = "none"
    NAIVE = "naive_fallback"
    LAST_VALID = "last_valid_fallback"


@dataclass(frozen=True)
class Forecast:
    """One forecast of ``p(tau0 + horizon)``.

    ``value`` is ``None`` when the closed form has no real solution and no
    fallback has been applied; ``raw`` keeps the pre-fallback result.
    """

    tau0: int
    horizon: int
    value: float | None
    substituted: Substitution = Substitution.NONE
    raw: float | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


@dataclass
class ForecastRun:
    """Forecasts over a range of origins, after fallback resolution."""

    forecasts: list[Forecast] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.forecasts)

    def __iter__(self):
        return iter(self.forecasts)

    def __getitem__(self, i):
        return self.forecasts[i]

    @property
    def values(self) -> np.ndarray:
        return np.array([f.value for f in self.forecasts], dtype=float)

    @property
    def tau0(self) -> np.ndarray:
        return np.array([f.tau0 for f in self.forecasts], dtype=int)

    @property
    def n_substituted(self) -> int:
        return sum(f.substituted is not Substitution.NONE for f in self.forecasts)

    @property
    def substitution_rate(self) -> float:
        """Fraction of forecasts that needed a fallback (0 for an empty run)."""
        return self.n_substituted / len(self.forecasts) if self.forecasts else 0.0


def forecast_windows(win: np.ndarray, params: StringParams) -> np.ndarray:
    """Raw forecasts for rows of ``win`` (``l_s + 1`` columns ending at tau0).

    Undefined results (vanishing denominator, non-positive ratio, overflow)
    are NaN here; this is internal and never escapes the public API.
    """
    scale = win[:, -1]
    c_hist = c_windows(win, params)
    a1, a2, a3, a4, a5 = aux_windows(win[:, params.l_pr:], params, scale=scale)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        den = c_hist - a1 - a3 - a4
        num = a2 + a5
        ratio = num / den
        ok = (np.abs(den) >= DENOMINATOR_EPS) & np.isfinite(ratio) & (ratio > 0)
        x = scale * np.power(np.where(ok, ratio, 1.0), 1.0 / params.Q)
    ok &= np.isfinite(x)
    return np.where(ok, x, np.nan)


def _values(ts) -> np.ndarray:
    return np.asarray(getattr(ts, "values", ts), dtype=float)


def _check_origin(n: int, tau0: int, params: StringParams) -> None:
    if tau0 - params.l_s < 0 or tau0 >= n:
        raise WindowError(
            f"window out of bounds: origin {tau0} needs indices "
            f"[{tau0 - params.l_s}, {tau0}] within [0, {n})")


def history_windows(v: np.ndarray, tau0s: np.ndarray, l_s: int) -> np.ndarray:
    return v[np.asarray(tau0s, dtype=int)[:, None] - l_s + np.arange(l_s + 1)]


def _as_optional(x: float) -> float | None:
    return float(x) if np.isfinite(x) else None


def predict_one(ts, tau0: int, params: StringParams) -> Forecast:
    v = _values(ts)
    _check_origin(len(v), tau0, params)
    x = forecast_windows(history_windows(v, np.array([tau0]), params.l_s), params)[0]
    value = _as_optional(x)
    return Forecast(tau0, params.l_pr, value, Substitution.NONE, value)


def resolve_fallbacks(raw: np.ndarray, last_inputs: np.ndarray, tau0s, horizon: int) -> ForecastRun:
    """Replace undefined forecasts in time order.

    Horizon 1 falls back to the most recent input. Longer horizons fall
    back to the latest defined forecast of this run, or to the most recent
    input if there is none yet.
    """
    out = []
    last_valid = None
    for tau0, x, last in zip(tau0s, raw, last_inputs):
        if np.isfinite(x):
            last_valid = float(x)
            out.append(Forecast(int(tau0), horizon, float(x), Substitution.NONE, float(x)))
        elif horizon == 1 or last_valid is None:
            out.append(Forecast(int(tau0), horizon, float(last), Substitution.NAIVE, None))
        else:
            out.append(Forecast(int(tau0), horizon, last_valid, Substitution.LAST_VALID, None))
    return ForecastRun(out)


def predict_range(ts, params: StringParams, taus) -> ForecastRun:
    v = _values(ts)
    taus = np.asarray(list(taus), dtype=int)
    for tau0 in taus:
        _check_origin(len(v), int(tau0), params)
    if taus.size == 0:
        return ForecastRun()
    raw = forecast_windows(history_windows(v, taus, params.l_s), params)
    return resolve_fallbacks(raw, v[taus], taus, params.l_pr)


def iterate_windows(win: np.ndarray, params: StringParams, steps: int):
    """Run a one-step model ``steps`` times on each row, feeding forecasts
    back as history. Undefined steps fall back to the latest sample.

    Returns the final values and a per-row flag telling whether any step
    needed the fallback.
    """
    if params.l_pr != 1:
        raise ValueError("iterated prediction needs a one-step model (l_pr = 1)")
    if steps < 1:
        raise ValueError("steps must be positive")
    win = np.array(win, dtype=float)
    substituted = np.zeros(len(win), dtype=bool)
    for _ in range(steps):
        x = forecast_windows(win, params)
        bad = ~np.isfinite(x)
        substituted |= bad
        x = np.where(bad, win[:, -1], x)
        win = np.concatenate([win[:, 1:], x[:, None]], axis=1)
    return win[:, -1], substituted


def iterated_predict(ts, params_1step: StringParams, tau0: int, steps: int) -> Forecast:
    """Forecast ``p(tau0 + steps)`` by chaining one-step forecasts."""
    v = _values(ts)
    _check_origin(len(v), tau0, params_1step)
    win = history_windows(v, np.array([tau0]), params_1step.l_s)
    x, sub = iterate_windows(win, params_1step, steps)
    flag = Substitution.NAIVE if sub[0] else Substitution.NONE
    return Forecast(tau0, steps, float(x[0]), flag, None if sub[0] else float(x[0]))


def iterated_range(ts, params_1step: StringParams, taus, steps: int) -> ForecastRun:
    v = _values(ts)
    taus = np.asarray(list(taus), dtype=int)
    for tau0 in taus:
        _check_origin(len(v), int(tau0), params_1step)
    if taus.size == 0:
        return ForecastRun()
    x, sub = iterate_windows(history_windows(v, taus, params_1step.l_s), params_1step, steps)
    return ForecastRun([
        Forecast(int(t), steps, float(xi),
                 Substitution.NAIVE if s else Substitution.NONE, None if s else float(xi))
        for t, xi, s in zip(taus, x, sub)
    ])


def naive_forecast(ts, tau0: int, l_pr: int = 1) -> float:
    """Persistence forecast: the value at ``tau0`` for any horizon."""
    v = _values(ts)
    if not 0 <= tau0 < len(v):
        raise WindowError(f"index {tau0} out of bounds")
    return float(v[tau0])


@dataclass
class SegmentForecast:
    """Forecasts for every target index of ``[start, stop)`` in a series."""

    targets: np.ndarray
    actual: np.ndarray
    run: ForecastRun

    @property
    def forecast(self) -> np.ndarray:
        return self.run.values


def segment_targets(start: int, stop: int, horizon: int, l_s: int) -> np.ndarray:
    """Target indices in ``[start, stop)`` whose origin has full history."""
    t = np.arange(start, stop)
    return t[t - horizon - l_s >= 0]


def forecast_segment(ts, params: StringParams, start: int, stop: int,
                     mode: str = "direct", steps: int | None = None) -> SegmentForecast:
    """Forecast each target in ``[start, stop)`` from origin ``target - h``.

    ``mode="direct"`` uses ``h = params.l_pr``; ``mode="iterated"`` chains
    the one-step ``params`` over ``h = steps``. History before ``start`` is
    used freely; nothing past an origin is read.
    """
    v = _values(ts)
    if mode == "direct":
        h = params.l_pr
        targets = segment_targets(start, stop, h, params.l_s)
        run = predict_range(v, params, targets - h)
    elif mode == "iterated":
        h = int(steps or 1)
        targets = segment_targets(start, stop, h, params.l_s)
        run = iterated_range(v, params, targets - h, h)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SegmentForecast(targets, v[targets], run)


def naive_segment(ts, start: int, stop: int, horizon: int) -> SegmentForecast:
    v = _values(ts)
    targets = np.arange(max(start, horizon), stop)
    run = ForecastRun([Forecast(int(t - horizon), horizon, float(v[t - horizon]))
                       for t in targets])
    return SegmentForecast(targets, v[targets], run)
