"""Experiment protocols behind the CLI: fit, evaluate, predict, scan, bench.

Every report carries the forecast and actual vectors it was computed from,
on the original (unshifted) data scale, so each printed metric can be
recomputed from the report alone.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, metrics
from .datasets import NN5_PMBSI_REFERENCE, NN5_REFERENCE, nn5_rank
from .errors import DataError, NumericalError, ParameterError
from .ga import GAConfig, evolve
from .invariant import StringParams
from .predictor import forecast_segment, iterate_windows, history_windows, naive_segment, \
    forecast_windows, resolve_fallbacks
from .series import SplitSpec, TimeSeries, shift_positive, split_indices

MODES = ("direct", "iterated")


def _floats(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float)]


def segment_report(seg, offset: float, variant: str) -> dict:
    """Metrics plus the vectors they come from, unshifted."""
    if seg.targets.size == 0:
        return {"mae": None, "smape": None, "n": 0, "nan_pct": 0.0,
                "targets": [], "actual": [], "forecast": []}
    actual = seg.actual - offset
    forecast = seg.forecast - offset
    if not np.all(np.isfinite(forecast)):
        raise NumericalError("non-finite forecast after fallback resolution")
    return {
        "mae": metrics.mae(actual, forecast),
        "smape": metrics.smape(actual, forecast, variant),
        "n": int(seg.targets.size),
        "nan_pct": 100.0 * seg.run.substitution_rate,
        "targets": [int(t) for t in seg.targets],
        "actual": _floats(actual),
        "forecast": _floats(forecast),
    }


def adjust_bounds(config: GAConfig, horizon: int) -> tuple[GAConfig, bool]:
    """Slide the ``l_s`` bound above the horizon when it lies entirely below.

    The width of the interval is kept, e.g. ``[2, 50]`` becomes
    ``[57, 105]`` for a 56-step horizon.
    """
    lo, hi = config.bounds["l_s"]
    if hi > horizon:
        return config, False
    new = (float(horizon + 1), float(horizon + 1) + (hi - lo))
    return replace(config, bounds={**config.bounds, "l_s": new}), True


def ga_config_dict(config: GAConfig) -> dict:
    return {
        "population_size": config.population_size,
        "tournament_size": config.tournament_size,
        "elite_fraction": config.elite_fraction,
        "n_elite": config.n_elite,
        "stop_no_progress": config.stop_no_progress,
        "mutation_rate_initial": config.mutation_rate_initial,
        "mutation_probability": config.mutation_probability,
        "min_train_forecasts": config.min_train_forecasts,
        "max_generations": config.max_generations,
        "bounds": {k: list(v) for k, v in config.bounds.items()},
        "seed": config.seed,
    }


def _trace_summary(trace) -> dict:
    out = trace.summary()
    out["champion_generation"] = int(np.argmin(trace.eval_mae))
    return out


@dataclass
class FittedModel:
    params: StringParams
    offset: float
    bounds: dict
    seed: int
    mode: str = "direct"

    def to_dict(self) -> dict:
        return {
            "tool": "pmbsi",
            "version": __version__,
            "params": self.params.as_dict(),
            "mode": self.mode,
            "offset": self.offset,
            "bounds": {k: list(v) for k, v in self.bounds.items()},
            "seed": self.seed,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "FittedModel":
        try:
            d = json.loads(Path(path).read_text())
            p = d["params"]
            params = StringParams(p["l_s"], p["l_pr"], p["eta1"], p["eta2"], p["Q"])
            bounds = {k: tuple(v) for k, v in d.get("bounds", {}).items()}
            return cls(params, float(d["offset"]), bounds, int(d.get("seed", 0)),
                       d.get("mode", "direct"))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid model file {path}: {exc}") from exc


def prepare(ts: TimeSeries, epsilon: float | None = None) -> TimeSeries:
    return shift_positive(ts, epsilon)


def fit(ts: TimeSeries, horizons, split: SplitSpec, config: GAConfig,
        mode: str = "direct", variant: str = "standard", epsilon: float | None = None):
    """Shift, split, evolve per horizon and score evaluation/validation.

    Returns ``(report, models)`` where ``models`` maps horizon to
    :class:`FittedModel`. In iterated mode a single one-step model is
    evolved and chained for every horizon.
    """
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}")
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    shifted = prepare(ts, epsilon)
    train_end, eval_end = split_indices(len(shifted), split)
    n = len(shifted)
    v = shifted.values

    results = []
    models = {}
    cache = {}
    for h in horizons:
        h = int(h)
        if h < 1:
            raise ParameterError("horizons must be >= 1")
        model_h = 1 if mode == "iterated" else h
        if model_h not in cache:
            cfg, adjusted = adjust_bounds(config, model_h)
            params, trace = evolve(v[:train_end], v[train_end:eval_end], model_h, cfg)
            cache[model_h] = (params, trace, cfg, adjusted)
        params, trace, cfg, adjusted = cache[model_h]
        steps = h if mode == "iterated" else None
        ev = forecast_segment(v, params, train_end, eval_end, mode, steps)
        va = forecast_segment(v, params, eval_end, n, mode, steps)
        naive = naive_segment(v, eval_end, n, h)
        models[h] = FittedModel(params, shifted.offset,
                                cfg.feasible_for(model_h, train_end).bounds, config.seed, mode)
        results.append({
            "horizon": h,
            "mode": mode,
            "params": params.as_dict(),
            "l_s_bounds_adjusted": adjusted,
            "evaluation": segment_report(ev, shifted.offset, variant),
            "validation": segment_report(va, shifted.offset, variant),
            "naive_validation": segment_report(naive, shifted.offset, variant),
            "ga": _trace_summary(trace),
        })

    report = {
        "tool": "pmbsi",
        "version": __version__,
        "command": "fit",
        "input": ts.name,
        "seed": config.seed,
        "mode": mode,
        "smape_variant": variant,
        "smape_note": metrics.SMAPE_NOTE,
        "offset": shifted.offset,
        "split": {
            "valid_fraction": split.valid_fraction,
            "train_eval_ratio": list(split.train_eval_ratio),
            "train": [0, train_end],
            "evaluation": [train_end, eval_end],
            "validation": [eval_end, n],
        },
        "ga_config": ga_config_dict(config),
        "horizons": results,
        "run": {
            "timestamp": started.isoformat(),
            "elapsed_s": time.perf_counter() - t0,
        },
    }
    return report, models


def _apply_model_offset(ts: TimeSeries, model: FittedModel) -> TimeSeries:
    shifted = TimeSeries(ts.values + model.offset, model.offset, ts.fill_mask, ts.raw, ts.name)
    return shift_positive(shifted) if np.min(shifted.values) <= 0 else shifted


def evaluate(ts: TimeSeries, model: FittedModel, split: SplitSpec,
             steps: int | None = None, variant: str = "standard") -> dict:
    """Score a stored model on the evaluation and validation segments."""
    shifted = _apply_model_offset(ts, model)
    train_end, eval_end = split_indices(len(shifted), split)
    v = shifted.values
    if model.mode == "iterated" or (steps and steps > 1 and model.params.l_pr == 1):
        mode, k = "iterated", int(steps or 1)
    else:
        mode, k = "direct", None
    ev = forecast_segment(v, model.params, train_end, eval_end, mode, k)
    va = forecast_segment(v, model.params, eval_end, len(v), mode, k)
    return {
        "tool": "pmbsi",
        "version": __version__,
        "command": "evaluate",
        "input": ts.name,
        "mode": mode,
        "params": model.params.as_dict(),
        "smape_variant": variant,
        "smape_note": metrics.SMAPE_NOTE,
        "offset": shifted.offset,
        "evaluation": segment_report(ev, shifted.offset, variant),
        "validation": segment_report(va, shifted.offset, variant),
    }


def predict_ahead(ts: TimeSeries, model: FittedModel, steps: int) -> np.ndarray:
    """Forecast the ``steps`` samples following the end of ``ts``.

    A direct model of horizon ``H`` covers up to ``H`` steps (origin
    ``n - H + k`` for the k-th value); a one-step model is iterated.
    """
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    shifted = _apply_model_offset(ts, model)
    v = shifted.values
    p = model.params
    n = len(v)
    if n < p.l_s + 1:
        raise DataError(f"series has {n} samples; the model needs at least {p.l_s + 1}")
    if p.l_pr == 1:
        win = history_windows(v, np.array([n - 1]), p.l_s)
        out = []
        for k in range(1, steps + 1):
            x, _ = iterate_windows(win, p, 1)
            out.append(x[0])
            win = np.concatenate([win[:, 1:], x[:, None]], axis=1)
        values = np.array(out)
    else:
        if steps > p.l_pr:
            raise ParameterError(
                f"a direct {p.l_pr}-step model can emit at most {p.l_pr} values")
        taus = n - p.l_pr + np.arange(steps)
        if taus[0] - p.l_s < 0:
            raise DataError(f"series too short for l_s={p.l_s}, l_pr={p.l_pr}")
        raw = forecast_windows(history_windows(v, taus, p.l_s), p)
        values = resolve_fallbacks(raw, v[taus], taus, p.l_pr).values
    return values - shifted.offset


def parse_grid(spec: str, integer: bool = False) -> list:
    """``"a:b"`` (inclusive integer range), ``"a:b:n"`` (n evenly spaced
    points) or a comma list."""
    spec = spec.strip()
    if "," in spec or ":" not in spec:
        vals = [float(x) for x in spec.split(",") if x.strip()]
    else:
        parts = [float(x) for x in spec.split(":")]
        if len(parts) == 2 and integer:
            vals = list(range(int(parts[0]), int(parts[1]) + 1))
        elif len(parts) == 3:
            vals = list(np.linspace(parts[0], parts[1], int(parts[2])))
        elif len(parts) == 2:
            vals = [parts[0], parts[1]]
        else:
            raise ParameterError(f"bad range {spec!r}")
    if not vals:
        raise ParameterError(f"empty range {spec!r}")
    return [int(round(x)) for x in vals] if integer else [float(x) for x in vals]


def scan(ts: TimeSeries, horizon: int, ls_values, q_values, split: SplitSpec,
         epsilon: float | None = None):
    """Evaluation-segment MAE on an ``l_s`` x ``Q`` grid with ``eta1 = eta2 = 0``.

    Returns ``(rows, notes)``; rows are dicts ``l_s, Q, eval_mae, n, is_min``.
    """
    shifted = prepare(ts, epsilon)
    train_end, eval_end = split_indices(len(shifted), split)
    v = shifted.values[:eval_end]
    rows, notes = [], []
    for l_s in ls_values:
        if l_s <= horizon:
            notes.append(f"skipped l_s={l_s}: must exceed horizon {horizon}")
            continue
        for q in q_values:
            p = StringParams(int(l_s), horizon, 0.0, 0.0, float(q))
            seg = forecast_segment(v, p, train_end, eval_end)
            if seg.targets.size == 0:
                notes.append(f"skipped l_s={l_s}, Q={q:g}: no evaluation target has enough history")
                break
            rows.append({"l_s": int(l_s), "Q": float(q),
                         "eval_mae": metrics.mae(seg.actual, seg.forecast),
                         "n": int(seg.targets.size), "is_min": 0})
    if rows:
        best = min(range(len(rows)), key=lambda i: rows[i]["eval_mae"])
        rows[best]["is_min"] = 1
    return rows, notes


def local_minima(rows) -> int:
    """Count strict local minima (4-neighbourhood) of a scan surface."""
    grid = {(r["l_s"], r["Q"]): r["eval_mae"] for r in rows}
    ls = sorted({r["l_s"] for r in rows})
    qs = sorted({r["Q"] for r in rows})
    count = 0
    for i, l in enumerate(ls):
        for j, q in enumerate(qs):
            if (l, q) not in grid:
                continue
            nb = []
            for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                if 0 <= a < len(ls) and 0 <= b < len(qs) and (ls[a], qs[b]) in grid:
                    nb.append(grid[(ls[a], qs[b])])
            if nb and all(grid[(l, q)] < x for x in nb):
                count += 1
    return count


def bench_one(path, index: int, horizon: int, config: GAConfig,
              train_eval_ratio=(6.0, 4.0), epsilon: float | None = None) -> dict:
    """Fit on all but the last ``horizon`` values, forecast that tail directly."""
    from .series import read_series

    name = Path(path).name
    try:
        ts = read_series(path)
        shifted = prepare(ts, epsilon)
        v = shifted.values
        n = len(v)
        n_fit = n - horizon
        a, b = train_eval_ratio
        train_end = int(math.floor(n_fit * a / (a + b) + 1e-9))
        if n_fit <= 0 or train_end <= 0 or train_end >= n_fit:
            raise DataError("degenerate split")
        cfg, adjusted = adjust_bounds(replace(config, seed=config.seed + index), horizon)
        params, trace = evolve(v[:train_end], v[train_end:n_fit], horizon, cfg)
        seg = forecast_segment(v, params, n_fit, n)
        if seg.targets.size != horizon:
            raise DataError(f"only {seg.targets.size} of {horizon} tail values could be forecast")
        rep = segment_report(seg, shifted.offset, "standard")
        return {"series": name, "status": "ok", "seed": cfg.seed,
                "params": params.as_dict(), "generations": trace.generations,
                "smape": rep["smape"], "mae": rep["mae"], "nan_pct": rep["nan_pct"],
                "actual": rep["actual"], "forecast": rep["forecast"]}
    except (DataError, ParameterError, NumericalError) as exc:
        return {"series": name, "status": "failed", "seed": config.seed + index,
                "error": str(exc)}


def bench(paths, horizon: int, config: GAConfig, jobs: int = 1,
          train_eval_ratio=(6.0, 4.0), epsilon: float | None = None) -> dict:
    """One GA per series (seed + sorted index); mean standard SMAPE."""
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    paths = sorted(Path(p) for p in paths)
    if not paths:
        raise DataError("no series files found")
    args = [(p, i, horizon, config, train_eval_ratio, epsilon) for i, p in enumerate(paths)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_star, args))
    else:
        results = [bench_one(*a) for a in args]
    ok = [r["smape"] for r in results if r["status"] == "ok"]
    mean = float(np.mean(ok)) if ok else None
    return {
        "tool": "pmbsi",
        "version": __version__,
        "command": "bench",
        "horizon": horizon,
        "protocol": "one GA per series; fit on all but the last horizon values; "
                    "direct forecast of the held-out tail",
        "smape_variant": "standard",
        "smape_note": metrics.SMAPE_NOTE,
        "ga_config": ga_config_dict(config),
        "n_series": len(results),
        "n_ok": len(ok),
        "n_failed": len(results) - len(ok),
        "mean_smape": mean,
        "reference": {
            "pmbsi_published_mean_smape": NN5_PMBSI_REFERENCE,
            "rank_among_reference": nn5_rank(mean) if mean is not None else None,
            "entries": [{"smape": s, "competitor": c} for s, c in NN5_REFERENCE],
        },
        "series": results,
        "run": {"timestamp": started.isoformat(), "elapsed_s": time.perf_counter() - t0},
    }


def _bench_star(args):
    return bench_one(*args)
