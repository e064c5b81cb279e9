"""Command-line interface for string-invariant forecasting.

Subcommands: fit, predict, evaluate, scan, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

Any long option may also come from ``--config FILE``, a flat ``key = value``
file (``#`` starts a comment). Command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import shlex
import sys
from pathlib import Path

from . import __version__
from .errors import DataError, NumericalError, ParameterError
from .ga import DEFAULT_BOUNDS, GAConfig
from .metrics import SMAPE_VARIANTS
from .series import SplitSpec, read_series

log = logging.getLogger("pmbsi")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ratio(text: str) -> tuple[float, float]:
    sep = "/" if "/" in text else ":"
    try:
        a, b = (float(x) for x in text.split(sep))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A/B, got {text!r}")
    return a, b


def _bound(text: str) -> tuple[str, tuple[float, float]]:
    try:
        name, rng = text.split("=")
        lo, hi = (float(x) for x in rng.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected param=min:max, got {text!r}")
    name = {"ls": "l_s", "q": "Q", "eta_1": "eta1", "eta_2": "eta2"}.get(name.strip(), name.strip())
    if name not in DEFAULT_BOUNDS:
        raise argparse.ArgumentTypeError(f"unknown parameter {name!r}")
    return name, (lo, hi)


def _add_split(p):
    p.add_argument("--valid-frac", type=float, default=0.4,
                   help="fraction of the series (most recent) kept for validation")
    p.add_argument("--train-eval-ratio", type=_ratio, default=(6.0, 4.0),
                   help="train/evaluation ratio of the remainder, e.g. 6/4")


def _add_ga(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bounds", type=_bound, action="append", default=[],
                   metavar="PARAM=MIN:MAX", help="override a search bound (repeatable)")
    p.add_argument("--population-size", type=int, default=20)
    p.add_argument("--tournament-size", type=int, default=5)
    p.add_argument("--elite-fraction", type=float, default=0.01)
    p.add_argument("--stop-no-progress", type=int, default=50)
    p.add_argument("--mutation-rate", type=float, default=0.5)
    p.add_argument("--mutation-probability", type=float, default=1.0)
    p.add_argument("--min-train-forecasts", type=int, default=5)
    p.add_argument("--max-generations", type=int, default=None)


def _add_common(p):
    p.add_argument("--config", help="flat key = value file with default options")
    p.add_argument("--epsilon", type=float, default=None,
                   help="positivity shift margin (default 0.1 * data range)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmbsi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pmbsi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="evolve parameters and score evaluation/validation")
    p.add_argument("--input", required=True)
    p.add_argument("--horizon", type=int, nargs="+", default=[1])
    p.add_argument("--mode", choices=("direct", "iterated"), default="direct")
    p.add_argument("--smape-variant", choices=SMAPE_VARIANTS, default="standard")
    p.add_argument("--out", default="pmbsi_out", help="output directory")
    _add_split(p)
    _add_ga(p)
    _add_common(p)

    p = sub.add_parser("predict", help="forecast the values following a series")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--out", default=None, help="write forecasts here instead of stdout")
    _add_common(p)

    p = sub.add_parser("evaluate", help="score a stored model on a series")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--steps", type=int, default=None,
                   help="iterate a one-step model this many steps")
    p.add_argument("--smape-variant", choices=SMAPE_VARIANTS, default="standard")
    p.add_argument("--out", default=None, help="JSON report path (default stdout)")
    _add_split(p)
    _add_common(p)

    p = sub.add_parser("scan", help="evaluation MAE over an l_s x Q grid (eta1 = eta2 = 0)")
    p.add_argument("--input", required=True)
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--ls", default="2:20", help="l_s values: a:b or comma list")
    p.add_argument("--q", default="0.01:10:20", help="Q values: a:b:n or comma list")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    _add_split(p)
    _add_common(p)

    p = sub.add_parser("bench", help="batch fit + tail forecast over a directory of series")
    p.add_argument("--input", required=True, help="directory of one-column CSV files")
    p.add_argument("--horizon", type=int, default=56)
    p.add_argument("--pattern", default="*")
    p.add_argument("--train-eval-ratio", type=_ratio, default=(6.0, 4.0))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="pmbsi_bench")
    _add_ga(p)
    _add_common(p)
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        tokens.append("--" + key.replace("_", "-"))
        tokens.extend(shlex.split(value))
    return tokens


def _with_config(argv: list[str]) -> list[str]:
    """Insert config-file options right after the subcommand so that
    explicit flags, which come later, take precedence."""
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            continue
        cmd_at = next((j for j, t in enumerate(argv) if not t.startswith("-")), None)
        if cmd_at is None:
            return argv
        return argv[:cmd_at + 1] + _config_tokens(path) + argv[cmd_at + 1:]
    return argv


def _ga_config(args) -> GAConfig:
    return GAConfig(
        population_size=args.population_size,
        tournament_size=args.tournament_size,
        elite_fraction=args.elite_fraction,
        stop_no_progress=args.stop_no_progress,
        mutation_rate_initial=args.mutation_rate,
        mutation_probability=args.mutation_probability,
        bounds=dict(args.bounds),
        seed=args.seed,
        max_generations=args.max_generations,
        min_train_forecasts=args.min_train_forecasts,
    )


def _split(args) -> SplitSpec:
    try:
        return SplitSpec(args.valid_frac, tuple(args.train_eval_ratio))
    except DataError as exc:
        raise ParameterError(str(exc)) from exc


def _load(path: str):
    if not Path(path).is_file():
        raise DataError(f"input file not found: {path}")
    return read_series(path)


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_fit(args) -> int:
    from .protocol import fit

    ts = _load(args.input)
    report, models = fit(ts, args.horizon, _split(args), _ga_config(args), args.mode,
                         args.smape_variant, args.epsilon)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(report, out / "report.json")
    for h, model in models.items():
        model.save(out / f"model_h{h}.json")
    fields = ["horizon", "mode", "l_s", "Q", "eta1", "eta2", "generations",
              "mae_eval", "smape_eval", "mae_valid", "smape_valid", "nan_pct_valid",
              "naive_mae_valid", "naive_smape_valid"]
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in report["horizons"]:
            p = r["params"]
            w.writerow([r["horizon"], r["mode"], p["l_s"], p["Q"], p["eta1"], p["eta2"],
                        r["ga"]["generations"], r["evaluation"]["mae"], r["evaluation"]["smape"],
                        r["validation"]["mae"], r["validation"]["smape"],
                        r["validation"]["nan_pct"], r["naive_validation"]["mae"],
                        r["naive_validation"]["smape"]])
    for r in report["horizons"]:
        log.info("horizon %d (%s): valid MAE %.6f, SMAPE %.4f", r["horizon"], r["mode"],
                 r["validation"]["mae"], r["validation"]["smape"])
    print(out / "report.json")
    return EXIT_OK


def cmd_predict(args) -> int:
    from .protocol import FittedModel, predict_ahead

    model = FittedModel.load(args.model)
    values = predict_ahead(_load(args.input), model, args.steps)
    text = "".join(f"{float(x)!r}\n" for x in values)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .protocol import FittedModel, evaluate

    model = FittedModel.load(args.model)
    report = evaluate(_load(args.input), model, _split(args), args.steps, args.smape_variant)
    _write_json(report, args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    from .protocol import local_minima, parse_grid, scan

    rows, notes = scan(_load(args.input), args.horizon, parse_grid(args.ls, integer=True),
                       parse_grid(args.q), _split(args), args.epsilon)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    if not rows:
        raise DataError("no feasible grid cell")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["l_s", "Q", "eval_mae", "n", "is_min"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    best = next(r for r in rows if r["is_min"])
    print(f"minimum: l_s={best['l_s']} Q={best['Q']:g} eval MAE={best['eval_mae']:.6g}; "
          f"strict local minima: {local_minima(rows)}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .protocol import bench

    root = Path(args.input)
    if not root.is_dir():
        raise DataError(f"not a directory: {root}")
    paths = [p for p in root.glob(args.pattern) if p.is_file()]
    report = bench(paths, args.horizon, _ga_config(args), args.jobs,
                   tuple(args.train_eval_ratio), args.epsilon)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(report, out / "bench.json")
    with open(out / "bench.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "status", "smape", "mae", "nan_pct", "l_s", "Q", "eta1", "eta2"])
        for r in report["series"]:
            p = r.get("params", {})
            w.writerow([r["series"], r["status"], r.get("smape"), r.get("mae"), r.get("nan_pct"),
                        p.get("l_s"), p.get("Q"), p.get("eta1"), p.get("eta2")])
    mean = report["mean_smape"]
    print(f"{report['n_ok']}/{report['n_series']} series; mean SMAPE "
          f"{'n/a' if mean is None else f'{mean:.3f}'} "
          f"(reference {report['reference']['pmbsi_published_mean_smape']})")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "evaluate": cmd_evaluate,
            "scan": cmd_scan, "bench": cmd_bench}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_with_config(argv))
    except UsageError as exc:
        print(f"pmbsi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"pmbsi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"pmbsi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"pmbsi: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
