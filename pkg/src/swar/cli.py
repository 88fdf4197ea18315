"""Command-line front end.

Subcommands::

    swar fit        --data FILE [--response y] --method M --h H --k K [--out JSON] [--essp CSV]
    swar influence  --kind {sif,eif,sif-rho} plus the fit options [--reslice] [--out CSV]
    swar select     --data FILE --h-grid 2,5,10 --k-grid 1,2 [--reslice] [--out CSV]
    swar simulate   --config JSON | inline options [--out CSV] [--json JSON]

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical infeasibility.
Slice and direction numbers in arguments and output start at 1; row indices
start at 0.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .estimators import METHODS, EstimatorConfig, fit, select_h_k
from .exceptions import (
    DataError,
    MissingResponse,
    NonNumericCell,
    NumericalInfeasibility,
    ParseError,
    SwarError,
)
from .influence import eif_rho, sif_direction, sif_rho
from .simulation import MODELS, Contamination, SimConfig, run_study
from .slicing import Dataset

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def load_csv(path, response="y"):
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    The ``response`` column becomes ``y``; every other column is a predictor,
    in file order. Returns the dataset and the predictor names.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: file is empty", row=0)
    header = [h.strip() for h in rows[0]]
    if response not in header:
        raise MissingResponse(f"{path}: no column named {response!r} (columns: {', '.join(header)})")
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise ParseError(f"{path}: no data rows", row=1)
    values = np.empty((len(body), len(header)))
    for i, r in enumerate(body, start=1):
        if len(r) != len(header):
            raise ParseError(
                f"{path}: row {i} has {len(r)} fields, expected {len(header)}",
                row=i, column=min(len(r), len(header)),
            )
        for j, cell in enumerate(r):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise NonNumericCell(
                    f"{path}: row {i}, column {header[j]!r}: {cell.strip()!r} is not a finite number",
                    row=i, column=header[j],
                )
            values[i - 1, j] = v
    k = header.index(response)
    names = [h for j, h in enumerate(header) if j != k]
    X = np.delete(values, k, axis=1)
    return Dataset(X, values[:, k]), names


def _grid(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fmt(v):
    return repr(float(v))


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--response", default="y", help="name of the response column (default: y)")


def _add_fit_args(p):
    _add_data_args(p)
    p.add_argument("--method", choices=METHODS, default="swar")
    p.add_argument("--h", type=int, default=2, help="number of slices")
    p.add_argument("--k", type=int, default=1, help="number of directions")


def build_parser():
    parser = _Parser(prog="swar", description="Slice weighted average regression")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="estimate directions and summary-plot scores")
    _add_fit_args(p)
    p.add_argument("--out", help="JSON report (default: stdout)")
    p.add_argument("--essp", help="CSV of response and projection scores")

    p = sub.add_parser("influence", help="per-observation influence values")
    _add_fit_args(p)
    p.add_argument("--kind", choices=("sif", "eif", "sif-rho"), default="sif-rho")
    p.add_argument("--direction", type=int, default=1, help="direction for --kind sif (1-based)")
    p.add_argument("--reslice", action="store_true", help="re-slice each reduced dataset")
    p.add_argument("--out", help="CSV output (default: stdout)")

    p = sub.add_parser("select", help="choose H and K by minimum mean influence")
    _add_data_args(p)
    p.add_argument("--h-grid", type=_grid, default=[2, 5, 10])
    p.add_argument("--k-grid", type=_grid, default=[1, 2])
    p.add_argument("--reslice", action="store_true", help="re-slice each reduced dataset")
    p.add_argument("--out", help="CSV of the mean-influence grid")

    p = sub.add_parser("simulate", help="run a seeded simulation study")
    p.add_argument("--config", help="JSON simulation config; inline options override it")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--h", type=_grid, help="comma-separated slice counts")
    p.add_argument("--k", type=int)
    p.add_argument("--methods", type=lambda s: [m.strip() for m in s.split(",") if m.strip()])
    p.add_argument("--reps", type=int, dest="repetitions")
    p.add_argument("--seed", type=int)
    p.add_argument("--contaminate", type=float, metavar="FRACTION")
    p.add_argument("--workers", type=int, help="worker processes (default: SWAR_THREADS or all CPUs)")
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.add_argument("--json", help="JSON output")
    return parser


def fit_report(data, names, basis):
    scores = basis.scores(data.X)
    return {
        "method": basis.method,
        "H": basis.H,
        "K": basis.K,
        "n": data.n,
        "predictors": names,
        "weights": None if basis.weights is None else basis.weights.tolist(),
        "eigenvalues": basis.eigenvalues.tolist(),
        "directions": basis.directions.T.tolist(),
        "essp": {"y": data.y.tolist(), "scores": scores.tolist()},
    }


def essp_csv(data, basis):
    scores = basis.scores(data.X)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "y"] + [f"score_{k + 1}" for k in range(basis.K)])
    for i in range(data.n):
        w.writerow([i, _fmt(data.y[i])] + [_fmt(s) for s in scores[i]])
    return buf.getvalue()


def _cmd_fit(args):
    data, names = load_csv(args.data, args.response)
    basis = fit(data, EstimatorConfig(args.method, args.h, args.k))
    _write(json.dumps(fit_report(data, names, basis), indent=2) + "\n", args.out)
    if args.essp:
        _write(essp_csv(data, basis), args.essp)


def _cmd_influence(args):
    data, _ = load_csv(args.data, args.response)
    config = EstimatorConfig(args.method, args.h, args.k)
    if args.kind == "sif":
        if not 1 <= args.direction <= args.k:
            raise UsageError(f"--direction must lie in 1..{args.k}")
        report = sif_direction(data, config, args.direction - 1, reslice=args.reslice)
        cols = [f"value_{j + 1}" for j in range(data.p)]
    elif args.kind == "eif":
        report = eif_rho(data, fit(data, config))
        cols = ["value"]
    else:
        report = sif_rho(data, config, reslice=args.reslice)
        cols = ["value"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "slice"] + cols)
    values = report.values.reshape(data.n, -1)
    for i in range(data.n):
        w.writerow([i, int(report.slices[i]) + 1] + [_fmt(v) for v in values[i]])
    _write(buf.getvalue(), args.out)


def _cmd_select(args):
    data, _ = load_csv(args.data, args.response)
    sel = select_h_k(data, args.h_grid, args.k_grid, reslice=args.reslice)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["H", "K", "mean_abs_sif", "feasible"])
    for (H, K), v in sel.table.items():
        w.writerow([H, K, "" if v is None else _fmt(v), int(v is not None)])
    if args.out:
        _write(buf.getvalue(), args.out)
    print(json.dumps({"H": sel.H, "K": sel.K}))


def _cmd_simulate(args):
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(base, dict):
            raise ParseError(f"{args.config}: expected a JSON object")
    for key in ("model", "n", "p", "k", "methods", "repetitions", "seed"):
        v = getattr(args, key)
        if v is not None:
            base["K" if key == "k" else key] = v
    if args.h is not None:
        base["H"] = args.h
    if args.contaminate is not None:
        base["contamination"] = {"fraction": args.contaminate} if args.contaminate > 0 else None
    try:
        config = SimConfig(**base)
    except TypeError as exc:
        raise UsageError(f"invalid simulation config: {exc}") from exc
    if isinstance(config.contamination, dict):
        config.contamination = Contamination(**config.contamination)
    result = run_study(config, workers=args.workers)
    _write(result.to_csv(), args.out)
    if args.json:
        _write(result.to_json() + "\n", args.json)


COMMANDS = {
    "fit": _cmd_fit,
    "influence": _cmd_influence,
    "select": _cmd_select,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalInfeasibility as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SwarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
