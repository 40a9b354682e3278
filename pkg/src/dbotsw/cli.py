"""Command-line entry point: ``dbotsw <command> ...`` or ``python -m dbotsw``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from .bow import NormScheme, export_bows_csv, export_bows_json
from .classifier import ednn_classify
from .config import load_grid_config
from .experiment import (
    BenchmarkConfig,
    EvalReport,
    ParamGrid,
    ParamSet,
    confusion_matrix,
    fit_pipeline,
    run_benchmark,
)
from .io import load_pipeline, save_pipeline
from .ucr import parse_ucr_file

SCHEMES = [s.value for s in NormScheme if s is not NormScheme.RAW]


def _add_scale_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scale space (override defaults / config)")
    g.add_argument("--sigma0", type=float)
    g.add_argument("--k-sc", type=float)
    g.add_argument("--tau-step", type=int)
    g.add_argument("--n-scales", type=int)


def _grid_from_args(args) -> ParamGrid:
    grid = load_grid_config(args.grid) if getattr(args, "grid", None) else ParamGrid()
    overrides = {name: getattr(args, name) for name in ("sigma0", "k_sc", "tau_step", "n_scales")
                 if getattr(args, name, None) is not None}
    return replace(grid, scale=replace(grid.scale, **overrides)) if overrides else grid


def cmd_grid_search(args) -> int:
    config = BenchmarkConfig(
        grid=_grid_from_args(args), scheme=args.scheme, seed=args.seed, workers=args.workers,
        extraction=args.extraction, run_ednn=args.ednn, out=args.out,
        predictions_csv=args.predictions_csv)
    report = run_benchmark(args.train, args.test, config)
    print(format_report(report))
    return 0


def cmd_train(args) -> int:
    train = parse_ucr_file(args.train)
    grid = _grid_from_args(args)
    params = ParamSet(args.a, args.nb, args.k, float(args.C))
    t0 = time.perf_counter()
    pipe = fit_pipeline(train, params, args.scheme, args.seed, grid.scale, args.extraction)
    save_pipeline(pipe, args.model)
    print(f"trained {params.label()} on {train.name} ({len(train)} series, "
          f"effective k={pipe.codebook.k}) in {time.perf_counter() - t0:.1f}s -> {args.model}")
    return 0


def cmd_predict(args) -> int:
    pipe = load_pipeline(args.model)
    test = parse_ucr_file(args.test)
    bows = pipe.transform(test.X)
    pred = pipe.model.predict(bows)
    if args.bows_csv:
        export_bows_csv(args.bows_csv, bows, test.y)
    if args.bows_json:
        export_bows_json(args.bows_json, bows, test.y)
    error = float(np.mean(pred != test.y))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("series_id,true_label,predicted_label\n")
            for i, (t, p) in enumerate(zip(test.y, pred)):
                fh.write(f"{i},{int(t)},{int(p)}\n")
    print(f"{test.name}: error rate {error:.4f} on {len(test)} series")
    return 0


def cmd_evaluate(args) -> int:
    print(format_report(EvalReport.load(args.report)))
    return 0


def cmd_baseline(args) -> int:
    if args.method != "ednn":
        raise SystemExit(f"unknown baseline {args.method!r}")
    train = parse_ucr_file(args.train)
    test = parse_ucr_file(args.test, name=train.name)
    t0 = time.perf_counter()
    pred, error = ednn_classify(train, test)
    elapsed = time.perf_counter() - t0
    classes = sorted(set(train.classes) | set(test.classes))
    result = {"dataset": train.name, "method": "ednn", "error_rate": error,
              "n_test": len(test), "classes": classes,
              "confusion": confusion_matrix(test.y, pred, classes).tolist(),
              "seconds": elapsed}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
    print(f"{train.name}: EDNN error rate {error:.3f} ({int(round(error * len(test)))}"
          f"/{len(test)}) in {elapsed:.2f}s")
    return 0


def format_report(r: EvalReport) -> str:
    lines = [
        f"dataset        {r.dataset}",
        f"scheme         {r.scheme} ({r.extraction} keypoints), seed {r.seed}",
        f"error rate     {r.error_rate:.4f}  ({r.n_test} test series)",
    ]
    if r.ednn_error_rate is not None:
        lines.append(f"EDNN baseline  {r.ednn_error_rate:.4f}")
    if r.cv_best_accuracy is not None:
        lines.append(f"CV ({r.fold_method})  best accuracy {r.cv_best_accuracy:.4f}, "
                     f"{len(r.chosen_sets)} of {r.n_evaluated_sets} sets tied")
    lines.append("chosen sets")
    for s in r.chosen_sets:
        lines.append(f"  a={s['a']:<2} n_b={s['n_b']:<2} k={s['k']:<4} C={s['C']:g}")
    width = max(len(str(c)) for c in r.classes) + 2
    lines.append("confusion (rows: true, cols: predicted)")
    lines.append(" " * width + "".join(f"{c:>{width}}" for c in r.classes))
    for c, row in zip(r.classes, r.confusion):
        lines.append(f"{c:>{width}}" + "".join(f"{v:>{width}}" for v in row))
    if r.timings:
        lines.append("timings (s)    " + ", ".join(f"{k}={v:.2f}" for k, v in r.timings.items()))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbotsw", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid-search", help="full grid search, ensemble voting and report")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default="ssr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", help="grid config file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--extraction", choices=["dense", "extrema"], default="dense")
    p.add_argument("--ednn", action="store_true", help="also run the 1NN-Euclidean baseline")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--predictions-csv")
    _add_scale_flags(p)
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("train", help="fit one parameter set and save the model")
    p.add_argument("--train", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--a", type=int, default=4)
    p.add_argument("--nb", type=int, default=8)
    p.add_argument("--k", type=int, default=256)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--scheme", choices=SCHEMES, default="ssr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extraction", choices=["dense", "extrema"], default="dense")
    p.add_argument("--grid", help="config file supplying scale-space constants")
    _add_scale_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify a UCR file with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", help="per-series predictions CSV")
    p.add_argument("--bows-csv", help="write the normalized test BoW vectors as CSV")
    p.add_argument("--bows-json", help="write the normalized test BoW vectors as JSON")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="pretty-print a report")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="1NN baseline")
    p.add_argument("--method", choices=["ednn"], default="ednn")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", help="result JSON path")
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"dbotsw: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
