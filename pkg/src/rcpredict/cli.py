"""Command-line entry point: ``rcpredict <subcommand> [options]``.

Exit status: 0 on success, 2 for missing inputs, 3 for validation failures.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .dfg import DfgError, load_dfg
from .library import TaskLibraryError, load_library
from .ml import ModelError, TrainedModel

log = logging.getLogger("rcpredict")


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for p in pairs:
        key, sep, value = p.partition("=")
        if not sep or "." not in key:
            raise pipeline.ValidationFailure(f"--set expects section.key=value, got {p!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="INI-style pipeline config")
    common.add_argument("-o", "--output", type=Path, help="output directory (overrides the config)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config entry; repeatable")
    common.add_argument("-j", "--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rcpredict", description=(
        "Simulate reconfigurable platforms over a DFG corpus, build per-objective datasets "
        "and train classifiers that predict the best configuration."))
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the synthetic corpus and task library")
    for name, helptext in (("sweep", "simulate every DFG under each case's candidates"),
                           ("dataset", "label each DFG with its fittest configuration"),
                           ("evaluate", "cross-validate classifiers and train holdout models")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--case", action="append", dest="cases", metavar="ID")
    p = sub.add_parser("predict", parents=[common], help="classify DFG files with a trained model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--library", type=Path, help="task library (default: from the config)")
    p.add_argument("dfgs", nargs="+", type=Path)
    p = sub.add_parser("baseline", parents=[common], help="compare ML choices with random selection")
    p.add_argument("--case", action="append", dest="cases", metavar="ID")
    p.add_argument("--model", type=Path)
    p.add_argument("--dfg", action="append", dest="dfgs", type=Path, default=[])
    sub.add_parser("report", parents=[common], help="cross-case tables and PNG figures")
    sub.add_parser("run", parents=[common], help="generate, sweep, dataset, evaluate, baseline, report")
    return parser


def _config(args) -> pipeline.PipelineConfig:
    overrides = _overrides(args.set)
    if args.output is not None:
        overrides["paths.output"] = str(args.output.resolve())
    return pipeline.load_config(args.config, overrides)


def _predict(args) -> None:
    if not args.model.exists():
        raise pipeline.MissingInputError(f"model {args.model} not found")
    model = TrainedModel.load(args.model)
    lib_path = args.library or _config(args).library_path
    if not Path(lib_path).exists():
        raise pipeline.MissingInputError(f"task library {lib_path} not found")
    lib = load_library(lib_path)
    missing = [p for p in args.dfgs if not p.exists()]
    if missing:
        raise pipeline.MissingInputError(f"DFG file {missing[0]} not found")
    for line in pipeline.predict_dfgs(model, lib, [load_dfg(p) for p in args.dfgs]):
        print(line)


def run(args) -> None:
    if args.command == "predict":
        return _predict(args)
    cfg = _config(args)
    cases = getattr(args, "cases", None)
    for cid in cases or []:
        cfg.case(cid)
    if args.command == "generate":
        corpus = pipeline.run_generate(cfg)
        print(f"wrote {len(corpus)} DFGs to {cfg.corpus_dir}")
    elif args.command == "sweep":
        for cid, t in pipeline.run_sweep(cfg, cases).items():
            print(f"case {cid}: {len(t.rows)} runs, {len(t.excluded)} DFG(s) infeasible")
    elif args.command == "dataset":
        for cid, ds in pipeline.run_dataset(cfg, cases).items():
            counts = ", ".join(f"{n}={c}" for n, c in zip(ds.class_names, ds.class_counts()))
            print(f"case {cid}: {len(ds.records)} records ({counts})")
    elif args.command == "evaluate":
        for cid, ev in pipeline.run_evaluate(cfg, cases).items():
            print(f"case {cid}")
            for k in ev.kinds:
                print(f"  {k:13s} accuracy {ev.mean_accuracy(k):.4f}")
    elif args.command == "baseline":
        tables = pipeline.run_baseline(cfg, cases, args.model, args.dfgs)
        for cid, t in tables.items():
            a = t.averages()
            print(f"case {cid}: random {a['random']:.1f}  best {a['best']:.1f}  ML {a['ml']:.1f}  "
                  f"(ML beats random on {100 * t.ml_beats_random_share():.0f}% of DFGs)")
    elif args.command == "report":
        for p in pipeline.run_report(cfg):
            print(p)
    elif args.command == "run":
        pipeline.run_all(cfg)
        print(f"pipeline complete; artifacts in {cfg.output}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", None):
        os.environ["RCPREDICT_JOBS"] = str(args.jobs)
    try:
        run(args)
    except pipeline.PipelineError as exc:
        print(f"rcpredict: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (DfgError, TaskLibraryError, ModelError) as exc:
        print(f"rcpredict: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"rcpredict: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
