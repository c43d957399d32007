"""Command-line interface: ``modelsum summarize | simulate | bench``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import logging
import sys
import warnings

from modelsum import bench
from modelsum.control import SummaryControl, load_control
from modelsum.learners import FitError, parse_learner
from modelsum.render import render_json, render_text
from modelsum.resampling import ResamplingError, default_workers, parse_strategy, resample
from modelsum.simulate import DEFAULT_NOISE, simulate
from modelsum.summary import SummaryError, summarize
from modelsum.tabular import DataError, load_csv, make_task, write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modelsum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("summarize", help="resample a learner on a CSV file and print its summary")
    s.add_argument("--data", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--positive")
    s.add_argument("--protected")
    s.add_argument("--keep-protected", action="store_true", help="keep the protected attribute as a feature")
    s.add_argument("--learner", default="random_forest")
    s.add_argument("--resampling", default="cv3")
    s.add_argument("--no-stratify", action="store_true")
    s.add_argument("--control")
    s.add_argument("--hide", action="append", default=[], help="paragraph to hide (repeatable)")
    s.add_argument("--digits", type=int)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--width", type=int, default=80)
    s.add_argument("--workers", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")

    m = sub.add_parser("simulate", help="write data from the runtime-study generating process")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--p", type=int, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--noise", type=float, default=DEFAULT_NOISE)
    m.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="time the summary over an (n, p) grid")
    b.add_argument("--grid", default="n=50,100,500,1000,2000;p=5,10,25,50,100")
    b.add_argument("--learners", nargs="+", default=["linear", "random_forest"])
    b.add_argument("--workers", nargs="+", type=int, default=[1])
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    return parser


class _StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (DataError, FitError, ResamplingError, SummaryError, ValueError, OSError) as exc:
        raise _StageError(name, exc) from exc


def cmd_summarize(args) -> int:
    try:
        learner = parse_learner(args.learner)
        strategy = parse_strategy(args.resampling, stratify=not args.no_stratify)
        control = load_control(args.control) if args.control else SummaryControl()
        overrides = {}
        if args.hide:
            overrides["hide"] = set(control.hide) | set(args.hide)
        if args.digits is not None:
            overrides["digits"] = args.digits
        if overrides:
            control = dataclasses.replace(control, **overrides)
        if args.width < 40:
            raise UsageError("--width must be at least 40")
    except (ValueError, OSError, UsageError) as exc:
        print(f"modelsum summarize: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    workers = args.workers if args.workers is not None else default_workers()
    try:
        frame = _stage("load", load_csv, args.data)
        task = _stage("task", make_task, frame, args.target, args.positive, args.protected,
                      args.keep_protected, id=_task_id(args.data))
        rr = _stage("resample", resample, task, learner, strategy, workers=workers, seed=args.seed)
        model = _stage("fit", learner.fit, task, None, args.seed)
        report = _stage("summarize", summarize, model, rr, control, workers=workers)
        text = render_json(report) if args.format == "json" else render_text(report, args.width)
    except _StageError as exc:
        print(f"modelsum summarize: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _task_id(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_simulate(args) -> int:
    try:
        frame = simulate(args.n, args.p, args.seed, args.noise)
    except ValueError as exc:
        print(f"modelsum simulate: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        write_csv(frame, args.out)
    except OSError as exc:
        print(f"modelsum simulate: write: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        ns, ps = bench.parse_grid(args.grid)
        learners = [parse_learner(x) for x in args.learners]
        if args.repeats < 1 or any(w < 1 for w in args.workers):
            raise ValueError("repeats and workers must be >= 1")
    except ValueError as exc:
        print(f"modelsum bench: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cells = bench.run_bench(ns, ps, learners, args.workers, args.repeats, args.seed)
    try:
        bench.write_bench_csv(cells, args.out)
    except OSError as exc:
        print(f"modelsum bench: write: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


COMMANDS = {"summarize": cmd_summarize, "simulate": cmd_simulate, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
