"""Command-line entry points.

::

    aerosim run     --scenario PATH --seed N --out DIR
    aerosim batch   --scenario PATH --runs N --seed N --out DIR
    aerosim evolve  --scenario PATH --generations N --pop N --seed N --out DIR
    aerosim analyze --trace PATH --out DIR

Exit codes: 0 success, 1 runtime or IO failure, 2 invalid input (bad
arguments, scenario validation errors, malformed traces).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, load_scenario
from .discovery import GaConfig, NotEvolvableError, evolvable_entity, evolve
from .engine import SimulationError, run_batch, run_episode
from .results import (
    TraceParseError,
    export_orientation_csv,
    parse_trace,
    serialize_trace,
    summarize_from_header,
)
from .scoring import EmptyTraceError

log = logging.getLogger("aerosim")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}")
        return value
    return parse


def _load(path: str):
    try:
        return load_scenario(path)
    except ConfigError as e:
        raise _Fail(EXIT_INVALID, f"invalid scenario: {e}") from None


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        raise _Fail(EXIT_RUNTIME, f"cannot write to {out}: {e.strerror or e}") from None
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as e:
        raise _Fail(EXIT_RUNTIME, f"cannot write {path}: {e.strerror or e}") from None


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    out = _outdir(args.out)
    try:
        res = run_episode(cfg, args.seed)
    except SimulationError as e:
        raise _Fail(EXIT_RUNTIME, f"simulation failed: {e}") from None
    _write(out / "trace.jsonl", serialize_trace(res.records, res.header))
    if res.summary is None:
        raise _Fail(EXIT_INVALID, "scenario has no scored pair (set scoring.pair or give an entity a target)")
    _write(out / "summary.json", res.summary.to_json())
    _write(out / "orientation.csv", export_orientation_csv(res.records))
    print(res.summary.digest())
    return EXIT_OK


def cmd_batch(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    if cfg.scoring_pair() is None:
        raise _Fail(EXIT_INVALID, "scenario has no scored pair")
    out = _outdir(args.out)
    seeds = [args.seed + i for i in range(args.runs)]
    results = run_batch(cfg, seeds, workers=min(os.cpu_count() or 1, len(seeds)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "mean_s2", "shaw_hold_success"])
    failures = []
    for seed, summary, error in results:
        if summary is None:
            failures.append((seed, error))
            print(f"seed {seed}: FAILED {error}", file=sys.stderr)
            continue
        _write(out / f"summary_{seed}.json", summary.to_json())
        w.writerow([seed, repr(summary.score.mean_s2), str(summary.score.shaw_hold_success).lower()])
    _write(out / "aggregate.csv", buf.getvalue())
    if failures:
        fb = io.StringIO()
        fw = csv.writer(fb, lineterminator="\n")
        fw.writerow(["seed", "error"])
        fw.writerows(failures)
        _write(out / "failures.csv", fb.getvalue())
    ok = len(results) - len(failures)
    print(f"{ok}/{len(results)} runs completed")
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_evolve(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    try:
        evolvable_entity(cfg)
    except NotEvolvableError as e:
        raise _Fail(EXIT_INVALID, str(e)) from None
    out = _outdir(args.out)
    ga = GaConfig(population_size=args.pop, generations=args.generations)

    def report(h):
        print(f"generation {h.generation:3d}  best {h.best:.6f}  mean {h.mean:.6f}", flush=True)

    res = evolve(cfg, ga, args.seed, workers=os.cpu_count() or 1, on_generation=report)
    _write(out / "history.csv", res.history_csv())
    _write(out / "best_genome.json", json.dumps(res.genome_fragment(), indent=2) + "\n")
    print(f"best fitness {res.best_fitness:.6f} after {res.evaluations} evaluations")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        text = Path(args.trace).read_text()
    except OSError as e:
        raise _Fail(EXIT_INVALID, f"cannot read trace {args.trace}: {e.strerror or e}") from None
    try:
        header, records = parse_trace(text)
    except TraceParseError as e:
        raise _Fail(EXIT_INVALID, f"malformed trace: {e}") from None
    if not records:
        raise _Fail(EXIT_INVALID, "trace is empty")
    if header is None:
        raise _Fail(EXIT_INVALID, "line 1: trace has no header line")
    try:
        summary = summarize_from_header(header, records)
        orientation = export_orientation_csv(records)
    except (EmptyTraceError, KeyError, TypeError, ValueError) as e:
        raise _Fail(EXIT_INVALID, f"trace cannot be analyzed: {e}") from None
    out = _outdir(args.out)
    _write(out / "summary.json", summary.to_json())
    _write(out / "orientation.csv", orientation)
    print(summary.digest())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aerosim", description="Air-combat manoeuvring simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one episode and write its trace, summary and orientation CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run seeds seed..seed+runs-1 and aggregate their scores")
    p.add_argument("--scenario", required=True)
    p.add_argument("--runs", type=_count(1), required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("evolve", help="tune the blue stern-conversion parameters with a GA")
    p.add_argument("--scenario", required=True)
    p.add_argument("--generations", type=_count(0), default=GaConfig.generations)
    p.add_argument("--pop", type=_count(2), default=GaConfig.population_size)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("analyze", help="recompute summary and orientation CSV from a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _Fail as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
