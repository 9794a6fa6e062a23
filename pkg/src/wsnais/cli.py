"""Command-line entry point: ``wsnais simulate|optimize|negsel|report``.

Exit status is 0 on success, 1 for bad input (unknown flags, invalid
scenario files, unreadable inputs) and 2 when a run fails at runtime.  The
``WSNAIS_SEED`` environment variable sets the default seed; an explicit
``--seed`` wins.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .ais import (AffinityConfig, Bitstring, ClonalParams, Scheme, all_bitstrings,
                  negative_selection)
from .harness import (emit_metrics, format_value, read_metrics, recompute_summary,
                      render_metrics, run_scenario)
from .optimizer import optimize, write_history, write_lattice
from .scenario import ScenarioError, ScenarioParseError, load_scenario

SEED_ENV = "WSNAIS_SEED"


class UsageError(Exception):
    pass


class RunFailure(Exception):
    """A validated run that failed while executing."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; usage problems are input
    # errors here and must exit with 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsnais", description=(
        "Immune-inspired intrusion detection for simulated wireless sensor networks."))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a scenario file and write metrics CSV")
    sim.add_argument("scenario", type=Path, help="TOML scenario file")
    sim.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    sim.add_argument("--seed", type=int, help=f"override the scenario seed (env {SEED_ENV})")

    opt = sub.add_parser("optimize", help="clonal selection on the two-peak test landscape")
    opt.add_argument("--pop", type=int, default=50, help="population size")
    opt.add_argument("--select", type=int, default=20, help="antibodies selected for cloning")
    opt.add_argument("--maturity", type=float, default=80.0, help="maturity level")
    opt.add_argument("--gens", type=int, default=600, help="generations")
    opt.add_argument("--clones", type=int, default=20, help="clone budget per generation")
    opt.add_argument("--replace", type=int, default=5, help="worst antibodies replaced")
    opt.add_argument("--seed", type=int, help=f"random seed (env {SEED_ENV}, default 0)")
    opt.add_argument("--history", type=Path, help="write generation,best_fitness CSV")
    opt.add_argument("--dump-lattice", type=Path, help="write x,y,fitness lattice CSV")
    opt.add_argument("--lattice-resolution", type=int, default=100)

    neg = sub.add_parser("negsel", help="generate detectors by negative selection")
    neg.add_argument("--len", dest="length", type=int, default=32, help="bitstring length")
    neg.add_argument("--r", type=int, default=8, help="r-contiguous match length")
    neg.add_argument("--scheme", choices=[s.value for s in Scheme], default="r_contiguous")
    neg.add_argument("--threshold", type=float, default=0.8,
                     help="recognition threshold for the hamming scheme")
    neg.add_argument("--self-file", type=Path, help="file with one self bitstring per line")
    neg.add_argument("--self", dest="self_strings", action="append", default=[],
                     metavar="BITS", help="self bitstring (repeatable)")
    neg.add_argument("--count", type=int,
                     help="detectors requested (default 16; every survivor with --exhaustive)")
    neg.add_argument("--max-attempts", type=int, default=100_000)
    neg.add_argument("--seed", type=int, help=f"random seed (env {SEED_ENV}, default 0)")
    neg.add_argument("--exhaustive", action="store_true",
                     help="enumerate every bitstring instead of sampling")

    rep = sub.add_parser("report", help="recompute the summary of a metrics CSV")
    rep.add_argument("csv", type=Path)
    return parser


def _simulate(args) -> int:
    config = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else _default_seed()
    if seed is not None:
        config.seed = seed
    try:
        report = run_scenario(config)
    except Exception as exc:
        raise RunFailure(exc) from exc
    if args.out is None:
        sys.stdout.write(render_metrics(report))
    else:
        emit_metrics(report, args.out)
        for key in sorted(report.summary):
            print(f"{key}={format_value(report.summary[key])}")
    return 0


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = _default_seed()
    return 0 if env is None else env


def _optimize(args) -> int:
    params = ClonalParams(args.pop, args.select, args.clones, args.maturity, args.replace,
                          args.gens)
    try:
        report = optimize(params, np.random.default_rng(_seed(args)))
    except Exception as exc:
        raise RunFailure(exc) from exc
    best = report.best
    print(f"best_fitness={best.fitness!r}")
    print(f"x={best.x!r}")
    print(f"y={best.y!r}")
    print(f"generations={report.generations_used}")
    if args.history:
        write_history(report, args.history)
    if args.dump_lattice:
        write_lattice(args.dump_lattice, args.lattice_resolution)
    return 0


def _read_self(args) -> list[Bitstring]:
    texts = list(args.self_strings)
    if args.self_file:
        for line in args.self_file.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                texts.append(line)
    out = []
    for t in texts:
        if len(t) != args.length:
            raise UsageError(f"self bitstring {t!r} is not {args.length} bits long")
        out.append(Bitstring.from_str(t))
    return out


def _negsel(args) -> int:
    config = AffinityConfig(Scheme(args.scheme), args.r, args.threshold, args.length)
    self_set = _read_self(args)
    if args.exhaustive:
        if args.length > 24:
            raise UsageError("--exhaustive is limited to lengths up to 24")
        count = (1 << args.length) if args.count is None else args.count
        found = negative_selection(self_set, count, config, 1 << args.length,
                                   candidates=all_bitstrings(args.length))
    else:
        count = 16 if args.count is None else args.count
        found = negative_selection(self_set, count, config, args.max_attempts,
                                   np.random.default_rng(_seed(args)))
    for d in found:
        print(d.pattern)
    return 0


def _report(args) -> int:
    rows, trailer = read_metrics(args.csv)
    summary = recompute_summary(rows)
    mismatched = []
    for key in sorted(summary):
        value = format_value(summary[key])
        print(f"{key}={value}")
        if key in trailer and trailer[key] != value:
            mismatched.append(f"{key}: file says {trailer[key]}, rows give {value}")
    for line in mismatched:
        print(f"mismatch {line}", file=sys.stderr)
    return 1 if mismatched else 0


_COMMANDS = {"simulate": _simulate, "optimize": _optimize, "negsel": _negsel,
             "report": _report}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ScenarioError, ScenarioParseError) as exc:
        print(exc, file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"wsnais: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # parameter validation (ClonalParams, AffinityConfig, malformed CSV)
        print(f"wsnais: invalid input: {exc}", file=sys.stderr)
        return 1
    except (RunFailure, OSError) as exc:
        print(f"wsnais: run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
