"""Command-line interface: analyze, generate, sweep."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import CapacityError, PipelineError, SequenceFormatError
from .harness import (
    ExperimentConfig,
    gen_non_carleson,
    gen_radial,
    gen_random_separated,
    run_experiment,
    window_sweep,
    windows_csv,
)
from .sequences import PointSequence

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2
GENERATORS = ("radial", "random", "noncarleson")
GENERATOR_ALIASES = {"nonquarleson": "noncarleson"}

log = logging.getLogger("ultrasep")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("sequence", type=Path, help="JSON array of [re, im] pairs")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--partition", choices=("good", "hoffman", "restricted"), default="restricted")
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=None, help="separation constant (default: from the data)")
    p.add_argument("--levels", type=int, default=12, help="window heights 2^-1 .. 2^-levels")
    p.add_argument("--no-tubes", action="store_true", help="skip the F_W tube check")
    p.add_argument("--csv", type=Path, default=None, help="write per-window masses and bounds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultrasep", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="run the full pipeline on a sequence file")
    _add_config_args(an)
    an.add_argument("--report", type=Path, default=None, help="write the JSON report here")

    gen = sub.add_parser("generate", help="write a generated sequence file")
    gen.add_argument("kind", help="radial | random | noncarleson")
    gen.add_argument("--count", type=int, default=12)
    gen.add_argument("--ratio", type=float, default=0.5, help="radial: points 1 - ratio^k")
    gen.add_argument("--delta", type=float, default=0.2, help="random: separation constant")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--max-modulus", type=float, default=0.99)
    gen.add_argument("-o", "--output", type=Path, default=None, help="default: stdout")

    sw = sub.add_parser("sweep", help="run the window sweep only")
    _add_config_args(sw)
    return parser


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        gamma=args.gamma,
        kappa=args.kappa,
        delta_hint=args.delta,
        partition_kind=args.partition,
        sweep_levels=args.levels,
        check_f_w=not args.no_tubes,
    )


def _print_clause(c) -> None:
    status = "SKIP" if c.passed is None else ("PASS" if c.passed else "FAIL")
    nums = "" if c.lhs is None else f" lhs={c.lhs:.6g} rhs={c.rhs:.6g} tol={c.tolerance:g}"
    print(f"{status} {c.name}:{nums} ({c.detail})")


def _cmd_analyze(args) -> int:
    s = PointSequence.load(args.sequence)
    report = run_experiment(s, _config(args))
    for c in report.clauses:
        _print_clause(c)
    if args.report:
        args.report.write_text(report.to_json() + "\n")
    if args.csv:
        args.csv.write_text(report.windows_csv())
    failed = report.failed_clauses()
    print(f"verdict: {'pass' if report.verdict else 'fail (' + ', '.join(failed) + ')'}")
    return EXIT_OK if report.verdict else EXIT_CHECK_FAILED


def _cmd_generate(args) -> int:
    kind = GENERATOR_ALIASES.get(args.kind, args.kind)
    if kind == "radial":
        s = gen_radial(args.ratio, args.count)
    elif kind == "random":
        s = gen_random_separated(args.count, args.delta, args.seed, max_modulus=args.max_modulus)
    elif kind == "noncarleson":
        s = gen_non_carleson(args.count)
    else:
        raise ValueError(f"unknown generator {args.kind!r}; choose from {', '.join(GENERATORS)}")
    if args.output:
        s.save(args.output)
    else:
        print(s.to_json())
    return EXIT_OK


def _cmd_sweep(args) -> int:
    s = PointSequence.load(args.sequence)
    rows, clauses = window_sweep(s, _config(args))
    text = windows_csv(rows)
    if args.csv:
        args.csv.write_text(text)
    else:
        sys.stdout.write(text)
    for c in clauses:
        _print_clause(c)
    return EXIT_CHECK_FAILED if any(c.passed is False for c in clauses) else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"analyze": _cmd_analyze, "generate": _cmd_generate, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except (SequenceFormatError, CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PipelineError as exc:
        if isinstance(exc.cause, (SequenceFormatError, ValueError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        raise


if __name__ == "__main__":
    sys.exit(main())
