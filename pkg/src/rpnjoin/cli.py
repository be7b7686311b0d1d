"""Command-line driver: gen, plan, run, bench, and report subcommands.

Data goes to files or standard output; diagnostics and stats go to standard
error, so pipelines stay clean. Failure classes map to distinct exit codes.
"""

from __future__ import annotations

import argparse
import sys

from . import bench as bench_mod
from .engine import MODES, SEQUENTIAL, EvalContext, eval_rpn
from .errors import (
    CardinalityLimitError,
    CsvFormatError,
    EngineError,
    InvalidRangeError,
    MalformedProgramError,
    PlanSyntaxError,
    UnknownRelationError,
)
from .joins import ALGORITHMS, JoinResultPolicy
from .plans import (
    make_bushy_plan,
    make_linear_plan,
    parse_plan,
    plan_to_text,
    rpn_to_text,
    to_rpn,
)
from .relations import (
    Catalog,
    generate_relation,
    relation_from_csv,
    relation_to_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CATALOG = 4
EXIT_CAP = 5
EXIT_IO = 6


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _name_list(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of relation names")
    return names


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpnjoin",
        description="In-memory multi-join engine over postfix plan programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random relation CSV")
    gen.add_argument("--name", required=True, help="relation name")
    gen.add_argument("--count", required=True, type=int, help="number of tuples")
    gen.add_argument("--key-lo", required=True, type=int, help="key range lower bound, inclusive")
    gen.add_argument("--key-hi", required=True, type=int, help="key range upper bound, exclusive")
    gen.add_argument("--seed", required=True, type=int, help="generator seed")
    gen.add_argument("--out", required=True, help="output CSV path")

    plan = sub.add_parser("plan", help="print a plan and its RPN program")
    what = plan.add_mutually_exclusive_group(required=True)
    what.add_argument("--shape", choices=("linear", "bushy"), help="canonical shape to build")
    what.add_argument("--expr", help="infix plan text, e.g. 'R1 JOIN (R2 JOIN R3)'")
    plan.add_argument("--relations", type=_name_list,
                      help="comma-separated relation names (with --shape)")

    run = sub.add_parser("run", help="evaluate a multi-join over relation CSVs")
    rwhat = run.add_mutually_exclusive_group(required=True)
    rwhat.add_argument("--shape", choices=("linear", "bushy"))
    rwhat.add_argument("--expr", help="infix plan text")
    run.add_argument("--relations", type=_name_list,
                     help="comma-separated relation names (with --shape)")
    run.add_argument("--input", action="append", default=[], metavar="NAME=PATH",
                     help="bind a relation name to a CSV file (repeatable)")
    run.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="sortmerge")
    run.add_argument("--mode", choices=MODES, default=SEQUENTIAL)
    run.add_argument("--out", help="result CSV path (default: standard output)")
    run.add_argument("--stats", action="store_true",
                     help="print comparison and page counters to stderr")
    run.add_argument("--max-output-tuples", type=int,
                     default=JoinResultPolicy().max_output_tuples,
                     help="cap on any join output size")

    bench = sub.add_parser("bench", help="run the tuples x relations timing grid")
    bench.add_argument("--tuples", required=True, type=_int_list,
                       help="comma-separated tuple counts")
    bench.add_argument("--relations", required=True, type=_int_list,
                       help="comma-separated relation counts")
    pairing = bench.add_mutually_exclusive_group()
    pairing.add_argument("--paired", dest="pairing", action="store_const",
                         const=bench_mod.PAIRED, help="zip the two lists (default)")
    pairing.add_argument("--cross", dest="pairing", action="store_const",
                         const=bench_mod.CROSS, help="full cross product of the two lists")
    bench.set_defaults(pairing=bench_mod.PAIRED)
    bench.add_argument("--shapes", type=_name_list, default=list(bench_mod.SHAPES),
                       help="comma-separated subset of linear,bushy")
    bench.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="sortmerge")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--reps", type=int, default=5, help="timed repetitions per cell")
    bench.add_argument("--key-lo", type=int, default=None,
                       help="fixed key range lower bound (default: per-cell policy)")
    bench.add_argument("--key-hi", type=int, default=None,
                       help="fixed key range upper bound, exclusive")
    bench.add_argument("--max-output-tuples", type=int,
                       default=JoinResultPolicy().max_output_tuples)
    bench.add_argument("--out", required=True, help="results CSV path")

    report = sub.add_parser("report", help="render figures from a bench results CSV")
    report.add_argument("--results", required=True, help="bench results CSV path")
    report.add_argument("--out-dir", required=True, help="directory for the figure files")

    return parser


def _plan_from_args(args: argparse.Namespace):
    if args.expr is not None:
        return parse_plan(args.expr)
    if not args.relations:
        raise argparse.ArgumentTypeError("--shape needs --relations")
    builder = make_linear_plan if args.shape == "linear" else make_bushy_plan
    return builder(args.relations)


def _cmd_gen(args: argparse.Namespace) -> int:
    rel = generate_relation(args.name, args.count, args.key_lo, args.key_hi, args.seed)
    relation_to_csv(rel, args.out)
    print(f"wrote {rel.cardinality()} tuples to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_plan(args: argparse.Namespace) -> int:
    plan = _plan_from_args(args)
    print(plan_to_text(plan))
    print(rpn_to_text(to_rpn(plan)))
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    catalog = Catalog()
    for binding in args.input:
        name, sep, path = binding.partition("=")
        if not sep or not name or not path:
            raise argparse.ArgumentTypeError(f"--input needs NAME=PATH, got {binding!r}")
        catalog.add(relation_from_csv(path, name=name))
    program = to_rpn(_plan_from_args(args))
    ctx = EvalContext(
        catalog=catalog,
        algorithm=args.algorithm,
        policy=JoinResultPolicy(max_output_tuples=args.max_output_tuples),
        mode=args.mode,
    )
    result = eval_rpn(program, ctx)
    if args.out:
        relation_to_csv(result, args.out)
    else:
        sys.stdout.write(",".join(["key"] + [f"p{i}" for i in range(result.arity)]) + "\n")
        for row in result.rows:
            sys.stdout.write(",".join([str(row.key)] + [str(v) for v in row.payload]) + "\n")
    print(f"cardinality={result.cardinality()}", file=sys.stderr)
    if args.stats:
        print(
            f"tuple_comparisons={ctx.counters.tuple_comparisons} "
            f"page_reads={ctx.counters.page_reads}",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    if (args.key_lo is None) != (args.key_hi is None):
        raise argparse.ArgumentTypeError("--key-lo and --key-hi go together")
    key_range = None if args.key_lo is None else (args.key_lo, args.key_hi)
    config = bench_mod.BenchConfig(
        tuples_per_relation=args.tuples,
        relation_counts=args.relations,
        seed=args.seed,
        key_range=key_range,
        shapes=args.shapes,
        algorithm=args.algorithm,
        repetitions=args.reps,
        pairing=args.pairing,
        policy=JoinResultPolicy(max_output_tuples=args.max_output_tuples),
    )
    records = bench_mod.run_benchmark(config)
    bench_mod.write_results_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import render_figures  # defers the matplotlib import

    records = bench_mod.read_results_csv(args.results)
    for path in render_figures(records, args.out_dir):
        print(path)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "plan": _cmd_plan,
    "run": _cmd_run,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (PlanSyntaxError, CsvFormatError, MalformedProgramError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    except UnknownRelationError as exc:
        return _fail(str(exc), EXIT_CATALOG)
    except CardinalityLimitError as exc:
        return _fail(str(exc), EXIT_CAP)
    except InvalidRangeError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except argparse.ArgumentTypeError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail(str(exc), EXIT_IO)
    except EngineError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
