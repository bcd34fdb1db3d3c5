"""Command line entry point: run, opt, equiv, gentests, difftest, corpus."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus
from .equivalence import structurally_equivalent
from .harness import SUPPORTED_OPS, gen_op_tests, run_commutation_test, run_difftest
from .interpreter import DEFAULT_STEP_LIMIT, ExecutionError, run
from .ir_model import Program
from .optimizer import PhaseError, parse_phases, run_phases
from .textformat import ParseError, load_program, save_program, serialize_program
from .values import format_value, mk_int

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _value(text: str):
    try:
        bits, _, num = text.partition(":")
        return mk_int(int(bits), int(num, 0))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected BITS:VALUE, got {text!r}") from None


def _load(path: str) -> Program:
    if path.startswith("corpus:"):
        return corpus.load(path[len("corpus:"):])
    return load_program(path)


def _method(p: Program, name: str | None) -> str:
    if name:
        if name not in p.methods:
            raise KeyError(f"no method {name!r}; have {sorted(p.methods)}")
        return name
    if len(p.methods) != 1:
        raise KeyError(f"--method is required; have {sorted(p.methods)}")
    return next(iter(p.methods))


def cmd_run(args) -> int:
    p = _load(args.file)
    result = run(p, _method(p, args.method), args.arg, args.step_limit)
    print(format_value(result))
    if args.expect is not None and result != args.expect:
        print(f"expected {format_value(args.expect)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_opt(args) -> int:
    p = _load(args.file)
    phases = parse_phases(args.phase)
    names = [_method(p, args.method)] if args.method or len(p.methods) == 1 else list(p.methods)
    methods = dict(p.methods)
    for name in names:
        methods[name] = run_phases(methods[name], phases)
    out = Program(methods, p.fields, p.tests)
    if args.out:
        save_program(out, args.out)
    else:
        sys.stdout.write(serialize_program(out))
    return EXIT_OK


def cmd_equiv(args) -> int:
    a, b = _load(args.file_a), _load(args.file_b)
    name = args.method or _method(a, None)
    ga = a.methods[name]
    gb = b.methods[args.method_b or name]
    result = structurally_equivalent(ga, gb, args.ignore_stamps)
    if not result:
        print(result.report(), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_gentests(args) -> int:
    p = gen_op_tests(args.op, args.bits)
    if args.out:
        save_program(p, args.out)
    else:
        sys.stdout.write(serialize_program(p))
    return EXIT_OK


def cmd_difftest(args) -> int:
    p = _load(args.file)
    report = run_difftest(p, jobs=args.jobs, seed=args.seed, step_limit=args.step_limit)
    if args.phases:
        report = report.extend(run_commutation_test(p, args.phases, jobs=args.jobs,
                                                    step_limit=args.step_limit,
                                                    ignore_stamps=args.ignore_stamps))
    print(report.to_json() if args.json else report.to_text(args.verbose))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_corpus(args) -> int:
    if args.name is None:
        print("\n".join(corpus.names()))
        return EXIT_OK
    text = corpus.text(args.name)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seanodes", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    file_help = "program file (or corpus:NAME for a shipped program)"

    p = sub.add_parser("run", help="execute a method")
    p.add_argument("file", help=file_help)
    p.add_argument("--method")
    p.add_argument("--arg", type=_value, action="append", default=[], metavar="BITS:VALUE")
    p.add_argument("--expect", type=_value, metavar="BITS:VALUE")
    p.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("opt", help="optimize methods and write the program")
    p.add_argument("file", help=file_help)
    p.add_argument("--method")
    p.add_argument("--phase", required=True, help="comma-separated, e.g. condelim,canonicalize")
    p.add_argument("--out")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("equiv", help="structural equivalence modulo node ids")
    p.add_argument("file_a", help=file_help)
    p.add_argument("file_b", help=file_help)
    p.add_argument("--method")
    p.add_argument("--method-b", help="method name in the second file, if different")
    p.add_argument("--ignore-stamps", action="store_true")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("gentests", help="generate boundary-value operator tests")
    p.add_argument("--op", required=True, choices=SUPPORTED_OPS)
    p.add_argument("--bits", type=int, required=True, choices=(32, 64))
    p.add_argument("--out")
    p.set_defaults(func=cmd_gentests)

    p = sub.add_parser("difftest", help="run embedded tests and phase commutation checks")
    p.add_argument("file", help=file_help)
    p.add_argument("--phases", help="also check semantics preservation under these phases")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, help="shuffle execution order (report stays sorted)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--verbose", "-v", action="store_true")
    p.add_argument("--ignore-stamps", action="store_true")
    p.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)
    p.set_defaults(func=cmd_difftest)

    p = sub.add_parser("corpus", help="list or export shipped programs")
    p.add_argument("name", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ExecutionError, PhaseError, KeyError, ValueError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
