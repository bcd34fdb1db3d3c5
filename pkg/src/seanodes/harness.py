"""Differential testing: boundary values, an exact-integer oracle, report plumbing.

The oracle deliberately shares no code with :mod:`seanodes.values`; it works
on plain Python integers in the signed domain and wraps after every operation.
"""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from .equivalence import structurally_equivalent
from .interpreter import DEFAULT_STEP_LIMIT, ExecutionError, run, static_test
from .ir_model import (
    ILLEGAL, VOID, IntegerStamp, IRGraph, Program, TestCase, build_graph, default_stamp, node,
)
from .optimizer import PhaseError, parse_phases, run_phases
from .values import IntVal, Value, format_value, mk_int

BINARY = ("Add", "Sub", "Mul", "And", "Or", "Xor", "LeftShift", "RightShift",
          "UnsignedRightShift", "IntegerEquals", "IntegerLessThan")
FIXED = ("SignedDiv", "SignedRem")
UNARY = ("Negate", "Not", "Abs")
SUPPORTED_OPS = BINARY + FIXED + UNARY


class _DivByZero:
    def __repr__(self) -> str:
        return "DIVISION_BY_ZERO"


DIVISION_BY_ZERO = _DivByZero()


def boundary_values(bits: int) -> list[int]:
    """MIN, MIN+1, -2, -1, 0, 1, 2, MAX-1, MAX for a signed ``bits``-wide type."""
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    picks = [lo, lo + 1, -2, -1, 0, 1, 2, hi - 1, hi]
    return sorted({v for v in picks if lo <= v <= hi})


def _wrap(x: int, bits: int) -> int:
    half = 1 << (bits - 1)
    return (x + half) % (1 << bits) - half


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def oracle_eval(op: str, bits: int, args: Sequence[int]):
    """Java's result for ``op`` on signed ``bits``-wide operands, as a signed int."""
    a = args[0]
    b = args[1] if len(args) > 1 else None
    if op == "Add":
        return _wrap(a + b, bits)
    if op == "Sub":
        return _wrap(a - b, bits)
    if op == "Mul":
        return _wrap(a * b, bits)
    if op == "SignedDiv":
        return DIVISION_BY_ZERO if b == 0 else _wrap(_trunc_div(a, b), bits)
    if op == "SignedRem":
        return DIVISION_BY_ZERO if b == 0 else _wrap(a - b * _trunc_div(a, b), bits)
    if op == "And":
        return _wrap(a & b, bits)
    if op == "Or":
        return _wrap(a | b, bits)
    if op == "Xor":
        return _wrap(a ^ b, bits)
    if op == "LeftShift":
        return _wrap(a << (b & (bits - 1)), bits)
    if op == "RightShift":
        return a >> (b & (bits - 1))
    if op == "UnsignedRightShift":
        return _wrap((a % (1 << bits)) >> (b & (bits - 1)), bits)
    if op == "Negate":
        return _wrap(-a, bits)
    if op == "Not":
        return ~a
    if op == "Abs":
        return _wrap(abs(a), bits)
    if op == "IntegerEquals":
        return int(a == b)
    if op == "IntegerLessThan":
        return int(a < b)
    raise ValueError(f"unsupported operator {op!r}")


def method_name(op: str, bits: int) -> str:
    return f"{op[0].lower()}{op[1:]}Node{bits}"


def op_graph(op: str, bits: int) -> IRGraph:
    """A one-operator method: Start -> [fixed op] -> Return(op(P0[, P1]))."""
    st = default_stamp(bits)
    result_stamp = default_stamp(32) if op in ("IntegerEquals", "IntegerLessThan") else st
    if op in UNARY:
        return build_graph([
            (0, node("Start", frameState=2, next=4), VOID),
            (1, node("Parameter", index=0), st),
            (2, node("FrameState"), ILLEGAL),
            (3, node(op, x=1), st),
            (4, node("Return", value=3), st),
        ])
    if op in FIXED:
        return build_graph([
            (0, node("Start", frameState=3, next=4), VOID),
            (1, node("Parameter", index=0), st),
            (2, node("Parameter", index=1), st),
            (3, node("FrameState"), ILLEGAL),
            (4, node(op, x=1, y=2, next=5), st),
            (5, node("Return", value=4), st),
        ])
    if op in BINARY:
        op_stamp = VOID if op in ("IntegerEquals", "IntegerLessThan") else st
        return build_graph([
            (0, node("Start", frameState=3, next=5), VOID),
            (1, node("Parameter", index=0), st),
            (2, node("Parameter", index=1), st),
            (3, node("FrameState"), ILLEGAL),
            (4, node(op, x=1, y=2), op_stamp),
            (5, node("Return", value=4), result_stamp),
        ])
    raise ValueError(f"unsupported operator {op!r}")


def gen_op_tests(op: str, bits: int) -> Program:
    if op not in SUPPORTED_OPS:
        raise ValueError(f"unsupported operator {op!r}")
    if bits not in (32, 64):
        raise ValueError(f"operator tests need 32 or 64 bits, got {bits}")
    name = method_name(op, bits)
    values = boundary_values(bits)
    if op in UNARY:
        inputs = [(a,) for a in values]
    else:
        seconds = [v for v in values if v != 0] if op in FIXED else values
        inputs = list(itertools.product(values, seconds))
    out_bits = 32 if op in ("IntegerEquals", "IntegerLessThan") else bits
    tests = []
    for args in inputs:
        expect = oracle_eval(op, bits, args)
        tests.append(TestCase(name, tuple(mk_int(bits, a) for a in args), mk_int(out_bits, expect)))
    return Program({name: op_graph(op, bits)}, {}, tests)


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class DiffRow:
    method: str
    args: tuple[str, ...]
    source: str          # "oracle" | "embedded" | "pre-optimization" | "golden"
    expected: str
    actual: str
    verdict: str         # "pass" | "fail" | "skip"
    detail: str = ""


@dataclass
class DiffReport:
    rows: list[DiffRow] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.verdict == "pass" for r in self.rows)

    @property
    def failed(self) -> int:
        return sum(r.verdict == "fail" for r in self.rows)

    @property
    def skipped(self) -> int:
        return sum(r.verdict == "skip" for r in self.rows)

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def failures(self) -> list[DiffRow]:
        return [r for r in self.rows if r.verdict == "fail"]

    def extend(self, other: DiffReport) -> DiffReport:
        return DiffReport(self.rows + other.rows)

    def summary(self) -> str:
        return (f"{self.total} tests: {self.passed} passed, {self.failed} failed, "
                f"{self.skipped} skipped")

    def to_text(self, verbose: bool = False) -> str:
        lines = []
        for r in self.rows:
            if verbose or r.verdict != "pass":
                args = ", ".join(r.args)
                line = (f"{r.verdict.upper():4} {r.method}({args}) [{r.source}] "
                        f"expected {r.expected}, got {r.actual}")
                if r.detail:
                    line += f"  -- {r.detail}"
                lines.append(line)
        lines.append(self.summary())
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({
            "summary": {"total": self.total, "passed": self.passed,
                        "failed": self.failed, "skipped": self.skipped},
            "rows": [asdict(r) for r in self.rows],
        }, indent=2, sort_keys=True)


def _value_key(v: Value) -> tuple:
    return (v.bits, v.raw) if isinstance(v, IntVal) else (0, -1)


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_difftest(p: Program, jobs: int = 1, seed: int | None = None,
                 source: str = "embedded", step_limit: int = DEFAULT_STEP_LIMIT) -> DiffReport:
    """Run every embedded test through :func:`static_test`."""
    order = list(enumerate(p.tests))
    if seed is not None:
        random.Random(seed).shuffle(order)

    def one(item):
        idx, t = item
        res = static_test(p, t.method, t.args, t.expect, step_limit)
        actual = res.error if res.error else format_value(res.actual)
        row = DiffRow(t.method, tuple(format_value(a) for a in t.args), source,
                      format_value(t.expect), actual, "pass" if res.passed else "fail",
                      "" if res.passed or res.error else _width_note(t.expect, res.actual))
        return (t.method, tuple(_value_key(a) for a in t.args), idx), row

    keyed = _map(one, order, jobs)
    keyed.sort(key=lambda kr: kr[0])
    return DiffReport([row for _, row in keyed])


def _width_note(expected: Value, actual: Value | None) -> str:
    if isinstance(expected, IntVal) and isinstance(actual, IntVal) and expected.bits != actual.bits:
        return f"bit width {actual.bits} != expected {expected.bits}"
    return ""


# -- phase commutation -------------------------------------------------------

def parameter_widths(g: IRGraph) -> list[int]:
    widths: dict[int, int] = {}
    for nid in g.ids_of("Parameter"):
        st = g.stamp(nid)
        widths[g.node(nid)["index"]] = st.bits if isinstance(st, IntegerStamp) else 32
    return [widths.get(i, 32) for i in range(max(widths, default=-1) + 1)]


def boundary_inputs(g: IRGraph, cap: int = 6561, seed: int = 0) -> list[tuple[Value, ...]]:
    """All boundary-value assignments to the parameters (sampled past ``cap``)."""
    pools = [[mk_int(w, v) for v in boundary_values(w)] for w in parameter_widths(g)]
    combos = list(itertools.product(*pools))
    if len(combos) > cap:
        combos = random.Random(seed).sample(combos, cap)
    return combos


def _outcome(p: Program, method: str, args: Sequence[Value], step_limit: int) -> str:
    try:
        return format_value(run(p, method, args, step_limit))
    except ExecutionError as e:
        return f"error:{type(e).__name__}"


def run_commutation_test(p: Program, phases: Sequence[str] | str, jobs: int = 1,
                         methods: Iterable[str] | None = None,
                         step_limit: int = DEFAULT_STEP_LIMIT,
                         ignore_stamps: bool = False) -> DiffReport:
    """Check each method's optimized graph against its golden and its own semantics."""
    phase_list = parse_phases(phases)
    label = "+".join(phase_list) or "identity"
    rows: list[DiffRow] = []
    for name in sorted(methods or p.methods):
        g = p.methods[name]
        try:
            opt = run_phases(g, phase_list)
        except PhaseError as e:
            rows.append(DiffRow(name, (), "pre-optimization", "valid graph", "invalid graph",
                                "fail", str(e)))
            continue
        golden = p.golden(name, phase_list)
        if golden is not None:
            eq = structurally_equivalent(opt, golden, ignore_stamps)
            rows.append(DiffRow(name, (label,), "golden", "equivalent",
                                "equivalent" if eq else "different",
                                "pass" if eq else "fail", "" if eq else eq.report()))
        optimized = Program({**p.methods, name: opt}, p.fields)
        inputs: list[tuple[Value, ...]] = [t.args for t in p.tests if t.method == name]
        seen = {tuple(_value_key(a) for a in args) for args in inputs}
        for args in boundary_inputs(g):
            key = tuple(_value_key(a) for a in args)
            if key not in seen:
                seen.add(key)
                inputs.append(args)

        def one(args, name=name, optimized=optimized):
            before = _outcome(p, name, args, step_limit)
            after = _outcome(optimized, name, args, step_limit)
            return DiffRow(name, tuple(format_value(a) for a in args), "pre-optimization",
                           before, after, "pass" if before == after else "fail", label)

        rows.extend(_map(one, inputs, jobs))
    return DiffReport(rows)
