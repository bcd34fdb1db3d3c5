"""Executable semantics for IR programs.

Control flow is stepped one node at a time along successor edges; data-flow
expressions are evaluated on demand by following input edges backwards.
Nodes that sit on the control path but also produce a value (SignedDiv,
SignedRem, Invoke) store their result in ``Frame.fixed`` when executed, and
expressions read it from there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import values as V
from .ir_model import IntegerStamp, IRGraph, Program
from .values import UNDEF, IntVal, Value

DEFAULT_STEP_LIMIT = 1_000_000


class ExecutionError(Exception):
    """Execution could not complete."""


class DivisionByZeroError(ExecutionError):
    pass


class StepLimitExceeded(ExecutionError):
    pass


class UseBeforeExecution(ExecutionError):
    """A fixed node's value was read before control flow reached it."""


@dataclass
class Frame:
    method: str
    graph: IRGraph
    params: list[Value]
    current: int
    fixed: dict[int, Value] = field(default_factory=dict)
    phis: dict[int, Value] = field(default_factory=dict)
    last_end: dict[int, int] = field(default_factory=dict)
    caller_invoke: int | None = None


@dataclass
class ExecState:
    frames: list[Frame]
    static_fields: dict[str, Value]
    steps: int = 0
    step_limit: int = DEFAULT_STEP_LIMIT

    @property
    def frame(self) -> Frame:
        return self.frames[-1]

    @property
    def current(self) -> int:
        return self.frame.current


@dataclass(frozen=True)
class Finished:
    value: Value


# -- numeric promotion -------------------------------------------------------

def _widen(v: Value, bits: int) -> Value:
    if not isinstance(v, IntVal) or v.bits >= bits:
        return v
    # booleans are 0/1, every other small integer is signed
    op = "ZeroExtend" if v.bits == 1 else "SignExtend"
    return V.eval_convert(op, v.bits, bits, v)


def binary_promote(a: Value, b: Value) -> tuple[Value, Value]:
    """Widen both operands to a common width of at least 32 bits.

    Equal widths are left alone except byte/short, so 1-bit logic stays 1-bit.
    """
    if not (isinstance(a, IntVal) and isinstance(b, IntVal)):
        return a, b
    if a.bits == b.bits and a.bits not in (8, 16):
        return a, b
    target = max(32, a.bits, b.bits)
    return _widen(a, target), _widen(b, target)


def unary_promote(a: Value) -> Value:
    if isinstance(a, IntVal) and a.bits in (8, 16):
        return _widen(a, 32)
    return a


def apply_operator(kind: str, n, args: Sequence[Value]) -> Value:
    """Evaluate a pure operator node over already-computed input values."""
    if kind in V.BINARY_OPS:
        return V.eval_binary(kind, *binary_promote(*args))
    if kind in V.DIVREM_OPS:
        try:
            return V.eval_divrem(kind, *binary_promote(*args))
        except V.DivisionByZero as e:
            raise DivisionByZeroError(str(e)) from None
    if kind in V.SHIFT_OPS:
        return V.eval_shift(kind, unary_promote(args[0]), args[1])
    if kind in V.UNARY_OPS:
        return V.eval_unary(kind, unary_promote(args[0]))
    if kind in V.COMPARE_OPS:
        return V.eval_compare(kind, *binary_promote(*args))
    if kind in V.CONVERT_OPS:
        return V.eval_convert(kind, n["inBits"], n["outBits"], args[0])
    raise ExecutionError(f"{kind} is not an operator")


PURE_OPERATORS = frozenset(
    V.BINARY_OPS + V.SHIFT_OPS + V.UNARY_OPS + V.COMPARE_OPS + V.CONVERT_OPS)


# -- expression evaluation ---------------------------------------------------

def eval_expr(g: IRGraph, s: ExecState, nid: int, _memo: dict[int, Value] | None = None) -> Value:
    memo = {} if _memo is None else _memo
    if nid in memo:
        return memo[nid]
    n = g.node(nid)
    k = n.kind
    f = s.frame
    if k == "Constant":
        r = n["value"]
    elif k == "Parameter":
        i = n["index"]
        if i >= len(f.params):
            raise ExecutionError(f"node {nid}: parameter {i} not supplied")
        r = f.params[i]
    elif k == "ValuePhi":
        if nid not in f.phis:
            raise ExecutionError(f"node {nid}: phi read before its merge was entered")
        r = f.phis[nid]
    elif k in ("SignedDiv", "SignedRem", "Invoke"):
        if nid not in f.fixed:
            raise UseBeforeExecution(
                f"node {nid}: data-flow use of {k} before control-flow execution")
        r = f.fixed[nid]
    elif k == "LoadField":
        name = n["field"]
        if name not in s.static_fields:
            raise ExecutionError(f"node {nid}: unknown static field {name!r}")
        r = s.static_fields[name]
    elif k == "Conditional":
        cond = eval_expr(g, s, n["condition"], memo)
        arm = n["trueValue"] if V.is_true(cond) else n["falseValue"]
        r = eval_expr(g, s, arm, memo)
    elif k in PURE_OPERATORS:
        r = apply_operator(k, n, [eval_expr(g, s, i, memo) for i in n.inputs()])
    else:
        raise ExecutionError(f"node {nid}: {k} has no value")
    memo[nid] = r
    return r


# -- control flow ------------------------------------------------------------

def initial_state(p: Program, method: str, args: Sequence[Value],
                  step_limit: int = DEFAULT_STEP_LIMIT) -> ExecState:
    if method not in p.methods:
        raise ExecutionError(f"unknown method {method!r}")
    g = p.methods[method]
    return ExecState([Frame(method, g, widen_args(g, args), g.start)],
                     dict(p.fields), step_limit=step_limit)


def widen_args(g: IRGraph, args: Sequence[Value]) -> list[Value]:
    """byte/short/char arguments arrive as 32-bit ints, like on the JVM."""
    stamps = {g.node(i)["index"]: g.stamp(i) for i in g.ids_of("Parameter")}
    out = []
    for i, a in enumerate(args):
        st = stamps.get(i)
        target = st.bits if isinstance(st, IntegerStamp) and st.bits >= 32 else 32
        if isinstance(a, IntVal) and a.bits < 32:
            a = _widen(a, target)
        out.append(a)
    return out


def _enter_merge(s: ExecState, end_id: int, merge_id: int) -> None:
    f = s.frame
    g = f.graph
    merge = g.node(merge_id)
    idx = merge["endList"].index(end_id)
    memo: dict[int, Value] = {}
    # all phis read the pre-transition state, then are written together
    new = {pid: eval_expr(g, s, g.node(pid)["inputList"][idx], memo)
           for pid in g.phis_of(merge_id)}
    f.phis.update(new)
    f.last_end[merge_id] = idx
    f.current = merge["next"]


def step(p: Program, s: ExecState) -> ExecState | Finished:
    """Perform one control-flow transition, mutating and returning ``s``."""
    s.steps += 1
    if s.steps > s.step_limit:
        raise StepLimitExceeded(f"step limit {s.step_limit} exceeded")
    f = s.frame
    g = f.graph
    nid = f.current
    n = g.node(nid)
    k = n.kind

    if k in ("Start", "Begin", "LoopExit", "Merge", "LoopBegin"):
        f.current = n["next"]
    elif k == "If":
        cond = eval_expr(g, s, n["condition"])
        if not isinstance(cond, IntVal):
            raise ExecutionError(f"node {nid}: If condition is undefined")
        f.current = n["trueSucc"] if V.is_true(cond) else n["falseSucc"]
    elif k in ("End", "LoopEnd"):
        owner = g.owner_of_end(nid)
        if owner is None:
            raise ExecutionError(f"node {nid}: {k} with no owning merge")
        _enter_merge(s, nid, owner)
    elif k in ("SignedDiv", "SignedRem"):
        a = eval_expr(g, s, n["x"])
        b = eval_expr(g, s, n["y"])
        f.fixed[nid] = apply_operator(k, n, [a, b])
        f.current = n["next"]
    elif k == "StoreField":
        s.static_fields[n["field"]] = eval_expr(g, s, n["value"])
        f.current = n["next"]
    elif k == "Invoke":
        target = n["method"]
        if target not in p.methods:
            raise ExecutionError(f"node {nid}: unresolved invoke target {target!r}")
        memo: dict[int, Value] = {}
        args = [eval_expr(g, s, a, memo) for a in n["argList"]]
        callee = p.methods[target]
        s.frames.append(Frame(target, callee, widen_args(callee, args), callee.start,
                              caller_invoke=nid))
    elif k == "Return":
        result = UNDEF if n["value"] is None else eval_expr(g, s, n["value"])
        s.frames.pop()
        if not s.frames:
            if isinstance(result, IntVal) and result.bits == 1:
                result = V.eval_convert("ZeroExtend", 1, 32, result)
            return Finished(result)
        caller = s.frame
        caller.fixed[f.caller_invoke] = result
        caller.current = caller.graph.node(f.caller_invoke)["next"]
    else:
        raise ExecutionError(f"node {nid}: {k} is not a control-flow node")
    return s


def run(p: Program, method: str, args: Sequence[Value],
        step_limit: int = DEFAULT_STEP_LIMIT) -> Value:
    s = initial_state(p, method, args, step_limit)
    while True:
        r = step(p, s)
        if isinstance(r, Finished):
            return r.value


def run_graph(g: IRGraph, args: Sequence[Value], step_limit: int = DEFAULT_STEP_LIMIT,
              p: Program | None = None, method: str = "main") -> Value:
    """Run a single graph, optionally inside ``p`` for callees and fields."""
    base = Program({}) if p is None else p
    prog = Program({**base.methods, method: g}, base.fields)
    return run(prog, method, args, step_limit)


@dataclass(frozen=True)
class TestResult:
    method: str
    args: tuple[Value, ...]
    expected: Value
    actual: Value | None
    passed: bool
    error: str | None = None

    __test__ = False


def static_test(p: Program, method: str, args: Sequence[Value], expected: Value,
                step_limit: int = DEFAULT_STEP_LIMIT) -> TestResult:
    try:
        actual = run(p, method, args, step_limit)
    except ExecutionError as e:
        return TestResult(method, tuple(args), expected, None, False, f"{type(e).__name__}: {e}")
    return TestResult(method, tuple(args), expected, actual, actual == expected)
