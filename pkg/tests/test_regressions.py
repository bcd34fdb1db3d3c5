"""Named regressions for known operator and interpreter bugs.

Each test checks one historical failure. Every bug has a buggy twin below,
and ``test_buggy_variant_is_caught`` shows that the same check fails against it.
To watch a single regression go red, set ``SEANODES_BUGGY`` to its name:

    SEANODES_BUGGY=xor_masking pytest tests/test_regressions.py -k xor

Names: signed_division, div_min_by_minus_one, xor_masking, right_shift_positive,
right_shift_negative, signed_div_ordering, signed_less_than_32, sign_extend_255,
shift_unary_promotion, small_parameter_widening, boolean_return_coercion,
function_results.
"""

from __future__ import annotations

import os

import pytest

import seanodes.interpreter as interp
from seanodes import corpus
from seanodes.interpreter import UseBeforeExecution, run_graph
from seanodes.ir_model import VOID, Program, build_graph, default_stamp, node
from seanodes.values import (
    WORD_MASK, IntVal, eval_compare, eval_convert, eval_divrem, eval_shift, mask, mk_int, signed,
)

BUGGY = set(filter(None, os.environ.get("SEANODES_BUGGY", "").split(",")))
D = default_stamp()


def i32(n):
    return mk_int(32, n)


# -- buggy twins ---------------------------------------------------------------

def unsigned_div(op, a, b):
    return IntVal(a.bits, (a.raw // b.raw) & mask(a.bits))


def div_without_narrowing(op, a, b):
    q = abs(signed(a)) // abs(signed(b))
    q = q if (signed(a) < 0) == (signed(b) < 0) else -q
    return mk_int(64, q)  # computed in a 64-bit word and never narrowed back


def xor_unmasked(a, b):
    return (signed(a) ^ signed(b)) & WORD_MASK  # sign bits leak above the width


def shift_fill_ones(op, a, b):
    n = b.raw & (a.bits - 1)
    ones = mask(a.bits) & ~(mask(a.bits) >> n)
    return IntVal(a.bits, (a.raw >> n) | ones)  # sign bits inserted whatever the sign


def shift_logical(op, a, b):
    return IntVal(a.bits, a.raw >> (b.raw & (a.bits - 1)))


def less_than_unsigned(op, a, b):
    return IntVal(1, int(a.raw < b.raw))


def sign_extend_off_by_one(op, in_bits, out_bits, a):
    v = a.raw - (1 << in_bits) if a.raw >= (1 << in_bits) else a.raw
    return mk_int(out_bits, v)


def shift_binary_promotion(op, a, b):
    if a.bits < b.bits:
        a = eval_convert("SignExtend", a.bits, b.bits, a)
    return eval_shift(op, a, b)


class _EagerFixed(dict):
    """Fixed-node results computed on demand, as if the node floated."""

    def __init__(self, graph, state):
        super().__init__()
        self.graph, self.state = graph, state

    def __contains__(self, nid):
        return True

    def __missing__(self, nid):
        n = self.graph.node(nid)
        args = [interp.eval_expr(self.graph, self.state, i) for i in n.inputs()]
        return interp.apply_operator(n.kind, n, args)


class _SharedInvokeSlot(dict):
    """Every invoke writes the same result slot."""

    def __setitem__(self, nid, value):
        super().__setitem__("result", value)

    def __getitem__(self, nid):
        return super().__getitem__("result")

    def __contains__(self, nid):
        return dict.__contains__(self, "result")


def run_with_fixed(p, method, args, fixed_factory):
    s = interp.initial_state(p, method, args)

    def install(frame):
        frame.fixed = fixed_factory(frame.graph, s)

    install(s.frames[0])

    class Frames(list):
        def append(self, frame):
            install(frame)
            super().append(frame)

    s.frames = Frames(s.frames)
    while True:
        r = interp.step(p, s)
        if isinstance(r, interp.Finished):
            return r.value


def plain_run(p, method, args):
    return interp.run(p, method, args)


def run_unwidened(p, method, args):
    saved = interp.widen_args
    interp.widen_args = lambda g, a: list(a)
    try:
        return interp.run(p, method, args)
    finally:
        interp.widen_args = saved


def run_no_bool_coercion(p, method, args):
    s = interp.initial_state(p, method, args)
    while True:
        frame = s.frame
        n = frame.graph.node(frame.current)
        if n.kind == "Return" and len(s.frames) == 1:
            return interp.eval_expr(frame.graph, s, n["value"])
        interp.step(p, s)


# -- checks ---------------------------------------------------------------------
# Each takes the implementation under test and asserts the correct behaviour.

def check_signed_division(divrem):
    assert divrem("SignedDiv", i32(-8), i32(2)) == i32(-4)


def check_div_min_by_minus_one(divrem):
    assert divrem("SignedDiv", i32(-2**31), i32(-1)) == IntVal(32, 2**31)


def check_xor_masking(xor):
    assert xor(i32(-1), i32(1)) == 4294967294


def check_right_shift_positive(shift):
    assert shift("RightShift", i32(8), i32(1)) == i32(4)


def check_right_shift_negative(shift):
    r = shift("RightShift", i32(-8), i32(1))
    assert r == IntVal(32, 4294967292)


def check_signed_div_ordering(runner):
    # the Return reads the division before control reaches it
    misordered = Program({"m": build_graph([
        (0, node("Start", next=5), VOID),
        (1, node("Parameter", index=0), D),
        (2, node("Parameter", index=1), D),
        (4, node("SignedDiv", x=1, y=2, next=5), D),
        (5, node("Return", value=4), D),
    ])})
    with pytest.raises(UseBeforeExecution):
        runner(misordered, "m", [i32(7), i32(2)])
    assert runner(corpus.load("helper_call"), "divPlusOne", [i32(7), i32(2)]) == i32(4)


def check_signed_less_than_32(compare):
    assert compare("IntegerLessThan", i32(-1), i32(1)) == IntVal(1, 1)
    assert compare("IntegerLessThan", i32(2**31 - 1), i32(-2**31)) == IntVal(1, 0)


def check_sign_extend_255(convert):
    assert convert("SignExtend", 8, 32, IntVal(8, 255)) == IntVal(32, 4294967295)


def check_shift_unary_promotion(shift):
    # int << long: the result stays int and the distance is masked to 5 bits
    assert shift("LeftShift", i32(1), mk_int(64, 33)) == i32(2)


def check_small_parameter_widening(runner):
    p = corpus.load("helper_call")
    assert runner(p, "byteIdentity", [IntVal(8, 255)]) == i32(-1)


def check_boolean_return_coercion(runner):
    p = corpus.load("helper_call")
    assert runner(p, "isLess", [i32(-1), i32(1)]) == i32(1)
    assert runner(p, "callIsLess", [i32(-7), i32(3)]) == i32(1)


def check_function_results(runner):
    # addThree(a) - addThree(b) needs both call results kept apart
    g = build_graph([
        (0, node("Start", next=3), VOID),
        (1, node("Parameter", index=0), D),
        (2, node("Parameter", index=1), D),
        (3, node("Invoke", method="addThree", argList=(1,), next=4), D),
        (4, node("Invoke", method="addThree", argList=(2,), next=6), D),
        (5, node("Sub", x=3, y=4), D),
        (6, node("Return", value=5), D),
    ])
    p = corpus.load("helper_call")
    p = Program({**p.methods, "twoCalls": g})
    assert runner(p, "twoCalls", [i32(10), i32(4)]) == i32(6)


def _xor(a, b):
    from seanodes.values import eval_binary
    return eval_binary("Xor", a, b).raw


REGRESSIONS = {
    "signed_division": (check_signed_division, eval_divrem, unsigned_div),
    "div_min_by_minus_one": (check_div_min_by_minus_one, eval_divrem, div_without_narrowing),
    "xor_masking": (check_xor_masking, _xor, xor_unmasked),
    "right_shift_positive": (check_right_shift_positive, eval_shift, shift_fill_ones),
    "right_shift_negative": (check_right_shift_negative, eval_shift, shift_logical),
    "signed_div_ordering": (check_signed_div_ordering, plain_run,
                            lambda p, m, a: run_with_fixed(p, m, a, _EagerFixed)),
    "signed_less_than_32": (check_signed_less_than_32, eval_compare, less_than_unsigned),
    "sign_extend_255": (check_sign_extend_255, eval_convert, sign_extend_off_by_one),
    "shift_unary_promotion": (check_shift_unary_promotion,
                              lambda op, a, b: interp.apply_operator(op, None, [a, b]),
                              lambda op, a, b: shift_binary_promotion(op, a, b)),
    "small_parameter_widening": (check_small_parameter_widening, plain_run, run_unwidened),
    "boolean_return_coercion": (check_boolean_return_coercion, plain_run, run_no_bool_coercion),
    "function_results": (check_function_results, plain_run,
                         lambda p, m, a: run_with_fixed(p, m, a, lambda g, s: _SharedInvokeSlot())),
}


def impl(name):
    check, good, bad = REGRESSIONS[name]
    return bad if name in BUGGY else good


def test_signed_division():
    check_signed_division(impl("signed_division"))


def test_div_min_by_minus_one():
    check_div_min_by_minus_one(impl("div_min_by_minus_one"))


def test_xor_masking():
    check_xor_masking(impl("xor_masking"))


def test_right_shift_positive():
    check_right_shift_positive(impl("right_shift_positive"))


def test_right_shift_negative():
    check_right_shift_negative(impl("right_shift_negative"))


def test_signed_div_ordering():
    check_signed_div_ordering(impl("signed_div_ordering"))


def test_signed_less_than_32():
    check_signed_less_than_32(impl("signed_less_than_32"))


def test_sign_extend_255():
    check_sign_extend_255(impl("sign_extend_255"))


def test_shift_unary_promotion():
    check_shift_unary_promotion(impl("shift_unary_promotion"))


def test_small_parameter_widening():
    check_small_parameter_widening(impl("small_parameter_widening"))


def test_boolean_return_coercion():
    check_boolean_return_coercion(impl("boolean_return_coercion"))


def test_function_results():
    check_function_results(impl("function_results"))


@pytest.mark.parametrize("name", sorted(REGRESSIONS))
def test_buggy_variant_is_caught(name):
    check, _, bad = REGRESSIONS[name]
    with pytest.raises((AssertionError, pytest.fail.Exception)):
        check(bad)


def test_regressions_run_end_to_end_through_interpreter():
    # the operator regressions also hold through a whole graph run
    g = build_graph([
        (0, node("Start", next=4), VOID),
        (1, node("Parameter", index=0), D),
        (2, node("Parameter", index=1), D),
        (4, node("SignedDiv", x=1, y=2, next=5), D),
        (5, node("Return", value=4), D),
    ])
    assert run_graph(g, [i32(-8), i32(2)]) == i32(-4)
    assert run_graph(g, [i32(-2**31), i32(-1)]) == i32(-2**31)
