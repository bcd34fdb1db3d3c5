"""Brute-force reference checks shared by the unit and acceptance tests."""

from __future__ import annotations

import itertools

from seanodes.ir_model import IntegerStamp, node
from seanodes.stamp_algebra import TriState, fold_compare, refine_by_condition

BITS = 4
LO, HI = -(1 << (BITS - 1)), (1 << (BITS - 1)) - 1
COMPARES = {"IntegerLessThan": lambda a, b: a < b, "IntegerEquals": lambda a, b: a == b}


def all_stamps(bits: int = BITS) -> list[IntegerStamp]:
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    return [IntegerStamp(bits, a, b) for a in range(lo, hi + 1) for b in range(a, hi + 1)]


def members(s: IntegerStamp) -> range:
    return range(s.lo, s.hi + 1)


def fold_contradictions(stamps=None) -> list[tuple]:
    """Every (op, a, b) where fold_compare claims a verdict some member pair violates."""
    stamps = stamps or all_stamps()
    bad = []
    for op, f in COMPARES.items():
        for a, b in itertools.product(stamps, stamps):
            verdict = fold_compare(op, a, b)
            if verdict is TriState.UNKNOWN:
                continue
            want = verdict is TriState.ALWAYS_TRUE
            if any(f(x, y) != want for x in members(a) for y in members(b)):
                bad.append((op, a, b, verdict))
    return bad


def fold_imprecisions(stamps=None) -> list[tuple]:
    """Pairs where every member pair agrees but fold_compare says UNKNOWN."""
    stamps = stamps or all_stamps()
    missed = []
    for op, f in COMPARES.items():
        for a, b in itertools.product(stamps, stamps):
            outcomes = {f(x, y) for x in members(a) for y in members(b)}
            if len(outcomes) == 1 and fold_compare(op, a, b) is TriState.UNKNOWN:
                missed.append((op, a, b))
    return missed


def refine_contradictions(strict: bool, stamps=None, originals=None) -> list[tuple]:
    """Refinement results that exclude a value the condition admits.

    ``originals`` maps a current stamp to the candidate base stamps it may have
    been narrowed from; by default the unrestricted stamp and the stamp itself.
    """
    stamps = stamps or all_stamps()
    full = IntegerStamp(BITS, LO, HI)
    bad = []
    for op, f in COMPARES.items():
        cond = node(op, x=0, y=1)
        for cx, cy in itertools.product(stamps, stamps):
            bases = [(cx, cy)] if strict else [(cx, cy), (full, full), (full, cy), (cx, full)]
            sat = {p: [(x, y) for x in members(cx) for y in members(cy) if f(x, y) == p]
                   for p in (True, False)}
            for polarity in (True, False):
                for bx, by in bases:
                    cur = {0: cx, 1: cy}.get
                    orig = None if strict else {0: bx, 1: by}.get
                    r = refine_by_condition(cond, polarity, cur, orig)
                    pairs = sat[polarity]
                    if r is None:
                        if pairs:
                            bad.append((op, polarity, cx, cy, bx, by, "claimed empty"))
                        continue
                    got = dict(r)
                    for x, y in pairs:
                        if (0 in got and not got[0].contains(x)) or \
                           (1 in got and not got[1].contains(y)):
                            bad.append((op, polarity, cx, cy, bx, by, (x, y)))
                            break
    return bad


def mutations(g):
    """One-node edits that must break structural equivalence: (label, graph)."""
    from seanodes.ir_model import ILLEGAL, VOID
    from seanodes.values import IntVal

    out = []
    swap = {"Add": "Sub", "Sub": "Add", "And": "Or", "Or": "And", "LeftShift": "RightShift",
            "IntegerLessThan": "IntegerEquals", "IntegerEquals": "IntegerLessThan"}
    for nid, (n, s) in g.nodes.items():
        if n.kind == "Constant" and isinstance(n["value"], IntVal):
            v = n["value"]
            out.append((f"constant {nid}", g.with_nodes(
                {nid: (n.replace(value=IntVal(v.bits, v.raw ^ 1)), s)})))
        if n.kind in swap:
            out.append((f"kind {nid}", g.with_nodes(
                {nid: (node(swap[n.kind], **dict(n.fields)), s)})))
        if isinstance(s, IntegerStamp) and s.lo < s.hi:
            out.append((f"stamp {nid}", g.with_nodes(
                {nid: (n, IntegerStamp(s.bits, s.lo + 1, s.hi))})))
        elif s in (VOID, ILLEGAL):
            out.append((f"stamp {nid}", g.with_nodes({nid: (n, ILLEGAL if s == VOID else VOID)})))
    return out
