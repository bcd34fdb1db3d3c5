"""Integer stamp lattice: construction, intersection, folding and refinement."""

from __future__ import annotations

import enum
from typing import Callable, Optional

from .ir_model import IntegerStamp, Node, Stamp
from .values import IntVal, signed


class TriState(enum.Enum):
    ALWAYS_TRUE = "true"
    ALWAYS_FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, b: bool) -> TriState:
        return cls.ALWAYS_TRUE if b else cls.ALWAYS_FALSE

    def negate(self) -> TriState:
        if self is TriState.UNKNOWN:
            return self
        return TriState.ALWAYS_FALSE if self is TriState.ALWAYS_TRUE else TriState.ALWAYS_TRUE


def smin(bits: int) -> int:
    return -(1 << (bits - 1))


def smax(bits: int) -> int:
    return (1 << (bits - 1)) - 1


def unrestricted(bits: int) -> IntegerStamp:
    return IntegerStamp(bits, smin(bits), smax(bits))


def constant_stamp(v: IntVal) -> IntegerStamp:
    n = signed(v)
    return IntegerStamp(v.bits, n, n)


def bounded(bits: int, lo: int, hi: int) -> Optional[IntegerStamp]:
    """Stamp for ``[lo, hi]`` clipped to the width, or None when empty."""
    lo, hi = max(lo, smin(bits)), min(hi, smax(bits))
    if lo > hi:
        return None
    return IntegerStamp(bits, lo, hi)


def intersect(a: IntegerStamp, b: IntegerStamp) -> Optional[IntegerStamp]:
    """Meet of two integer stamps; None signals the empty stamp."""
    if a.bits != b.bits:
        raise ValueError(f"cannot intersect {a.bits}-bit and {b.bits}-bit stamps")
    return bounded(a.bits, max(a.lo, b.lo), min(a.hi, b.hi))


def fold_compare(op: str, a: IntegerStamp, b: IntegerStamp) -> TriState:
    if a.bits != b.bits:
        return TriState.UNKNOWN
    if op == "IntegerLessThan":
        if a.hi < b.lo:
            return TriState.ALWAYS_TRUE
        if a.lo >= b.hi:
            return TriState.ALWAYS_FALSE
        return TriState.UNKNOWN
    if op == "IntegerEquals":
        if a.lo == a.hi == b.lo == b.hi:
            return TriState.ALWAYS_TRUE
        if a.hi < b.lo or b.hi < a.lo:
            return TriState.ALWAYS_FALSE
        return TriState.UNKNOWN
    raise ValueError(f"cannot fold {op}")


StampLookup = Callable[[int], Optional[Stamp]]


def refine_by_condition(cond: Node, polarity: bool, current: StampLookup,
                        original: StampLookup | None = None
                        ) -> Optional[list[tuple[int, IntegerStamp]]]:
    """Stamps implied for the operands of ``cond`` when it evaluates to ``polarity``.

    The other operand's bound always comes from ``current``. The stamp being
    narrowed comes from ``original`` when given (how GraalVM does it) and from
    ``current`` otherwise. Returns None when the condition cannot hold, and an
    empty list when nothing can be learned.
    """
    if cond.kind not in ("IntegerLessThan", "IntegerEquals"):
        return []
    x, y = cond["x"], cond["y"]
    if x == y:
        # x < x never holds; the other forms say nothing new
        return None if cond.kind == "IntegerLessThan" and polarity else []
    cx, cy = current(x), current(y)
    if not (isinstance(cx, IntegerStamp) and isinstance(cy, IntegerStamp)) or cx.bits != cy.bits:
        return []
    base = original or current
    bx, by = base(x), base(y)
    if not isinstance(bx, IntegerStamp) or bx.bits != cx.bits:
        bx = cx
    if not isinstance(by, IntegerStamp) or by.bits != cy.bits:
        by = cy
    bits = cx.bits

    if cond.kind == "IntegerEquals":
        if not polarity:
            return []
        both = intersect(cx, cy)
        if both is None:
            return None
        nx, ny = intersect(bx, both), intersect(by, both)
    elif polarity:
        # x < y
        nx = _meet(bx, bounded(bits, smin(bits), cy.hi - 1))
        ny = _meet(by, bounded(bits, cx.lo + 1, smax(bits)))
    else:
        # x >= y
        nx = _meet(bx, bounded(bits, cy.lo, smax(bits)))
        ny = _meet(by, bounded(bits, smin(bits), cx.hi))
    if nx is None or ny is None:
        return None
    return [(x, nx), (y, ny)]


def _meet(a: IntegerStamp, b: Optional[IntegerStamp]) -> Optional[IntegerStamp]:
    return None if b is None else intersect(a, b)
