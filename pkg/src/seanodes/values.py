"""Runtime values and Java-faithful fixed-width integer operators.

Every integer is an ``IntVal(bits, raw)``: ``bits`` significant bits stored in
a 64-bit unsigned payload whose bits at positions ``>= bits`` are always zero.
Signed operations go through :func:`signed`, the one place where the payload is
reinterpreted as two's complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

SUPPORTED_BITS = (1, 8, 16, 32, 64)
WORD_MASK = (1 << 64) - 1


def mask(bits: int) -> int:
    return (1 << bits) - 1


@dataclass(frozen=True)
class UndefVal:
    def __repr__(self) -> str:
        return "UndefVal"


UNDEF = UndefVal()


@dataclass(frozen=True)
class IntVal:
    bits: int
    raw: int

    def __post_init__(self) -> None:
        if self.bits not in SUPPORTED_BITS:
            raise ValueError(f"unsupported bit count {self.bits}")
        if not 0 <= self.raw <= WORD_MASK:
            raise ValueError(f"payload {self.raw} does not fit in 64 bits")
        if self.raw & ~mask(self.bits):
            raise ValueError(f"payload {self.raw:#x} has bits set above bit {self.bits - 1}")

    def __repr__(self) -> str:
        return f"IntVal({self.bits}, {self.raw})"


Value = Union[UndefVal, IntVal]


class DivisionByZero(ArithmeticError):
    """Signal raised by SignedDiv/SignedRem when the divisor is zero."""


def mk_int(bits: int, n: int) -> IntVal:
    """Wrap the mathematical integer ``n`` into a ``bits``-wide value."""
    if bits not in SUPPORTED_BITS:
        raise ValueError(f"unsupported bit count {bits}")
    return IntVal(bits, n & mask(bits))


def signed(v: IntVal) -> int:
    if not isinstance(v, IntVal):
        raise TypeError(f"signed() needs an IntVal, got {v!r}")
    sign_bit = 1 << (v.bits - 1)
    return v.raw - (v.raw & sign_bit) * 2


def is_true(v: Value) -> bool:
    """Truth value of a condition: any nonzero integer."""
    return isinstance(v, IntVal) and v.raw != 0


BINARY_OPS = ("Add", "Sub", "Mul", "And", "Or", "Xor")
DIVREM_OPS = ("SignedDiv", "SignedRem")
SHIFT_OPS = ("LeftShift", "RightShift", "UnsignedRightShift")
UNARY_OPS = ("Negate", "Not", "Abs")
COMPARE_OPS = ("IntegerEquals", "IntegerLessThan")
CONVERT_OPS = ("SignExtend", "ZeroExtend", "Narrow")


def _same_width(a: Value, b: Value) -> bool:
    return isinstance(a, IntVal) and isinstance(b, IntVal) and a.bits == b.bits


def eval_binary(op: str, a: Value, b: Value) -> Value:
    if not _same_width(a, b):
        return UNDEF
    bits = a.bits
    if op == "Add":
        r = a.raw + b.raw
    elif op == "Sub":
        r = a.raw - b.raw
    elif op == "Mul":
        r = a.raw * b.raw
    elif op == "And":
        r = a.raw & b.raw
    elif op == "Or":
        r = a.raw | b.raw
    elif op == "Xor":
        r = a.raw ^ b.raw
    else:
        raise ValueError(f"not a binary operator: {op}")
    return IntVal(bits, r & mask(bits))


def eval_divrem(op: str, a: Value, b: Value) -> Value:
    """Java ``/`` and ``%``: truncate toward zero, MIN / -1 wraps to MIN.

    Raises :class:`DivisionByZero` for a zero divisor.
    """
    if op not in DIVREM_OPS:
        raise ValueError(f"not a division operator: {op}")
    if not _same_width(a, b):
        return UNDEF
    x, y = signed(a), signed(b)
    if y == 0:
        raise DivisionByZero(f"{op} by zero")
    q = abs(x) // abs(y)
    if (x < 0) != (y < 0):
        q = -q
    r = x - q * y
    return mk_int(a.bits, q if op == "SignedDiv" else r)


def shift_distance(a: IntVal, b: IntVal) -> int:
    # Java masks the distance to 5 bits for int, 6 bits for long
    return signed(b) & (63 if a.bits == 64 else 31)


def eval_shift(op: str, a: Value, b: Value) -> Value:
    if not (isinstance(a, IntVal) and isinstance(b, IntVal)):
        return UNDEF
    bits = a.bits
    n = shift_distance(a, b)
    if op == "LeftShift":
        r = a.raw << n
    elif op == "RightShift":
        r = a.raw >> n
        if a.raw >> (bits - 1) & 1:
            # vacated high positions get copies of the sign bit
            r |= mask(bits) & ~(mask(bits) >> n)
    elif op == "UnsignedRightShift":
        r = a.raw >> n
    else:
        raise ValueError(f"not a shift operator: {op}")
    return IntVal(bits, r & mask(bits))


def eval_unary(op: str, a: Value) -> Value:
    if not isinstance(a, IntVal):
        return UNDEF
    bits = a.bits
    if op == "Negate":
        return IntVal(bits, -a.raw & mask(bits))
    if op == "Not":
        return IntVal(bits, ~a.raw & mask(bits))
    if op == "Abs":
        return a if signed(a) >= 0 else eval_unary("Negate", a)
    raise ValueError(f"not a unary operator: {op}")


TRUE = IntVal(1, 1)
FALSE = IntVal(1, 0)


def eval_compare(op: str, a: Value, b: Value) -> Value:
    if not _same_width(a, b):
        return UNDEF
    if op == "IntegerEquals":
        return TRUE if a.raw == b.raw else FALSE
    if op == "IntegerLessThan":
        return TRUE if signed(a) < signed(b) else FALSE
    raise ValueError(f"not a comparison operator: {op}")


def eval_convert(op: str, in_bits: int, out_bits: int, a: Value) -> Value:
    if op in ("SignExtend", "ZeroExtend"):
        if not in_bits < out_bits:
            raise ValueError(f"{op} needs inBits < outBits, got {in_bits} -> {out_bits}")
    elif op == "Narrow":
        if not in_bits > out_bits:
            raise ValueError(f"Narrow needs inBits > outBits, got {in_bits} -> {out_bits}")
    else:
        raise ValueError(f"not a conversion operator: {op}")
    if not isinstance(a, IntVal) or a.bits != in_bits:
        return UNDEF
    if op == "SignExtend":
        return mk_int(out_bits, signed(a))
    if op == "ZeroExtend":
        return IntVal(out_bits, a.raw)
    return IntVal(out_bits, a.raw & mask(out_bits))


def format_value(v: Value) -> str:
    if isinstance(v, IntVal):
        return f"i{v.bits}:{signed(v)}"
    return "undef"
