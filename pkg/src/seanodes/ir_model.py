"""Sea-of-nodes graph model: node catalog, stamps, graphs and programs.

Graphs are immutable. Every editing helper returns a new :class:`IRGraph`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from .values import SUPPORTED_BITS, IntVal, Value

# Field categories of the node catalog.
SUCC = "succ"          # control-flow successor
REF = "ref"            # required data/control input
OPT = "opt"            # optional input (None allowed)
REFS = "refs"          # ordered list of inputs
INT = "int"            # integer payload
STR = "str"            # name payload
VALUE = "value"        # constant payload

_BIN = (("x", REF), ("y", REF))
_CONV = (("inBits", INT), ("outBits", INT), ("x", REF))

NODE_KINDS: dict[str, tuple[tuple[str, str], ...]] = {
    "Start": (("frameState", OPT), ("next", SUCC)),
    "Parameter": (("index", INT),),
    "Constant": (("value", VALUE),),
    "FrameState": (),
    "Return": (("value", OPT),),
    "If": (("condition", REF), ("trueSucc", SUCC), ("falseSucc", SUCC)),
    "Begin": (("next", SUCC),),
    "End": (),
    "Merge": (("endList", REFS), ("frameState", OPT), ("next", SUCC)),
    "LoopBegin": (("endList", REFS), ("next", SUCC)),
    "LoopEnd": (("loopBegin", REF),),
    "LoopExit": (("loopBegin", REF), ("next", SUCC)),
    "ValuePhi": (("merge", REF), ("inputList", REFS)),
    "Add": _BIN,
    "Sub": _BIN,
    "Mul": _BIN,
    "SignedDiv": _BIN + (("next", SUCC),),
    "SignedRem": _BIN + (("next", SUCC),),
    "And": _BIN,
    "Or": _BIN,
    "Xor": _BIN,
    "LeftShift": _BIN,
    "RightShift": _BIN,
    "UnsignedRightShift": _BIN,
    "Negate": (("x", REF),),
    "Not": (("x", REF),),
    "Abs": (("x", REF),),
    "IntegerEquals": _BIN,
    "IntegerLessThan": _BIN,
    "Conditional": (("condition", REF), ("trueValue", REF), ("falseValue", REF)),
    "SignExtend": _CONV,
    "ZeroExtend": _CONV,
    "Narrow": _CONV,
    "Invoke": (("method", STR), ("argList", REFS), ("next", SUCC)),
    "LoadField": (("field", STR),),
    "StoreField": (("field", STR), ("value", REF), ("next", SUCC)),
}

CONTROL_KINDS = frozenset({
    "Start", "Return", "If", "Begin", "End", "Merge", "LoopBegin", "LoopEnd",
    "LoopExit", "SignedDiv", "SignedRem", "Invoke", "StoreField",
})
MERGE_KINDS = frozenset({"Merge", "LoopBegin"})
END_KINDS = frozenset({"End", "LoopEnd"})


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    """One IR node: a kind tag plus its role-named fields in catalog order."""

    kind: str
    fields: tuple[tuple[str, object], ...] = ()

    def __getitem__(self, role: str):
        for name, v in self.fields:
            if name == role:
                return v
        raise KeyError(f"{self.kind} has no field {role!r}")

    def get(self, role: str, default=None):
        for name, v in self.fields:
            if name == role:
                return v
        return default

    def roles(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)

    def replace(self, **changes) -> Node:
        return node(self.kind, **{**dict(self.fields), **changes})

    @property
    def is_control(self) -> bool:
        return self.kind in CONTROL_KINDS

    def successors(self) -> list[int]:
        return [v for role, cat in NODE_KINDS[self.kind]
                if cat == SUCC and (v := self[role]) is not None]

    def inputs(self) -> list[int]:
        """Input references in catalog order, list fields flattened."""
        out: list[int] = []
        for role, cat in NODE_KINDS[self.kind]:
            v = self[role]
            if cat in (REF, OPT) and v is not None:
                out.append(v)
            elif cat == REFS:
                out.extend(v)
        return out

    def remap(self, mapping: Mapping[int, int]) -> Node:
        """Rename every reference through ``mapping`` (ids not present stay)."""
        changes = {}
        for role, cat in NODE_KINDS[self.kind]:
            v = self[role]
            if cat in (REF, OPT, SUCC) and v is not None:
                changes[role] = mapping.get(v, v)
            elif cat == REFS:
                changes[role] = tuple(mapping.get(i, i) for i in v)
        return self.replace(**changes) if changes else self

    def __repr__(self) -> str:
        args = " ".join(f"{r}={v!r}" for r, v in self.fields)
        return f"<{self.kind} {args}>" if args else f"<{self.kind}>"


def node(kind: str, **kwargs) -> Node:
    """Build a node, checking the field set against the catalog."""
    try:
        schema = NODE_KINDS[kind]
    except KeyError:
        raise GraphError(f"unknown node kind {kind!r}") from None
    unknown = set(kwargs) - {r for r, _ in schema}
    if unknown:
        raise GraphError(f"{kind} has no field(s) {sorted(unknown)}")
    fields = []
    for role, cat in schema:
        if role not in kwargs and cat != OPT:
            raise GraphError(f"{kind} requires field {role!r}")
        v = kwargs.get(role)
        if cat == REFS:
            v = tuple(int(i) for i in v)
        elif cat in (REF, SUCC, INT):
            v = int(v)
        elif cat == OPT and v is not None:
            v = int(v)
        elif cat == STR:
            v = str(v)
        elif cat == VALUE and not isinstance(v, (IntVal,)) and v is not None:
            raise GraphError(f"{kind}.{role} must be a value, got {v!r}")
        fields.append((role, v))
    return Node(kind, tuple(fields))


# -- stamps ------------------------------------------------------------------

@dataclass(frozen=True)
class VoidStamp:
    def __repr__(self) -> str:
        return "VoidStamp"


@dataclass(frozen=True)
class IllegalStamp:
    def __repr__(self) -> str:
        return "IllegalStamp"


@dataclass(frozen=True)
class IntegerStamp:
    bits: int
    lo: int
    hi: int

    def __post_init__(self) -> None:
        # any width is allowed here so the lattice can be checked exhaustively
        # at small widths; programs are restricted by validate()
        if not 1 <= self.bits <= 64:
            raise GraphError(f"unsupported stamp width {self.bits}")
        smin, smax = -(1 << (self.bits - 1)), (1 << (self.bits - 1)) - 1
        if not smin <= self.lo <= self.hi <= smax:
            raise GraphError(
                f"stamp bounds [{self.lo}, {self.hi}] out of range for {self.bits} bits")

    def contains(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    def __repr__(self) -> str:
        return f"IntegerStamp {self.bits} ({self.lo}) ({self.hi})"


Stamp = Union[VoidStamp, IllegalStamp, IntegerStamp]
VOID = VoidStamp()
ILLEGAL = IllegalStamp()


def default_stamp(bits: int = 32) -> IntegerStamp:
    return IntegerStamp(bits, -(1 << (bits - 1)), (1 << (bits - 1)) - 1)


# -- graphs ------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class IRGraph:
    nodes: Mapping[int, tuple[Node, Stamp]]
    start: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", MappingProxyType(dict(sorted(self.nodes.items()))))

    def __contains__(self, nid: int) -> bool:
        return nid in self.nodes

    def __iter__(self) -> Iterator[int]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IRGraph):
            return NotImplemented
        return self.start == other.start and dict(self.nodes) == dict(other.nodes)

    __hash__ = None  # type: ignore[assignment]

    def node(self, nid: int) -> Node:
        return self.nodes[nid][0]

    def stamp(self, nid: int) -> Stamp:
        return self.nodes[nid][1]

    def entries(self) -> list[tuple[int, Node, Stamp]]:
        return [(i, n, s) for i, (n, s) in self.nodes.items()]

    def ids_of(self, kind: str) -> list[int]:
        return [i for i, (n, _) in self.nodes.items() if n.kind == kind]

    def with_nodes(self, updates: Mapping[int, tuple[Node, Stamp]]) -> IRGraph:
        return IRGraph({**self.nodes, **updates}, self.start)

    def without(self, ids: Iterable[int]) -> IRGraph:
        drop = set(ids)
        return IRGraph({i: e for i, e in self.nodes.items() if i not in drop}, self.start)

    @cached_property
    def _end_owners(self) -> dict[int, int]:
        owners = {}
        for i, (n, _) in self.nodes.items():
            if n.kind in MERGE_KINDS:
                for e in n["endList"]:
                    owners.setdefault(e, i)
        return owners

    def owner_of_end(self, end_id: int) -> int | None:
        """The Merge/LoopBegin whose end list contains ``end_id``."""
        return self._end_owners.get(end_id)

    def cfg_successors(self, nid: int) -> list[int]:
        """Control-flow successors, including the implicit End -> merge edge."""
        n = self.node(nid)
        if n.kind in END_KINDS:
            owner = self.owner_of_end(nid)
            return [] if owner is None else [owner]
        return n.successors()

    def usages(self, nid: int) -> list[int]:
        return [i for i, (n, _) in self.nodes.items()
                if nid in n.inputs() or nid in n.successors()]

    def phis_of(self, merge_id: int) -> list[int]:
        return [i for i, (n, _) in self.nodes.items()
                if n.kind == "ValuePhi" and n["merge"] == merge_id]


def build_graph(entries: Iterable[tuple[int, Node, Stamp]]) -> IRGraph:
    nodes: dict[int, tuple[Node, Stamp]] = {}
    for nid, n, s in entries:
        if nid in nodes:
            raise GraphError(f"duplicate id {nid}")
        nodes[nid] = (n, s)
    starts = [i for i, (n, _) in nodes.items() if n.kind == "Start"]
    if not starts:
        raise GraphError("no Start node")
    if len(starts) > 1:
        raise GraphError(f"multiple Start nodes: {starts}")
    return IRGraph(nodes, starts[0])


def fresh_id(g: IRGraph) -> int:
    return max(g.nodes, default=-1) + 1


def replace_input(g: IRGraph, at: int, role: str, new: int) -> IRGraph:
    """Point input ``role`` of node ``at`` at ``new``.

    List roles take ``(index, new)`` pairs via :func:`replace_list_input`.
    """
    n = g.node(at)
    cats = dict(NODE_KINDS[n.kind])
    if cats.get(role) not in (REF, OPT):
        raise GraphError(f"{role!r} is not an input role of {n.kind} (node {at})")
    if new not in g:
        raise GraphError(f"node {new} does not exist")
    if n[role] == new:
        return g
    return g.with_nodes({at: (n.replace(**{role: new}), g.stamp(at))})


def replace_list_input(g: IRGraph, at: int, role: str, index: int, new: int) -> IRGraph:
    n = g.node(at)
    if dict(NODE_KINDS[n.kind]).get(role) != REFS:
        raise GraphError(f"{role!r} is not a list role of {n.kind} (node {at})")
    if new not in g:
        raise GraphError(f"node {new} does not exist")
    items = list(n[role])
    items[index] = new
    return g.with_nodes({at: (n.replace(**{role: tuple(items)}), g.stamp(at))})


def replace_usages(g: IRGraph, old: int, new: int) -> IRGraph:
    """Redirect every data-input reference to ``old`` onto ``new``.

    Successor edges are left alone.
    """
    updates = {}
    for i, (n, s) in g.nodes.items():
        if i == old:
            continue
        changes = {}
        for role, cat in NODE_KINDS[n.kind]:
            v = n[role]
            if cat in (REF, OPT) and v == old:
                changes[role] = new
            elif cat == REFS and old in v:
                changes[role] = tuple(new if x == old else x for x in v)
        if changes:
            updates[i] = (n.replace(**changes), s)
    return g.with_nodes(updates) if updates else g


def reachable(g: IRGraph) -> set[int]:
    seen = {g.start}
    todo = [g.start]
    while todo:
        nid = todo.pop()
        n = g.node(nid)
        nxt = n.successors() + n.inputs()
        if n.kind in END_KINDS:
            nxt += g.cfg_successors(nid)
        for m in nxt:
            if m in g and m not in seen:
                seen.add(m)
                todo.append(m)
    return seen


def cfg_nodes(g: IRGraph) -> list[int]:
    """Control-flow nodes reachable from start, in depth-first preorder."""
    seen: set[int] = set()
    order = []
    todo = [g.start]
    while todo:
        nid = todo.pop()
        if nid in seen:
            continue
        seen.add(nid)
        order.append(nid)
        todo.extend(reversed(g.cfg_successors(nid)))
    return order


def validate(g: IRGraph) -> list[str]:
    problems: list[str] = []
    starts = g.ids_of("Start")
    if len(starts) != 1:
        problems.append(f"nodes {', '.join(map(str, starts))}: expected exactly one Start, "
                        f"found {len(starts)}")
    if g.start not in g or g.node(g.start).kind != "Start":
        problems.append(f"node {g.start}: start id does not name a Start node")
        return problems

    for nid, (n, s) in g.nodes.items():
        for ref in n.inputs() + n.successors():
            if ref not in g:
                problems.append(f"node {nid}: unresolved reference {ref}")
        for succ in n.successors():
            if succ in g and not g.node(succ).is_control:
                problems.append(f"node {nid}: successor {succ} is not a control-flow node")
        if n.kind in END_KINDS:
            owners = [i for i, (m, _) in g.nodes.items()
                      if m.kind in MERGE_KINDS and nid in m["endList"]]
            if len(owners) != 1:
                problems.append(f"node {nid}: {n.kind} must be listed by exactly one merge, "
                                f"found {owners}")
            if n.kind == "LoopEnd" and owners and owners[0] != n["loopBegin"]:
                problems.append(f"node {nid}: LoopEnd listed by {owners[0]} "
                                f"but names loopBegin {n['loopBegin']}")
        if n.kind in MERGE_KINDS:
            for e in n["endList"]:
                if e in g and g.node(e).kind not in END_KINDS:
                    problems.append(f"node {nid}: end list entry {e} is not an End")
                if e in g and n.kind == "Merge" and g.node(e).kind == "LoopEnd":
                    problems.append(f"node {nid}: Merge cannot list LoopEnd {e}")
        if n.kind == "LoopEnd" and n["loopBegin"] in g and g.node(n["loopBegin"]).kind != "LoopBegin":
            problems.append(f"node {nid}: loopBegin {n['loopBegin']} is not a LoopBegin")
        if n.kind == "LoopExit" and n["loopBegin"] in g and g.node(n["loopBegin"]).kind != "LoopBegin":
            problems.append(f"node {nid}: loopBegin {n['loopBegin']} is not a LoopBegin")
        if n.kind == "ValuePhi" and n["merge"] in g:
            m = g.node(n["merge"])
            if m.kind not in MERGE_KINDS:
                problems.append(f"node {nid}: phi merge {n['merge']} is not a merge")
            elif len(m["endList"]) != len(n["inputList"]):
                problems.append(f"node {nid}: phi has {len(n['inputList'])} inputs but merge "
                                f"{n['merge']} has {len(m['endList'])} ends")
        if isinstance(s, IntegerStamp) and s.bits not in SUPPORTED_BITS:
            problems.append(f"node {nid}: stamp width {s.bits} is not one of {SUPPORTED_BITS}")
        if n.kind == "Constant" and not isinstance(n["value"], IntVal):
            problems.append(f"node {nid}: constant without an integer value")

    if not problems:
        problems.extend(_cycle_violations(g))
    return problems


def _cycle_violations(g: IRGraph) -> list[str]:
    # control-flow cycles are only allowed through a LoopEnd -> LoopBegin back edge
    color: dict[int, int] = {}
    problems = []

    def forward(nid: int) -> list[int]:
        if g.node(nid).kind == "LoopEnd":
            return []
        return g.cfg_successors(nid)

    stack: list[tuple[int, Iterator[int]]] = [(g.start, iter(forward(g.start)))]
    color[g.start] = 1
    while stack:
        nid, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            color[nid] = 2
            stack.pop()
            continue
        c = color.get(nxt, 0)
        if c == 1:
            problems.append(f"node {nid}: control-flow cycle through {nxt} without a LoopEnd")
        elif c == 0:
            color[nxt] = 1
            stack.append((nxt, iter(forward(nxt))))
    return problems + _data_cycle_violations(g)


def _data_cycle_violations(g: IRGraph) -> list[str]:
    # floating expressions must be acyclic; phis and fixed nodes break cycles
    def deps(nid: int) -> list[int]:
        n = g.node(nid)
        if n.is_control or n.kind == "ValuePhi":
            return []
        return [i for i in n.inputs() if not g.node(i).is_control and g.node(i).kind != "ValuePhi"]

    color: dict[int, int] = {}
    problems = []
    for root in g.nodes:
        if color.get(root):
            continue
        color[root] = 1
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(deps(root)))]
        while stack:
            nid, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[nid] = 2
                stack.pop()
                continue
            c = color.get(nxt, 0)
            if c == 1:
                problems.append(f"node {nid}: data-flow cycle through {nxt}")
            elif c == 0:
                color[nxt] = 1
                stack.append((nxt, iter(deps(nxt))))
    return problems


# -- programs ----------------------------------------------------------------

@dataclass(frozen=True)
class TestCase:
    method: str
    args: tuple[Value, ...]
    expect: Value

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Golden:
    """An expected optimized graph for ``method`` after ``phases``."""

    method: str
    phases: tuple[str, ...]
    graph: IRGraph


@dataclass
class Program:
    methods: dict[str, IRGraph]
    fields: dict[str, Value] = field(default_factory=dict)
    tests: list[TestCase] = field(default_factory=list)
    goldens: list[Golden] = field(default_factory=list)

    def golden(self, method: str, phases: Iterable[str]) -> IRGraph | None:
        key = tuple(phases)
        for gd in self.goldens:
            if gd.method == method and gd.phases == key:
                return gd.graph
        return None

    def validate(self) -> list[str]:
        problems = []
        for name, g in self.methods.items():
            problems += [f"{name}: {p}" for p in validate(g)]
            for nid in g.ids_of("Invoke"):
                target = g.node(nid)["method"]
                if target not in self.methods:
                    problems.append(f"{name}: node {nid}: unresolved invoke target {target!r}")
        for t in self.tests:
            if t.method not in self.methods:
                problems.append(f"test names unknown method {t.method!r}")
        return problems
