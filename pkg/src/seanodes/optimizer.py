"""Optimization phases: conditional elimination and canonicalization.

Conditional elimination only ever rewrites the condition input of an ``If``
to a constant; it leaves successor edges alone. Removing the branch that a
constant condition makes dead is canonicalization's job.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from . import values as V
from .interpreter import PURE_OPERATORS, ExecutionError, apply_operator
from .ir_model import (
    MERGE_KINDS, NODE_KINDS, SUCC, VOID, IntegerStamp, IRGraph, Node,
    cfg_nodes, fresh_id, node, reachable, replace_input, replace_usages, validate,
)
from .stamp_algebra import TriState, constant_stamp, fold_compare, refine_by_condition
from .values import IntVal


class PhaseError(RuntimeError):
    pass


# -- dominators --------------------------------------------------------------

@dataclass
class DominatorTree:
    idom: dict[int, int]
    children: dict[int, list[int]]
    root: int

    def dominates(self, a: int, b: int) -> bool:
        while b != a:
            if b not in self.idom:
                return False
            b = self.idom[b]
        return True


def cfg_predecessors(g: IRGraph) -> dict[int, list[int]]:
    preds: dict[int, list[int]] = {n: [] for n in cfg_nodes(g)}
    for n in preds:
        for s in g.cfg_successors(n):
            if s in preds:
                preds[s].append(n)
    return preds


def _reverse_postorder(g: IRGraph) -> list[int]:
    seen = {g.start}
    post = []
    stack = [(g.start, iter(g.cfg_successors(g.start)))]
    while stack:
        nid, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            post.append(nid)
            stack.pop()
        elif nxt not in seen:
            seen.add(nxt)
            stack.append((nxt, iter(g.cfg_successors(nxt))))
    return post[::-1]


def dominator_tree(g: IRGraph) -> DominatorTree:
    """Immediate dominators by the iterative Cooper/Harvey/Kennedy scheme."""
    order = _reverse_postorder(g)
    index = {n: i for i, n in enumerate(order)}
    preds = cfg_predecessors(g)
    idom: dict[int, int] = {g.start: g.start}

    def intersect(a: int, b: int) -> int:
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in order[1:]:
            done = [p for p in preds[n] if p in idom]
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True

    del idom[g.start]
    children: dict[int, list[int]] = {n: [] for n in order}
    for n in order[1:]:
        children[idom[n]].append(n)
    return DominatorTree(idom, children, g.start)


# -- conditional elimination -------------------------------------------------

@dataclass
class ConditionEntry:
    condition: int
    polarity: bool
    stamp_updates: list[tuple[int, IntegerStamp]] = field(default_factory=list)
    unreachable: bool = False


def implied_by(known: Node, polarity: bool, query: Node) -> TriState:
    """What a known comparison outcome says about another comparison of the same operands."""
    if known.kind not in V.COMPARE_OPS or query.kind not in V.COMPARE_OPS:
        return TriState.UNKNOWN
    kx, ky, qx, qy = known["x"], known["y"], query["x"], query["y"]
    same = (kx, ky) == (qx, qy)
    swapped = (kx, ky) == (qy, qx)
    if not (same or swapped) or kx == ky:
        return TriState.UNKNOWN
    if known.kind == "IntegerLessThan":
        if polarity:
            if query.kind == "IntegerLessThan":
                return TriState.of(same)
            return TriState.ALWAYS_FALSE
        if query.kind == "IntegerLessThan" and same:
            return TriState.ALWAYS_FALSE
        return TriState.UNKNOWN
    # known is an equality
    if query.kind == "IntegerEquals":
        return TriState.of(polarity)
    return TriState.ALWAYS_FALSE if polarity else TriState.UNKNOWN


def base_stamp(g: IRGraph, nid: int) -> Optional[IntegerStamp]:
    n = g.node(nid)
    if n.kind == "Constant" and isinstance(n["value"], IntVal):
        return constant_stamp(n["value"])
    s = g.stamp(nid)
    return s if isinstance(s, IntegerStamp) else None


class _ConditionContext:
    """Condition stack plus per-node stamp stacks for one traversal."""

    def __init__(self, g: IRGraph, strict: bool):
        self.g = g
        self.strict = strict
        self.conditions: list[ConditionEntry] = []
        self.stamps: dict[int, list[IntegerStamp]] = {}

    def current(self, nid: int) -> Optional[IntegerStamp]:
        stack = self.stamps.get(nid)
        return stack[-1] if stack else base_stamp(self.g, nid)

    def original(self, nid: int) -> Optional[IntegerStamp]:
        return base_stamp(self.g, nid)

    def push(self, cond_id: int, polarity: bool) -> None:
        cond = self.g.node(cond_id)
        updates = refine_by_condition(cond, polarity, self.current,
                                      None if self.strict else self.original)
        entry = ConditionEntry(cond_id, polarity, updates or [], updates is None)
        for nid, st in entry.stamp_updates:
            self.stamps.setdefault(nid, []).append(st)
        self.conditions.append(entry)

    def pop(self) -> None:
        entry = self.conditions.pop()
        for nid, _ in reversed(entry.stamp_updates):
            self.stamps[nid].pop()
            if not self.stamps[nid]:
                del self.stamps[nid]

    def decide(self, cond_id: int) -> TriState:
        cond = self.g.node(cond_id)
        if cond.kind == "Constant":
            return TriState.UNKNOWN
        for e in reversed(self.conditions):
            if e.condition == cond_id:
                return TriState.of(e.polarity)
        for e in reversed(self.conditions):
            verdict = implied_by(self.g.node(e.condition), e.polarity, cond)
            if verdict is not TriState.UNKNOWN:
                return verdict
        if cond.kind not in V.COMPARE_OPS:
            return TriState.UNKNOWN
        sx, sy = self.current(cond["x"]), self.current(cond["y"])
        if sx is not None and sy is not None:
            verdict = fold_compare(cond.kind, sx, sy)
            if verdict is not TriState.UNKNOWN:
                return verdict
        orig = None if self.strict else self.original
        if refine_by_condition(cond, True, self.current, orig) is None:
            return TriState.ALWAYS_FALSE
        if refine_by_condition(cond, False, self.current, orig) is None:
            return TriState.ALWAYS_TRUE
        return TriState.UNKNOWN


def conditional_elimination(g: IRGraph, strict: bool = False) -> IRGraph:
    """Replace If conditions known from dominating branches with constants.

    ``strict`` refines stamps from the top of the stamp stack instead of the
    node's original stamp.
    """
    dom = dominator_tree(g)
    preds = cfg_predecessors(g)
    ctx = _ConditionContext(g, strict)
    decisions: dict[int, bool] = {}

    def branch_of(nid: int) -> tuple[int, bool] | None:
        parent = dom.idom.get(nid)
        if parent is None or g.node(parent).kind != "If" or len(preds[nid]) != 1:
            return None
        ifn = g.node(parent)
        if ifn["trueSucc"] == ifn["falseSucc"]:
            return None
        return ifn["condition"], nid == ifn["trueSucc"]

    # explicit stack: (node, entered) pairs give pre- and post-order visits
    work: list[tuple[int, bool]] = [(dom.root, False)]
    while work:
        nid, leaving = work.pop()
        branch = branch_of(nid)
        if leaving:
            if branch is not None:
                ctx.pop()
            continue
        if branch is not None:
            ctx.push(*branch)
        n = g.node(nid)
        if n.kind == "If":
            verdict = ctx.decide(n["condition"])
            if verdict is not TriState.UNKNOWN:
                decisions[nid] = verdict is TriState.ALWAYS_TRUE
        work.append((nid, True))
        work.extend((c, False) for c in reversed(dom.children[nid]))

    if ctx.conditions or ctx.stamps:
        raise PhaseError("condition stack not empty after traversal")

    for if_id, truth in sorted(decisions.items()):
        g, const_id = _constant_for(g, V.TRUE if truth else V.FALSE)
        g = replace_input(g, if_id, "condition", const_id)
    return g


def _constant_for(g: IRGraph, v: IntVal) -> tuple[IRGraph, int]:
    for nid, (n, _) in g.nodes.items():
        if n.kind == "Constant" and n["value"] == v:
            return g, nid
    nid = fresh_id(g)
    return g.with_nodes({nid: (node("Constant", value=v), VOID)}), nid


def successor_edges(g: IRGraph) -> set[tuple[int, str, int]]:
    return {(i, role, n[role]) for i, (n, _) in g.nodes.items()
            for role, cat in NODE_KINDS[n.kind] if cat == SUCC}


def phase_separation_violations(before: IRGraph, after: IRGraph) -> list[str]:
    """Differences that conditional elimination is not allowed to make."""
    problems = []
    if successor_edges(before) != successor_edges(after):
        diff = successor_edges(before) ^ successor_edges(after)
        problems.append(f"successor edges changed: {sorted(diff)}")
    for nid, (n, s) in after.nodes.items():
        if nid not in before:
            if n.kind != "Constant":
                problems.append(f"node {nid}: added {n.kind}, only constants may be added")
            continue
        old, old_s = before.nodes[nid]
        if old == n and old_s == s:
            continue
        if n.kind == "If" and old.kind == "If" and old.replace(condition=n["condition"]) == n:
            continue
        problems.append(f"node {nid}: changed from {old!r} to {n!r}")
    for nid in before:
        if nid not in after:
            problems.append(f"node {nid}: removed")
    return problems


# -- canonicalization --------------------------------------------------------

RuleResult = Optional[tuple[IRGraph, Iterable[int]]]


def _constant(g: IRGraph, nid: int) -> Optional[IntVal]:
    n = g.node(nid)
    if n.kind == "Constant" and isinstance(n["value"], IntVal):
        return n["value"]
    return None


def _width(g: IRGraph, nid: int) -> Optional[int]:
    c = _constant(g, nid)
    if c is not None:
        return c.bits
    s = g.stamp(nid)
    return s.bits if isinstance(s, IntegerStamp) else None


def _forward(g: IRGraph, nid: int, to: int) -> tuple[IRGraph, list[int]]:
    users = g.usages(nid)
    return replace_usages(g, nid, to), users + [to]


def _make_constant(g: IRGraph, nid: int, v: IntVal) -> tuple[IRGraph, list[int]]:
    g2 = g.with_nodes({nid: (node("Constant", value=v), constant_stamp(v))})
    return g2, g.usages(nid)


def rule_fold_if(g: IRGraph, nid: int) -> RuleResult:
    n = g.node(nid)
    if n.kind != "If":
        return None
    c = _constant(g, n["condition"])
    if c is None:
        return None
    taken = n["trueSucc"] if V.is_true(c) else n["falseSucc"]
    updates = {}
    for pid, (p, ps) in g.nodes.items():
        changes = {role: taken for role, cat in NODE_KINDS[p.kind]
                   if cat == SUCC and p[role] == nid}
        if changes:
            updates[pid] = (p.replace(**changes), ps)
    g = _prune_control(g.with_nodes(updates))
    return g, list(g.nodes)


def _prune_control(g: IRGraph) -> IRGraph:
    """Drop dead merge predecessors, collapse single-entry merges, remove dead nodes."""
    while True:
        live = set(cfg_nodes(g))
        updates = {}
        for mid in sorted(live):
            m = g.node(mid)
            if m.kind not in MERGE_KINDS:
                continue
            keep = [i for i, e in enumerate(m["endList"]) if e in live]
            if len(keep) == len(m["endList"]):
                continue
            updates[mid] = (m.replace(endList=tuple(m["endList"][i] for i in keep)), g.stamp(mid))
            for pid in g.phis_of(mid):
                phi = g.node(pid)
                inputs = tuple(phi["inputList"][i] for i in keep)
                updates[pid] = (phi.replace(inputList=inputs), g.stamp(pid))
        if updates:
            g = g.with_nodes(updates)
            continue
        single = [mid for mid in sorted(live)
                  if g.node(mid).kind == "Merge" and len(g.node(mid)["endList"]) == 1]
        if not single:
            break
        g = _collapse_merge(g, single[0])
    keep = reachable(g)
    return g.without(i for i in g if i not in keep)


def _collapse_merge(g: IRGraph, mid: int) -> IRGraph:
    m = g.node(mid)
    (end,) = m["endList"]
    for pid in g.phis_of(mid):
        g = replace_usages(g, pid, g.node(pid)["inputList"][0])
    updates = {}
    for pid, (p, ps) in g.nodes.items():
        changes = {role: m["next"] for role, cat in NODE_KINDS[p.kind]
                   if cat == SUCC and p[role] == end}
        if changes:
            updates[pid] = (p.replace(**changes), ps)
    g = g.with_nodes(updates)
    return g.without([end, mid, *g.phis_of(mid)])


def rule_fold_constant(g: IRGraph, nid: int) -> RuleResult:
    n = g.node(nid)
    if n.kind not in PURE_OPERATORS:
        return None
    args = [_constant(g, i) for i in n.inputs()]
    if any(a is None for a in args):
        return None
    try:
        v = apply_operator(n.kind, n, args)
    except (ExecutionError, ValueError):
        return None
    if not isinstance(v, IntVal):
        return None
    return _make_constant(g, nid, v)


def _result_bits(bits: int) -> int:
    return 32 if bits in (8, 16) else bits


def rule_identity(g: IRGraph, nid: int) -> RuleResult:
    n = g.node(nid)
    k = n.kind
    if k in ("Add", "Sub", "Mul", "And", "Or", "Xor"):
        x, y = n["x"], n["y"]
        wx, wy = _width(g, x), _width(g, y)
        if wx is None or wx != wy or wx in (8, 16):
            return None
        if x == y:
            if k == "Xor":
                return _make_constant(g, nid, V.mk_int(wx, 0))
            if k in ("And", "Or"):
                return _forward(g, nid, x)
            return None
        for a, b in ((x, y), (y, x)):
            c = _constant(g, b)
            if c is None:
                continue
            if k == "Sub" and a != x:
                continue
            if k in ("Add", "Sub", "Or", "Xor") and c.raw == 0:
                return _forward(g, nid, a)
            if k == "Mul" and V.signed(c) == 1 and c.bits > 1:
                return _forward(g, nid, a)
            if k == "Mul" and c.raw == 0:
                return _make_constant(g, nid, V.mk_int(wx, 0))
        return None
    if k in V.SHIFT_OPS:
        x = n["x"]
        c = _constant(g, n["y"])
        wx = _width(g, x)
        if c is None or wx not in (32, 64):
            return None
        if V.signed(c) & (wx - 1) == 0:
            return _forward(g, nid, x)
    return None


def rule_fold_conditional(g: IRGraph, nid: int) -> RuleResult:
    n = g.node(nid)
    if n.kind != "Conditional":
        return None
    c = _constant(g, n["condition"])
    if c is None:
        return None
    return _forward(g, nid, n["trueValue"] if V.is_true(c) else n["falseValue"])


CANONICALIZATION_RULES: dict[str, Callable[[IRGraph, int], RuleResult]] = {
    "fold_if": rule_fold_if,
    "fold_constant": rule_fold_constant,
    "identity": rule_identity,
    "fold_conditional": rule_fold_conditional,
}


def canonicalize(g: IRGraph, rules: Sequence[str] | None = None) -> IRGraph:
    """Apply local rewrite rules until none fires, then drop unreachable nodes."""
    active = [CANONICALIZATION_RULES[r] for r in (rules or CANONICALIZATION_RULES)]
    work = deque(sorted(g.nodes))
    queued = set(work)
    while work:
        nid = work.popleft()
        queued.discard(nid)
        if nid not in g:
            continue
        for rule in active:
            result = rule(g, nid)
            if result is None:
                continue
            g, touched = result
            for t in touched:
                if t in g and t not in queued:
                    queued.add(t)
                    work.append(t)
            break
    keep = reachable(g)
    return g.without(i for i in g if i not in keep)


# -- pipelines ---------------------------------------------------------------

PHASES: dict[str, Callable[[IRGraph], IRGraph]] = {
    "CondElim": conditional_elimination,
    "Canonicalize": canonicalize,
}

_PHASE_ALIASES = {
    "condelim": "CondElim", "conditionalelimination": "CondElim", "ce": "CondElim",
    "canonicalize": "Canonicalize", "canon": "Canonicalize",
}


def parse_phases(phases: str | Sequence[str]) -> tuple[str, ...]:
    """Accept "condelim,canonicalize" or a sequence of phase names."""
    items = phases.split(",") if isinstance(phases, str) else list(phases)
    out = []
    for item in items:
        item = item.strip()
        if not item:
            continue
        name = item if item in PHASES else _PHASE_ALIASES.get(item.lower().replace("_", ""))
        if name is None:
            raise ValueError(f"unknown phase {item!r}; choose from {sorted(PHASES)}")
        out.append(name)
    return tuple(out)


def run_phases(g: IRGraph, phases: Sequence[str]) -> IRGraph:
    for name in parse_phases(phases):
        g = PHASES[name](g)
        problems = validate(g)
        if problems:
            raise PhaseError(f"{name} produced an invalid graph: {problems}")
    return g


__all__ = [
    "DominatorTree", "ConditionEntry", "dominator_tree", "conditional_elimination",
    "canonicalize", "run_phases", "parse_phases", "phase_separation_violations",
    "CANONICALIZATION_RULES", "PHASES",
]
