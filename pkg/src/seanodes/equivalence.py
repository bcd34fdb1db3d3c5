"""Structural equivalence of graphs up to a renaming of node ids.

Both graphs are renumbered by the same deterministic breadth-first walk from
the Start node, after which equivalence is plain equality.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .ir_model import VOID, IRGraph, Node, Stamp


def canonical_order(g: IRGraph) -> list[int]:
    """Breadth-first visit order: successors first, then inputs, lists in order."""
    order = [g.start]
    seen = {g.start}
    todo = deque(order)
    while todo:
        nid = todo.popleft()
        n = g.node(nid)
        for m in n.successors() + (g.cfg_successors(nid) if n.kind in ("End", "LoopEnd") else []) + n.inputs():
            if m in g and m not in seen:
                seen.add(m)
                order.append(m)
                todo.append(m)
    return order


@dataclass(frozen=True)
class CanonicalGraph:
    entries: tuple[tuple[Node, Stamp], ...]

    def as_graph(self) -> IRGraph:
        return IRGraph({i: e for i, e in enumerate(self.entries)}, 0)


def canonical_mapping(g: IRGraph) -> dict[int, int]:
    return {old: new for new, old in enumerate(canonical_order(g))}


def canonical_form(g: IRGraph, ignore_stamps: bool = False) -> CanonicalGraph:
    mapping = canonical_mapping(g)
    entries = []
    for old in mapping:
        n, s = g.nodes[old]
        entries.append((n.remap(mapping), VOID if ignore_stamps else s))
    return CanonicalGraph(tuple(entries))


@dataclass(frozen=True)
class Equivalence:
    equal: bool
    index: Optional[int] = None
    left: Optional[str] = None
    right: Optional[str] = None

    def __bool__(self) -> bool:
        return self.equal

    def report(self) -> str:
        if self.equal:
            return "graphs are structurally equivalent"
        return (f"first difference at canonical node {self.index}:\n"
                f"  left:  {self.left}\n  right: {self.right}")


def structurally_equivalent(a: IRGraph, b: IRGraph, ignore_stamps: bool = False) -> Equivalence:
    ca, cb = canonical_form(a, ignore_stamps), canonical_form(b, ignore_stamps)
    ia, ib = {v: k for k, v in canonical_mapping(a).items()}, {v: k for k, v in canonical_mapping(b).items()}
    for i in range(max(len(ca.entries), len(cb.entries))):
        ea = ca.entries[i] if i < len(ca.entries) else None
        eb = cb.entries[i] if i < len(cb.entries) else None
        if ea != eb:
            return Equivalence(False, i, _describe(ea, ia.get(i)), _describe(eb, ib.get(i)))
    return Equivalence(True)


def _describe(entry, original_id) -> str:
    if entry is None:
        return "<missing>"
    n, s = entry
    return f"{n!r} {s!r} (node {original_id})"


def permute(g: IRGraph, mapping: dict[int, int]) -> IRGraph:
    """Rename every node id through the bijection ``mapping``."""
    nodes = {mapping[i]: (n.remap(mapping), s) for i, (n, s) in g.nodes.items()}
    return IRGraph(nodes, mapping[g.start])


def random_permutation(g: IRGraph, rng: random.Random, spread: int = 3) -> dict[int, int]:
    ids = list(g.nodes)
    targets = rng.sample(range(len(ids) * spread), len(ids))
    return dict(zip(ids, targets))
