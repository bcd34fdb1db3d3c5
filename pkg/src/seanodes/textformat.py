"""JSON program files.

Layout::

    {"methods": {name: {"start": 0, "nodes": [[id, {"kind": ..., role: ...}, {"stamp": ...}], ...]}},
     "fields": {name: ["int", bits, raw]},
     "tests": [{"method": name, "args": [["int", bits, raw], ...], "expect": ["int", bits, raw]}],
     "goldens": [{"method": name, "phases": [...], "graph": {"start": 0, "nodes": [...]}}]}

Raw payloads are the unsigned masked representation in decimal. Missing
optional references are ``null``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .ir_model import (
    ILLEGAL, INT, NODE_KINDS, OPT, REF, REFS, STR, SUCC, VALUE, VOID, Golden,
    GraphError, IntegerStamp, IRGraph, Program, Stamp, TestCase, build_graph, node,
)
from .values import SUPPORTED_BITS, UNDEF, IntVal, Value


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 where: str | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}, column {column}")
        if where:
            loc.append(where)
        super().__init__(f"{message} ({'; '.join(loc)})" if loc else message)
        self.line = line
        self.column = column
        self.where = where


def value_to_json(v: Value) -> list:
    if isinstance(v, IntVal):
        return ["int", v.bits, v.raw]
    return ["undef"]


def value_from_json(obj, where: str = "") -> Value:
    if obj == ["undef"]:
        return UNDEF
    if not (isinstance(obj, list) and len(obj) == 3 and obj[0] == "int"
            and all(isinstance(x, int) and not isinstance(x, bool) for x in obj[1:])):
        raise ParseError(f"malformed value {obj!r}", where=where)
    try:
        return IntVal(obj[1], obj[2])
    except ValueError as e:
        raise ParseError(str(e), where=where) from None


def stamp_to_json(s: Stamp) -> dict:
    if isinstance(s, IntegerStamp):
        return {"stamp": ["int", s.bits, s.lo, s.hi]}
    return {"stamp": "illegal" if s == ILLEGAL else "void"}


def stamp_from_json(obj, where: str = "") -> Stamp:
    s = obj.get("stamp") if isinstance(obj, dict) else None
    if s == "void":
        return VOID
    if s == "illegal":
        return ILLEGAL
    if isinstance(s, list) and len(s) == 4 and s[0] == "int":
        if s[1] not in SUPPORTED_BITS:
            raise ParseError(f"unsupported stamp width {s[1]!r}", where=where)
        try:
            return IntegerStamp(*s[1:])
        except (GraphError, TypeError) as e:
            raise ParseError(f"bad stamp {s!r}: {e}", where=where) from None
    raise ParseError(f"malformed stamp {obj!r}", where=where)


def node_to_json(n) -> dict:
    out: dict = {"kind": n.kind}
    for role, cat in NODE_KINDS[n.kind]:
        v = n[role]
        if cat == VALUE:
            out[role] = value_to_json(v)
        elif cat == REFS:
            out[role] = list(v)
        else:
            out[role] = v
    return out


def node_from_json(obj, where: str = ""):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("node object needs a 'kind'", where=where)
    kind = obj["kind"]
    if kind not in NODE_KINDS:
        raise ParseError(f"unknown node kind {kind!r}", where=where)
    kwargs = {}
    for role, cat in NODE_KINDS[kind]:
        if role not in obj:
            if cat == OPT:
                continue
            raise ParseError(f"{kind} is missing field {role!r}", where=where)
        v = obj[role]
        if cat == VALUE:
            v = value_from_json(v, where)
        elif cat == REFS:
            if not (isinstance(v, list) and all(_is_int(x) for x in v)):
                raise ParseError(f"{kind}.{role} must be a list of ids", where=where)
        elif cat in (REF, SUCC, INT) and not _is_int(v):
            raise ParseError(f"{kind}.{role} must be an integer", where=where)
        elif cat == OPT and v is not None and not _is_int(v):
            raise ParseError(f"{kind}.{role} must be an integer or null", where=where)
        elif cat == STR and not isinstance(v, str):
            raise ParseError(f"{kind}.{role} must be a string", where=where)
        kwargs[role] = v
    extra = set(obj) - {"kind"} - {r for r, _ in NODE_KINDS[kind]}
    if extra:
        raise ParseError(f"{kind} has unknown field(s) {sorted(extra)}", where=where)
    return node(kind, **kwargs)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def graph_to_json(g: IRGraph) -> dict:
    return {
        "start": g.start,
        "nodes": [[i, node_to_json(n), stamp_to_json(s)] for i, n, s in g.entries()],
    }


def graph_from_json(obj, where: str = "") -> IRGraph:
    if not isinstance(obj, dict) or not isinstance(obj.get("nodes"), list):
        raise ParseError("graph needs a 'nodes' list", where=where)
    entries = []
    for k, item in enumerate(obj["nodes"]):
        w = f"{where}.nodes[{k}]"
        if not (isinstance(item, list) and len(item) == 3 and _is_int(item[0])):
            raise ParseError("node entry must be [id, node, stamp]", where=w)
        entries.append((item[0], node_from_json(item[1], w), stamp_from_json(item[2], w)))
    try:
        g = build_graph(entries)
    except GraphError as e:
        raise ParseError(str(e), where=where) from None
    if "start" in obj and obj["start"] != g.start:
        raise ParseError(f"start {obj['start']} is not the Start node {g.start}", where=where)
    return g


def program_to_json(p: Program) -> dict:
    out: dict = {
        "methods": {name: graph_to_json(g) for name, g in p.methods.items()},
        "fields": {name: value_to_json(v) for name, v in p.fields.items()},
        "tests": [
            {"method": t.method, "args": [value_to_json(a) for a in t.args],
             "expect": value_to_json(t.expect)}
            for t in p.tests
        ],
    }
    if p.goldens:
        out["goldens"] = [
            {"method": gd.method, "phases": list(gd.phases), "graph": graph_to_json(gd.graph)}
            for gd in p.goldens
        ]
    return out


def program_from_json(obj) -> Program:
    if not isinstance(obj, dict) or not isinstance(obj.get("methods"), dict):
        raise ParseError("program needs a 'methods' object")
    methods = {name: graph_from_json(g, f"methods.{name}") for name, g in obj["methods"].items()}
    fields = {name: value_from_json(v, f"fields.{name}")
              for name, v in obj.get("fields", {}).items()}
    tests = []
    for k, t in enumerate(obj.get("tests", [])):
        w = f"tests[{k}]"
        if not isinstance(t, dict) or not {"method", "args", "expect"} <= set(t):
            raise ParseError("test needs method, args and expect", where=w)
        tests.append(TestCase(t["method"], tuple(value_from_json(a, w) for a in t["args"]),
                              value_from_json(t["expect"], w)))
    goldens = []
    for k, gd in enumerate(obj.get("goldens", [])):
        w = f"goldens[{k}]"
        goldens.append(Golden(gd["method"], tuple(gd["phases"]), graph_from_json(gd["graph"], w)))
    return Program(methods, fields, tests, goldens)


def parse_program(text: str) -> Program:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return program_from_json(obj)


def serialize_program(p: Program) -> str:
    # one node per line keeps diffs of corpus files readable
    obj = program_to_json(p)
    return _dump(obj, 0) + "\n"


def _dump(obj, depth: int) -> str:
    pad = "  " * depth
    if isinstance(obj, dict) and obj:
        items = [f'{pad}  {json.dumps(k)}: {_dump(v, depth + 1).lstrip()}' for k, v in obj.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list) and obj and isinstance(obj[0], (list, dict)) and _is_nested(obj):
        items = [_dump(v, depth + 1) for v in obj]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return pad + json.dumps(obj)


def _is_nested(obj: list) -> bool:
    # node entries and test objects each go on their own line
    return not all(isinstance(x, list) and x and x[0] in ("int", "undef") for x in obj)


def load_program(path: str | Path) -> Program:
    return parse_program(Path(path).read_text(encoding="utf-8"))


def save_program(p: Program, path: str | Path) -> None:
    Path(path).write_text(serialize_program(p), encoding="utf-8")


__all__ = [
    "ParseError", "parse_program", "serialize_program", "load_program", "save_program",
    "graph_to_json", "graph_from_json", "value_to_json", "value_from_json",
]
