"""Programs shipped with the package, transcribed or hand-written."""

from __future__ import annotations

from importlib import resources

from ..ir_model import Program
from ..textformat import parse_program


def names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".json"))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.json").read_text(encoding="utf-8")


def load(name: str) -> Program:
    return parse_program(text(name))


def load_all() -> dict[str, Program]:
    return {n: load(n) for n in names()}
