from __future__ import annotations

import pytest

from seanodes import corpus
from seanodes.ir_model import ILLEGAL, VOID, build_graph, default_stamp, node

CORPUS = corpus.names()


@pytest.fixture(scope="session")
def programs():
    return corpus.load_all()


@pytest.fixture(scope="session")
def all_graphs(programs):
    """(label, graph) for every method of every shipped program."""
    return [(f"{prog}:{name}", g) for prog, p in sorted(programs.items())
            for name, g in sorted(p.methods.items())]


@pytest.fixture
def shift_graph():
    d = default_stamp(32)
    return build_graph([
        (0, node("Start", frameState=3, next=5), VOID),
        (1, node("Parameter", index=0), d),
        (2, node("Parameter", index=1), d),
        (3, node("FrameState"), ILLEGAL),
        (4, node("LeftShift", x=1, y=2), d),
        (5, node("Return", value=4), d),
    ])


# -- acceptance summary --------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record one acceptance verdict; the summary is printed at session end."""
    def _record(number: int, ok: bool, text: str) -> None:
        ACCEPTANCE[number] = (ok, text)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {text}")
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {text}")
