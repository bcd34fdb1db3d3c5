"""Sea-of-nodes IR toolkit with Java integer semantics and differential testing."""

from .ir_model import IRGraph, Node, Program, build_graph, node, validate
from .values import UNDEF, IntVal, mk_int, signed

__version__ = "0.1.0"

__all__ = ["IRGraph", "Node", "Program", "build_graph", "node", "validate",
           "UNDEF", "IntVal", "mk_int", "signed"]
