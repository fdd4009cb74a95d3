"""Convex-polyhedra abstract interpretation toolkit.

Exact double-description kernel for closed and not-necessarily-closed
polyhedra, a finite powerset domain, a linear-invariant analyzer for a
small imperative language, and a reachability engine for linear hybrid
automata.
"""

from .linalg import (
    Constraint,
    DimensionError,
    GenKind,
    Generator,
    LinExpr,
    Rel,
    SatResult,
    canonicalize_constraint,
    evaluate,
    satisfies,
)
from .polyhedron import (
    GeneratorSystemError,
    Polyhedron,
    Topology,
    TopologyError,
    WideningPreconditionError,
    standard_widening,
)
from .powerset import PolySet

__all__ = [
    "Constraint",
    "DimensionError",
    "GenKind",
    "Generator",
    "GeneratorSystemError",
    "LinExpr",
    "PolySet",
    "Polyhedron",
    "Rel",
    "SatResult",
    "Topology",
    "TopologyError",
    "WideningPreconditionError",
    "canonicalize_constraint",
    "evaluate",
    "satisfies",
    "standard_widening",
]
