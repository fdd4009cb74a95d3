"""Linear-invariant analyzer for the small imperative language.

Stores are abstracted by closed convex polyhedra (one dimension per
declared variable) or by finite sets of them.  Statements are evaluated
by the abstract big-step rules: assignments of affine expressions are
exact single-update affine images, other assignments go through
interval evaluation and a bounded affine image, and tests strengthen
the store through Boolean filters (with strict integer comparisons
tightened, e.g. ``a < b`` to ``a <= b - 1``, since variables range over
the integers).

Loops follow the rational-tree construction: a while node is expanded
until the store met at its recursive occurrence is subsumed by the one
at the expansion (then the recursive conclusion is the least fixpoint
of ``X -> filter_ff join X``, reached by Kleene iteration in at most
two steps); a non-subsumed recurrence re-expands the node in place with
the store joined (`delay` times) and then widened, which guarantees
termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import imp
from .domains import AbstractBool, Interval, alpha_bool, int_arith, int_compare
from .linalg import Constraint, LinExpr, Rel, canonicalize_constraint
from .polyhedron import Polyhedron, Topology, standard_widening
from .powerset import PolySet, powerset_widening


class AnalysisError(RuntimeError):
    """Internal engine failure (iteration caps exceeded)."""


@dataclass(frozen=True)
class AnalysisOptions:
    domain: str = "poly"  # 'poly' | 'powerset'
    delay: int = 0
    cap: int = 8
    max_local_iterations: int = 64

    def __post_init__(self):
        if self.domain not in ("poly", "powerset"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.cap < 1:
            raise ValueError("powerset cap must be at least 1")


@dataclass(frozen=True)
class AbstractStore:
    """A polyhedral (or disjunctive) store over the declared variables."""

    variables: tuple[str, ...]
    value: Polyhedron | PolySet

    @property
    def dim(self) -> int:
        return len(self.variables)

    @staticmethod
    def top(variables: Sequence[str], domain: str = "poly") -> AbstractStore:
        n = len(variables)
        u = Polyhedron.universe(n, Topology.CLOSED)
        value = PolySet.singleton(u) if domain == "powerset" else u
        return AbstractStore(tuple(variables), value)

    @staticmethod
    def bottom(variables: Sequence[str], domain: str = "poly") -> AbstractStore:
        n = len(variables)
        value = (
            PolySet.bottom(n, Topology.CLOSED)
            if domain == "powerset"
            else Polyhedron.empty(n, Topology.CLOSED)
        )
        return AbstractStore(tuple(variables), value)

    @staticmethod
    def from_constraints(
        variables: Sequence[str], cs: Sequence[Constraint], domain: str = "poly"
    ) -> AbstractStore:
        n = len(variables)
        p = Polyhedron.from_constraints(n, Topology.CLOSED, _tighten_strict(cs))
        value = PolySet.singleton(p) if domain == "powerset" else p
        return AbstractStore(tuple(variables), value)

    # lattice ----------------------------------------------------------------

    def is_bottom(self) -> bool:
        if isinstance(self.value, PolySet):
            return self.value.is_bottom()
        return self.value.is_empty()

    def join(self, other: AbstractStore) -> AbstractStore:
        if isinstance(self.value, PolySet):
            return self._with(self.value.join(other.value))
        return self._with(self.value.poly_hull(other.value))

    def leq(self, other: AbstractStore) -> bool:
        if isinstance(self.value, PolySet):
            return self.value.entails(other.value)
        return other.value.contains(self.value)

    def equals(self, other: AbstractStore) -> bool:
        return self.leq(other) and other.leq(self)

    def widen(self, newer: AbstractStore, cap: int) -> AbstractStore:
        if isinstance(self.value, PolySet):
            return self._with(powerset_widening(self.value, newer.value, cap))
        return self._with(standard_widening(self.value, newer.value))

    def contains_concrete(self, store: Mapping[str, int]) -> bool:
        point = [store[v] for v in self.variables]
        return self.value.contains_point(point)

    def _with(self, value) -> AbstractStore:
        return AbstractStore(self.variables, value)

    def _each(self) -> list[Polyhedron]:
        if isinstance(self.value, PolySet):
            return list(self.value.elements)
        return [] if self.value.is_empty() else [self.value]

    def _rebuild(self, polys: list[Polyhedron]) -> AbstractStore:
        if isinstance(self.value, PolySet):
            return self._with(PolySet.reduce(self.dim, Topology.CLOSED, polys))
        acc = Polyhedron.empty(self.dim, Topology.CLOSED)
        for p in polys:
            acc = acc.poly_hull(p)
        return self._with(acc)

    def pretty(self) -> str:
        if isinstance(self.value, PolySet):
            if self.value.is_bottom():
                return "{0>=1}"
            parts = [p.constraints_pretty(self.variables) for p in self.value.elements]
            return " | ".join(sorted(parts))
        return self.value.constraints_pretty(self.variables)


def _tighten_strict(cs: Sequence[Constraint]) -> list[Constraint]:
    """Integer tightening: <a,x> > b becomes <a,x> >= b+1 (closed domain)."""
    out = []
    for c in cs:
        if c.rel is Rel.GT:
            out.append(canonicalize_constraint(c.coeffs, ">=", c.rhs + 1))
        else:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Abstract expression evaluation
# ---------------------------------------------------------------------------

def to_linexpr(e: imp.Aexp, variables: Sequence[str]) -> LinExpr | None:
    """The exact affine form of an arithmetic expression, if it has one."""
    n = len(variables)
    if isinstance(e, imp.IntLit):
        return LinExpr.constant(e.value, n)
    if isinstance(e, imp.Var):
        return LinExpr.variable(variables.index(e.name), n)
    assert isinstance(e, imp.BinOp)
    left = to_linexpr(e.left, variables)
    right = to_linexpr(e.right, variables)
    if left is None or right is None:
        return None
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    return left.try_mul(right)


def _interval_of_dim(p: Polyhedron, k: int) -> Interval:
    if p.is_empty():
        return Interval.bottom()
    lo, hi = p.dim_bounds(k)
    ilo = None if lo is None else -((-lo.numerator) // lo.denominator)  # ceil
    ihi = None if hi is None else hi.numerator // hi.denominator  # floor
    if ilo is not None and ihi is not None and ilo > ihi:
        return Interval.bottom()
    return Interval(ilo, ihi)


def abstract_eval_aexp(e: imp.Aexp, store: AbstractStore) -> Interval:
    if store.is_bottom():
        return Interval.bottom()
    if isinstance(e, imp.IntLit):
        return Interval.singleton(e.value)
    if isinstance(e, imp.Var):
        k = store.variables.index(e.name)
        acc = Interval.bottom()
        for p in store._each():
            acc = acc.join(_interval_of_dim(p, k))
        return acc
    assert isinstance(e, imp.BinOp)
    return int_arith(e.op, abstract_eval_aexp(e.left, store), abstract_eval_aexp(e.right, store))


def abstract_eval_bexp(b: imp.Bexp, store: AbstractStore) -> AbstractBool:
    if store.is_bottom():
        return AbstractBool.BOT
    if isinstance(b, imp.BoolLit):
        return alpha_bool([b.value])
    assert isinstance(b, imp.Compare)
    return int_compare(
        b.op, abstract_eval_aexp(b.left, store), abstract_eval_aexp(b.right, store)
    )


# ---------------------------------------------------------------------------
# Filters and assignment
# ---------------------------------------------------------------------------

def _comparison_constraint(lhs: LinExpr, rhs: LinExpr, kind: str) -> Constraint:
    diff = rhs - lhs
    if kind == "lt":  # lhs < rhs, integers: lhs <= rhs - 1
        return canonicalize_constraint(diff.coeffs, ">=", 1 - diff.const)
    if kind == "ge":  # lhs >= rhs
        return canonicalize_constraint(diff.coeffs, "<=", -diff.const)
    if kind == "eq":
        return canonicalize_constraint(diff.coeffs, "=", -diff.const)
    if kind == "gt":  # lhs > rhs, integers: lhs >= rhs + 1
        return canonicalize_constraint(diff.coeffs, "<=", -1 - diff.const)
    raise AssertionError(kind)


def filter_store(store: AbstractStore, b: imp.Bexp, branch: bool) -> AbstractStore:
    """Sound Boolean filter (phi_tt / phi_ff)."""
    if store.is_bottom():
        return store
    if isinstance(b, imp.BoolLit):
        return store if b.value == branch else AbstractStore.bottom(store.variables, _domain_of(store))
    assert isinstance(b, imp.Compare)
    lhs = to_linexpr(b.left, store.variables)
    rhs = to_linexpr(b.right, store.variables)
    if lhs is None or rhs is None:
        return store  # non-affine side: identity is sound
    if b.op == "<":
        kind = "lt" if branch else "ge"
        c = _comparison_constraint(lhs, rhs, kind)
        return store._rebuild([p.add_constraint(c) for p in store._each()])
    # equality test
    if branch:
        c = _comparison_constraint(lhs, rhs, "eq")
        return store._rebuild([p.add_constraint(c) for p in store._each()])
    if isinstance(store.value, PolySet):
        below = _comparison_constraint(lhs, rhs, "lt")
        above = _comparison_constraint(lhs, rhs, "gt")
        pieces = [p.add_constraint(below) for p in store._each()]
        pieces += [p.add_constraint(above) for p in store._each()]
        return store._rebuild(pieces)
    return store  # convex domain cannot express the complement of a hyperplane


def _domain_of(store: AbstractStore) -> str:
    return "powerset" if isinstance(store.value, PolySet) else "poly"


def abstract_assign(store: AbstractStore, name: str, e: imp.Aexp) -> AbstractStore:
    if name not in store.variables:
        raise ValueError(f"assignment to undeclared variable {name!r}")
    if store.is_bottom():
        return store
    k = store.variables.index(name)
    expr = to_linexpr(e, store.variables)
    if expr is not None:
        return store._rebuild([p.affine_image(k, expr) for p in store._each()])
    n = store.dim
    out = []
    for p in store._each():
        iv = abstract_eval_aexp(e, AbstractStore(store.variables, p))
        if iv.is_bottom():
            continue
        lo = None if iv.lo is None else LinExpr.constant(iv.lo, n)
        hi = None if iv.hi is None else LinExpr.constant(iv.hi, n)
        out.append(p.bounded_affine_image(k, lo, hi))
    return store._rebuild(out)


# ---------------------------------------------------------------------------
# The analysis engine
# ---------------------------------------------------------------------------

@dataclass
class AnalysisResult:
    entries: dict[int, AbstractStore]
    exit_store: AbstractStore
    loop_invariants: dict[int, AbstractStore]
    widenings: int = 0
    delayed_joins: int = 0
    local_iterations: int = 0


def analyze(
    program: imp.Program, initial: AbstractStore, opts: AnalysisOptions = AnalysisOptions()
) -> AnalysisResult:
    if tuple(initial.variables) != tuple(program.variables):
        raise ValueError("initial store variables differ from the program's")
    result = AnalysisResult({}, initial, {})

    def eval_stmt(s: imp.Stmt, store: AbstractStore) -> AbstractStore:
        result.entries[s.pid] = store
        if isinstance(s, imp.Skip):
            return store
        if isinstance(s, imp.Assign):
            return abstract_assign(store, s.name, s.expr)
        if isinstance(s, imp.Seq):
            return eval_stmt(s.second, eval_stmt(s.first, store))
        if isinstance(s, imp.If):
            abstract_eval_bexp(s.cond, store)  # rule premise (soundness bookkeeping)
            then_out = eval_stmt(s.then, filter_store(store, s.cond, True))
            else_out = eval_stmt(s.orelse, filter_store(store, s.cond, False))
            return then_out.join(else_out)
        assert isinstance(s, imp.While)
        return eval_while(s, store)

    def eval_while(w: imp.While, store: AbstractStore) -> AbstractStore:
        head = store
        delay_left = opts.delay
        for _ in range(opts.max_local_iterations):
            result.entries[w.pid] = head
            abstract_eval_bexp(w.cond, head)
            body_out = eval_stmt(w.body, filter_store(head, w.cond, True))
            if body_out.leq(head):
                # subsumed recurrence: solve r = filter_ff(head) join r from bottom
                exit_ff = filter_store(head, w.cond, False)
                r = AbstractStore.bottom(head.variables, _domain_of(head))
                for _ in range(opts.max_local_iterations):
                    result.local_iterations += 1
                    nxt = exit_ff.join(r)
                    if nxt.leq(r):
                        break
                    r = nxt
                else:
                    raise AnalysisError("local fixpoint failed to converge")
                result.loop_invariants[w.pid] = head
                return exit_ff.join(r)
            if delay_left > 0:
                delay_left -= 1
                result.delayed_joins += 1
                head = head.join(body_out)
            else:
                result.widenings += 1
                head = head.widen(head.join(body_out), opts.cap)
        raise AnalysisError("loop analysis failed to stabilize (engine bug)")

    result.exit_store = eval_stmt(program.body, initial)
    return result
