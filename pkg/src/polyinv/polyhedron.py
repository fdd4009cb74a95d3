"""The double-description polyhedra kernel.

A polyhedron in ``Q^n`` is carried as a pair of dual descriptions of the
homogenization cone in ``Q^(n+1)``:

* *rows*: integer vectors ``(-b, a1..an)`` meaning ``<a, x> >= b`` (or
  ``= b``), plus the implicit positivity row ``xi0 >= 0``;
* *generators*: integer rays of the cone; a ray with ``xi0 > 0`` is a
  point with divisor ``xi0``, a ray with ``xi0 = 0`` is a ray of the
  polyhedron.  Lines (bidirectional rays) are kept explicit internally
  and rendered as pairs of opposite rays.

Conversion between the two descriptions is the incremental
Chernikova-style algorithm: constraints are added one at a time to a
seeded universe; generators violating the new half-space are combined
with satisfying ones across adjacent pairs only, where adjacency is the
combinatorial saturation test (two rays are adjacent iff no third ray
saturates a superset of their common saturated rows).  Keeping the
lineality space explicit is what makes that test sound: the ray cone is
pointed modulo the lines, so rays are genuine extreme rays and the
conversion output is minimal.  Running the conversion once in each
direction therefore minimizes both descriptions.

Not-necessarily-closed (NNC) polyhedra are embedded as closed polyhedra
with one extra slack dimension ``eps``: a strict ``<a, x> > b`` becomes
``<a, x> - eps >= b`` under the side constraints ``0 <= eps <= 1``, and
the encoded set is the projection of the region with ``eps > 0``.
Points of the embedding with positive slack project to points, points
with zero slack project to closure points.  All public comparisons of
NNC values are semantic (mutual inclusion of the encoded sets), never
comparisons of the internal embedding.

Everything here is exact integer/rational arithmetic; values are
immutable after construction (the lazily completed second description
is an idempotent internal cache, safe to recompute concurrently).
"""

from __future__ import annotations

import os
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .linalg import (
    Constraint,
    DimensionError,
    GenKind,
    Generator,
    LinExpr,
    Rel,
    canonicalize_constraint,
    scale_to_integers,
    vector_gcd,
)

Vec = tuple[int, ...]
Row = tuple[Vec, bool]  # (vector, is_equality)


class TopologyError(ValueError):
    """Strict constraints / closure points require an NNC polyhedron."""


class GeneratorSystemError(ValueError):
    """A nonempty generator system must contain at least one point."""


class WideningPreconditionError(ValueError):
    """standard_widening(P, Q) requires P to be included in Q."""


class Topology(Enum):
    CLOSED = "closed"
    NNC = "nnc"


# ---------------------------------------------------------------------------
# Integer vector helpers
# ---------------------------------------------------------------------------

def _dot(a: Vec, b: Vec) -> int:
    return sum(x * y for x, y in zip(a, b))


# POLYINV_MAX_BITS (fuzz harnesses only): abort instead of letting
# coefficient magnitudes run away on adversarial inputs
_MAX_BITS = int(os.environ.get("POLYINV_MAX_BITS", "0"))


def _norm(v: Sequence[int]) -> Vec | None:
    """gcd-normalize keeping orientation; None for the zero vector."""
    g = vector_gcd(v)
    if g == 0:
        return None
    if g > 1:
        v = tuple(x // g for x in v)
    else:
        v = tuple(v)
    if _MAX_BITS and any(abs(x).bit_length() > _MAX_BITS for x in v):
        raise ArithmeticError(f"coefficient exceeds POLYINV_MAX_BITS={_MAX_BITS}")
    return v


def _combine(ta: int, a: Vec, tb: int, b: Vec) -> Vec | None:
    return _norm(tuple(ta * x + tb * y for x, y in zip(a, b)))


def _unit(i: int, dim: int) -> Vec:
    return tuple(1 if j == i else 0 for j in range(dim))


# ---------------------------------------------------------------------------
# The conversion engine
# ---------------------------------------------------------------------------

def _dd_cone(dim: int, rows: Iterable[Row]) -> tuple[list[Vec], list[Vec]]:
    """DD pair (lines, rays) of ``{x : r.x >= 0 / r.x = 0 for r in rows}``.

    Seeded from the universe cone; rows are processed incrementally.
    The returned rays are exactly the extreme rays modulo the returned
    lineality basis.
    """
    lines: list[Vec] = [_unit(i, dim) for i in range(dim)]
    rays: list[Vec] = []
    sat: list[int] = []  # per-ray bitmask of saturated inequality rows
    mask_all = 0  # bits of all inequality rows processed so far
    nbits = 0

    for vec, is_eq in rows:
        if not any(vec):
            continue  # tautology row carries no information
        cut = None
        for j, line in enumerate(lines):
            t = _dot(vec, line)
            if t != 0:
                cut = (j, line, t)
                break
        if cut is not None:
            j, line, t = cut
            if t < 0:
                line = tuple(-x for x in line)
                t = -t
            new_lines = []
            for k, other in enumerate(lines):
                if k == j:
                    continue
                tk = _dot(vec, other)
                if tk == 0:
                    new_lines.append(other)
                else:
                    adjusted = _combine(t, other, -tk, line)
                    assert adjusted is not None
                    new_lines.append(adjusted)
            lines = new_lines
            for i, ray in enumerate(rays):
                s = _dot(vec, ray)
                if s != 0:
                    adjusted = _combine(t, ray, -s, line)
                    assert adjusted is not None
                    rays[i] = adjusted
            if is_eq:
                continue  # the cut direction disappears entirely
            bit = 1 << nbits
            nbits += 1
            sat = [m | bit for m in sat]  # every surviving ray saturates
            rays.append(line)
            sat.append(mask_all)
            mask_all |= bit
            continue

        # all lines saturate the row: classic partition step on rays
        vals = [_dot(vec, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        if is_eq:
            bit = 0
        else:
            bit = 1 << nbits
            nbits += 1
        combos: list[tuple[Vec, int]] = []
        for ip in pos:
            sp = sat[ip]
            for im in neg:
                common = sp & sat[im]
                adjacent = True
                for k in range(len(rays)):
                    if k != ip and k != im and (sat[k] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                new = _combine(vals[ip], rays[im], -vals[im], rays[ip])
                if new is not None:
                    combos.append((new, common | bit))
        keep = zero if is_eq else pos + zero
        new_rays = []
        new_sat = []
        for i in keep:
            new_rays.append(rays[i])
            new_sat.append(sat[i] | (bit if vals[i] == 0 else 0))
        for v, m in combos:
            new_rays.append(v)
            new_sat.append(m)
        rays = new_rays
        sat = new_sat
        if not is_eq:
            mask_all |= bit

    return lines, rays


def _dual_rows(hom_dim: int, lines: Sequence[Vec], rays: Sequence[Vec]) -> list[Row]:
    """Minimal row system of the cone generated by (lines, rays).

    Runs the same conversion in the polar space: lines become equality
    rows, rays inequality rows; the output lines/rays are the equality
    and inequality rows of the minimal constraint description.
    """
    dual_in: list[Row] = [(l, True) for l in lines] + [(r, False) for r in rays]
    dlines, drays = _dd_cone(hom_dim, dual_in)
    out: list[Row] = [(l, True) for l in dlines]
    for r in drays:
        if r[0] > 0 and not any(r[1:]):
            continue  # positivity row: the tautology "1 >= 0"
        out.append((r, False))
    return out


# ---------------------------------------------------------------------------
# Canonical bases (deterministic emission)
# ---------------------------------------------------------------------------

def _echelonize(vectors: Sequence[Vec], cols: range) -> list[Vec]:
    """Integer reduced row echelon over the given columns.

    Pivots are made positive; rows are fully reduced against each other
    and sorted by pivot column, giving a canonical basis.
    """
    basis = [list(v) for v in vectors]
    pivots: list[tuple[int, int]] = []  # (col, row index)
    for col in cols:
        pivot_row = None
        for i, row in enumerate(basis):
            if i in (r for _, r in pivots):
                continue
            if row[col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if basis[pivot_row][col] < 0:
            basis[pivot_row] = [-x for x in basis[pivot_row]]
        p = basis[pivot_row][col]
        for i, row in enumerate(basis):
            if i == pivot_row or row[col] == 0:
                continue
            q = row[col]
            basis[i] = [p * a - q * b for a, b in zip(row, basis[pivot_row])]
        pivots.append((col, pivot_row))
    out = []
    for col, i in sorted(pivots):
        v = _norm(basis[i])
        assert v is not None
        out.append(v)
    return out


def _reduce_mod(v: Vec, basis: Sequence[Vec], cols: range) -> Vec:
    """Reduce v against an echelon basis (pivot columns zeroed out)."""
    work = list(v)
    for b in basis:
        col = next(c for c in cols if b[c] != 0)
        if work[col] != 0:
            p = b[col]
            q = work[col]
            work = [p * a - q * x for a, x in zip(work, b)]
    reduced = _norm(work)
    assert reduced is not None
    return reduced


# ---------------------------------------------------------------------------
# Polyhedron
# ---------------------------------------------------------------------------

class Polyhedron:
    """An immutable convex polyhedron (closed or NNC) of fixed dimension."""

    __slots__ = (
        "_dim",
        "_topology",
        "_rows",
        "_gens",
        "_min_rows",
        "_min_gens",
        "_empty",
        "_nnc_cons",
        "_nnc_gens",
    )

    def __init__(self, dim: int, topology: Topology, *, _internal=False):
        if not _internal:
            raise TypeError("use the from_constraints/from_generators/universe/empty builders")
        self._dim = dim
        self._topology = topology
        self._rows: tuple[Row, ...] | None = None
        self._gens: tuple[tuple[Vec, ...], tuple[Vec, ...]] | None = None
        self._min_rows: tuple[Row, ...] | None = None
        self._min_gens: tuple[tuple[Vec, ...], tuple[Vec, ...]] | None = None
        self._empty: bool | None = None
        self._nnc_cons: tuple[Constraint, ...] | None = None
        self._nnc_gens: tuple[Generator, ...] | None = None

    # -- geometry of the internal representation --------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def topology(self) -> Topology:
        return self._topology

    @property
    def _rep_dim(self) -> int:
        # NNC values carry the eps slack as a trailing closed dimension
        return self._dim + (1 if self._topology is Topology.NNC else 0)

    @property
    def _hom_dim(self) -> int:
        return self._rep_dim + 1

    def _pi(self) -> Vec:
        return _unit(0, self._hom_dim)

    def _eps_col(self) -> int:
        return self._hom_dim - 1

    def _side_rows(self) -> list[Row]:
        if self._topology is Topology.CLOSED:
            return []
        e = self._eps_col()
        h = self._hom_dim
        low = tuple(1 if i == e else 0 for i in range(h))  # eps >= 0
        high = tuple(1 if i == 0 else (-1 if i == e else 0) for i in range(h))  # eps <= 1
        return [(low, False), (high, False)]

    # -- builders ----------------------------------------------------------

    @classmethod
    def _make(cls, dim: int, topology: Topology) -> Polyhedron:
        return cls(dim, topology, _internal=True)

    @classmethod
    def _from_rep_rows(cls, dim: int, topology: Topology, rows: Iterable[Row]) -> Polyhedron:
        p = cls._make(dim, topology)
        all_rows = list(rows) + p._side_rows()
        p._rows = tuple(all_rows)
        return p

    @classmethod
    def _from_rep_gens(
        cls,
        dim: int,
        topology: Topology,
        lines: Iterable[Vec],
        rays: Iterable[Vec],
    ) -> Polyhedron:
        p = cls._make(dim, topology)
        lines = tuple(lines)
        rays = tuple(rays)
        p._gens = (lines, rays)
        if topology is Topology.CLOSED:
            p._empty = not any(r[0] > 0 for r in rays)
        else:
            e = p._eps_col()
            p._empty = not any(r[0] > 0 and r[e] > 0 for r in rays)
        return p

    @classmethod
    def universe(cls, dim: int, topology: Topology = Topology.CLOSED) -> Polyhedron:
        return cls._from_rep_rows(dim, topology, [])

    @classmethod
    def empty(cls, dim: int, topology: Topology = Topology.CLOSED) -> Polyhedron:
        p = cls._make(dim, topology)
        p._empty = True
        return p

    @classmethod
    def from_constraints(
        cls,
        dim: int,
        topology: Topology,
        constraints: Iterable[Constraint],
    ) -> Polyhedron:
        rows: list[Row] = []
        for c in constraints:
            if c.dim != dim:
                raise DimensionError(
                    f"constraint of dimension {c.dim} in a polyhedron of dimension {dim}"
                )
            if c.rel is Rel.GT and topology is Topology.CLOSED:
                raise TopologyError("strict constraints need the NNC topology")
            if c.is_tautology():
                continue
            if c.is_contradiction():
                return cls.empty(dim, topology)
            rows.append(cls._encode_constraint(c, dim, topology))
        return cls._from_rep_rows(dim, topology, rows)

    @staticmethod
    def _encode_constraint(c: Constraint, dim: int, topology: Topology) -> Row:
        if topology is Topology.CLOSED:
            vec = (-c.rhs, *c.coeffs)
        else:
            eps = -1 if c.rel is Rel.GT else 0
            vec = (-c.rhs, *c.coeffs, eps)
        return (vec, c.rel is Rel.EQ)

    @classmethod
    def from_generators(
        cls,
        dim: int,
        topology: Topology,
        generators: Iterable[Generator],
    ) -> Polyhedron:
        gens = list(generators)
        for g in gens:
            if g.dim != dim:
                raise DimensionError(
                    f"generator of dimension {g.dim} in a polyhedron of dimension {dim}"
                )
            if g.kind is GenKind.CLOSURE_POINT and topology is Topology.CLOSED:
                raise TopologyError("closure points need the NNC topology")
        if not gens:
            return cls.empty(dim, topology)
        if not any(g.kind is GenKind.POINT for g in gens):
            raise GeneratorSystemError("a nonempty generator system needs at least one point")
        rays: list[Vec] = []
        for g in gens:
            if topology is Topology.CLOSED:
                rays.append((g.divisor, *g.coeffs))
            else:
                if g.kind is GenKind.POINT:
                    rays.append((g.divisor, *g.coeffs, g.divisor))
                    rays.append((g.divisor, *g.coeffs, 0))  # keep the embedding eps-downward closed
                elif g.kind is GenKind.CLOSURE_POINT:
                    rays.append((g.divisor, *g.coeffs, 0))
                else:
                    rays.append((0, *g.coeffs, 0))
        normed = []
        for r in rays:
            v = _norm(r)
            if v is not None:
                normed.append(v)
        return cls._from_rep_gens(dim, topology, [], normed)

    # -- lazy descriptions -------------------------------------------------

    def _rows_any(self) -> tuple[Row, ...]:
        if self._rows is not None:
            return self._rows
        if self._min_rows is not None:
            self._rows = self._min_rows
            return self._rows
        self._minimize()
        assert self._min_rows is not None
        self._rows = self._min_rows
        return self._rows

    def _gens_any(self) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
        if self._gens is not None:
            return self._gens
        if self._min_gens is not None:
            self._gens = self._min_gens
            return self._gens
        self._minimize()
        assert self._min_gens is not None
        self._gens = self._min_gens
        return self._gens

    def _forward(self, rows: Sequence[Row]) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
        ordered = (
            [r for r in rows if r[1]]
            + [(self._pi(), False)]
            + [r for r in rows if not r[1]]
        )
        lines, rays = _dd_cone(self._hom_dim, ordered)
        return tuple(lines), tuple(rays)

    def _is_empty_gens(self, gens: tuple[tuple[Vec, ...], tuple[Vec, ...]]) -> bool:
        _, rays = gens
        if self._topology is Topology.CLOSED:
            return not any(r[0] > 0 for r in rays)
        e = self._eps_col()
        return not any(r[0] > 0 and r[e] > 0 for r in rays)

    def _minimize(self) -> None:
        if self._min_rows is not None and self._min_gens is not None:
            return
        if self._empty is True:
            self._min_rows = ((tuple([-1] + [0] * self._rep_dim), False),)  # 0 >= 1
            self._min_gens = ((), ())
            return
        if self._rows is not None:
            gens = self._forward(self._rows)
            if self._is_empty_gens(gens):
                self._empty = True
                self._min_rows = None
                self._min_gens = None
                self._minimize()
                return
            self._empty = False
            self._min_gens = gens
            self._min_rows = tuple(_dual_rows(self._hom_dim, *gens))
            return
        assert self._gens is not None
        rows = tuple(_dual_rows(self._hom_dim, *self._gens))
        self._min_rows = rows
        gens = self._forward(rows)
        self._empty = self._is_empty_gens(gens)
        if self._empty:
            self._min_rows = None
            self._min_gens = None
            self._minimize()
        else:
            self._min_gens = gens

    def _minimal_rows(self) -> tuple[Row, ...]:
        self._minimize()
        assert self._min_rows is not None
        return self._min_rows

    def _minimal_gens(self) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
        self._minimize()
        assert self._min_gens is not None
        return self._min_gens

    # -- predicates ----------------------------------------------------------

    def is_empty(self) -> bool:
        if self._empty is None:
            self._minimize()
        return bool(self._empty)

    def is_universe(self) -> bool:
        return not self.is_empty() and len(self.minimized_constraints()) == 0

    def contains_point(self, point: Sequence) -> bool:
        if len(point) != self._dim:
            raise DimensionError(f"point of dimension {len(point)}, expected {self._dim}")
        if self.is_empty():
            return False
        coords = [Fraction(x) for x in point]
        for c in self.minimized_constraints():
            value = sum(a * x for a, x in zip(c.coeffs, coords)) - c.rhs
            if c.rel is Rel.EQ and value != 0:
                return False
            if c.rel is Rel.GE and value < 0:
                return False
            if c.rel is Rel.GT and value <= 0:
                return False
        return True

    def _check_compatible(self, other: Polyhedron) -> None:
        if self._dim != other._dim:
            raise DimensionError(f"dimension mismatch: {self._dim} vs {other._dim}")
        if self._topology is not other._topology:
            raise TopologyError(
                f"topology mismatch: {self._topology.value} vs {other._topology.value}"
            )

    def _rep_contains(self, other: Polyhedron) -> bool:
        """Inclusion of the internal closed representations."""
        if other.is_empty():
            return True
        if self.is_empty():
            return False
        rows = self._rows_any()
        lines, rays = other._gens_any()
        for vec, is_eq in rows:
            for l in lines:
                if _dot(vec, l) != 0:
                    return False
            for r in rays:
                v = _dot(vec, r)
                if v < 0 or (is_eq and v != 0):
                    return False
        return True

    def contains(self, other: Polyhedron) -> bool:
        """Set inclusion: other is a subset of self."""
        self._check_compatible(other)
        if other.is_empty():
            return True
        if self.is_empty():
            return False
        if self._topology is Topology.CLOSED:
            return self._rep_contains(other)
        gens = other.minimized_generators()
        for c in self.minimized_constraints():
            for g in gens:
                value = sum(a * x for a, x in zip(c.coeffs, g.coeffs)) - c.rhs * g.divisor
                if g.kind is GenKind.RAY:
                    ok = value == 0 if c.rel is Rel.EQ else value >= 0
                elif c.rel is Rel.EQ:
                    ok = value == 0
                elif c.rel is Rel.GE:
                    ok = value >= 0
                else:  # strict: points must win strictly, closure points weakly
                    ok = value > 0 if g.kind is GenKind.POINT else value >= 0
                if not ok:
                    return False
        return True

    def equals(self, other: Polyhedron) -> bool:
        return self.contains(other) and other.contains(self)

    # -- emission ------------------------------------------------------------

    def minimized_constraints(self) -> tuple[Constraint, ...]:
        if self._nnc_cons is not None:
            return self._nnc_cons
        if self.is_empty():
            out = (Constraint((0,) * self._dim, 1, Rel.GE),)
            self._nnc_cons = out
            return out
        rows = self._minimal_rows()
        n = self._dim
        seen: dict[tuple, Constraint] = {}
        for vec, is_eq in rows:
            coeffs = vec[1 : 1 + n]
            rhs = -vec[0]
            if self._topology is Topology.NNC:
                eps = vec[self._eps_col()]
                if not any(coeffs):
                    continue  # side rows and other pure-slack facets
                if is_eq:
                    assert eps == 0
                    rel = Rel.EQ
                else:
                    rel = Rel.GT if eps < 0 else Rel.GE
            else:
                if not any(coeffs):
                    continue
                rel = Rel.EQ if is_eq else Rel.GE
            c = canonicalize_constraint(coeffs, rel, rhs)
            key = (c.coeffs, c.rhs)
            prev = seen.get(key)
            if prev is None:
                seen[key] = c
            elif prev.rel is not c.rel:
                # eps-redundant twin: the strict (or equality) form wins
                order = {Rel.EQ: 0, Rel.GT: 1, Rel.GE: 2}
                if order[c.rel] < order[prev.rel]:
                    seen[key] = c
        out = tuple(sorted(seen.values(), key=Constraint.sort_key))
        self._nnc_cons = out
        return out

    def minimized_generators(self) -> tuple[Generator, ...]:
        if self._nnc_gens is not None:
            return self._nnc_gens
        if self.is_empty():
            self._nnc_gens = ()
            return ()
        lines, rays = self._minimal_gens()
        n = self._dim
        var_cols = range(1, self._hom_dim)
        basis = _echelonize(lines, var_cols)
        out: list[Generator] = []
        for l in basis:
            direction = l[1 : 1 + n]
            if any(direction):
                out.append(Generator.ray(direction))
                out.append(Generator.ray([-x for x in direction]))
        point_coords: set[tuple[Fraction, ...]] = set()
        reduced = [_reduce_mod(r, basis, var_cols) for r in rays]
        emitted: list[tuple[Vec, Generator]] = []
        for r in reduced:
            xi0 = r[0]
            coeffs = r[1 : 1 + n]
            if xi0 == 0:
                if any(coeffs):
                    emitted.append((r, Generator.ray(coeffs)))
                continue
            if self._topology is Topology.CLOSED:
                g = Generator.point(coeffs, xi0)
            else:
                eps = r[self._eps_col()]
                kind = GenKind.POINT if eps > 0 else GenKind.CLOSURE_POINT
                g = Generator.point(coeffs, xi0, kind=kind)
            if g.kind is GenKind.POINT:
                point_coords.add(g.coordinates())
            emitted.append((r, g))
        for _, g in emitted:
            if g.kind is GenKind.CLOSURE_POINT and g.coordinates() in point_coords:
                continue
            out.append(g)
        result = tuple(sorted(set(out), key=Generator.sort_key))
        self._nnc_gens = result
        return result

    def constraints_pretty(self, names: Sequence[str]) -> str:
        from .linalg import format_constraints

        return format_constraints(self.minimized_constraints(), names)

    def __repr__(self) -> str:
        names = [f"x{i}" for i in range(self._dim)]
        flavour = "nnc " if self._topology is Topology.NNC else ""
        if self._empty is True:
            return f"<{flavour}polyhedron dim={self._dim} empty>"
        return f"<{flavour}polyhedron dim={self._dim} {self.constraints_pretty(names)}>"

    # -- lattice operations ----------------------------------------------------

    def intersection(self, other: Polyhedron) -> Polyhedron:
        self._check_compatible(other)
        if self.is_empty() or other.is_empty():
            return Polyhedron.empty(self._dim, self._topology)
        return Polyhedron._from_rep_rows(
            self._dim, self._topology, self._rows_any() + other._rows_any()
        )

    def add_constraints(self, constraints: Iterable[Constraint]) -> Polyhedron:
        extra = Polyhedron.from_constraints(self._dim, self._topology, constraints)
        return self.intersection(extra)

    def add_constraint(self, c: Constraint) -> Polyhedron:
        return self.add_constraints([c])

    def poly_hull(self, other: Polyhedron) -> Polyhedron:
        self._check_compatible(other)
        if self.is_empty():
            return other
        if other.is_empty():
            return self
        l1, r1 = self._gens_any()
        l2, r2 = other._gens_any()
        return Polyhedron._from_rep_gens(self._dim, self._topology, l1 + l2, r1 + r2)

    # -- images ------------------------------------------------------------------

    def _integerize_expr(self, expr: LinExpr) -> tuple[tuple[int, ...], int, int]:
        if expr.dim != self._dim:
            raise DimensionError(f"expression of dimension {expr.dim}, expected {self._dim}")
        ints, mult = scale_to_integers(tuple(expr.coeffs) + (expr.const,))
        return ints[:-1], ints[-1], mult

    def affine_image(self, k: int, expr: LinExpr) -> Polyhedron:
        """Exact image of the single-update map ``x_k := expr(x)``."""
        if not 0 <= k < self._dim:
            raise DimensionError(f"dimension {k} out of range")
        coeffs, const, mult = self._integerize_expr(expr)
        if self.is_empty():
            return self
        col = 1 + k

        def tr(vec: Vec) -> Vec | None:
            newk = sum(a * vec[1 + i] for i, a in enumerate(coeffs)) + const * vec[0]
            out = [mult * x for x in vec]
            out[col] = newk
            return _norm(out)

        lines, rays = self._gens_any()
        new_lines = [v for v in (tr(l) for l in lines) if v is not None]
        new_rays = [v for v in (tr(r) for r in rays) if v is not None]
        return Polyhedron._from_rep_gens(self._dim, self._topology, new_lines, new_rays)

    def affine_preimage(self, k: int, expr: LinExpr) -> Polyhedron:
        """Exact preimage of the single-update map ``x_k := expr(x)``."""
        if not 0 <= k < self._dim:
            raise DimensionError(f"dimension {k} out of range")
        coeffs, const, mult = self._integerize_expr(expr)
        if self.is_empty():
            return self
        col = 1 + k
        rows = []
        for vec, is_eq in self._rows_any():
            ck = vec[col]
            out = [mult * x for x in vec]
            out[0] = mult * vec[0] + ck * const
            for i, a in enumerate(coeffs):
                if i == k:
                    out[1 + i] = ck * a
                else:
                    out[1 + i] = mult * vec[1 + i] + ck * a
            v = _norm(out)
            if v is None:
                continue
            rows.append((v, is_eq))
        return Polyhedron._from_rep_rows(self._dim, self._topology, rows)

    def bounded_affine_image(
        self, k: int, lo: LinExpr | None, hi: LinExpr | None
    ) -> Polyhedron:
        """Exact image of ``lo(x) <= x_k' <= hi(x)`` (identity elsewhere)."""
        if not 0 <= k < self._dim:
            raise DimensionError(f"dimension {k} out of range")
        if self.is_empty():
            return self
        n = self._dim
        q = self.add_dimensions(1)  # a fresh trailing dimension holds the new value
        cs = []
        if lo is not None:
            coeffs = list(lo.coeffs) + [Fraction(-1)]
            cs.append(canonicalize_constraint(coeffs, "<=", -lo.const))
        if hi is not None:
            coeffs = list(hi.coeffs) + [Fraction(-1)]
            cs.append(canonicalize_constraint(coeffs, ">=", -hi.const))
        q = q.add_constraints(cs)
        q = q.remove_dimensions([k])
        # dims are now [0..k-1, k+1..n-1, w]; move w back into slot k
        perm = []
        for i in range(n - 1):
            perm.append(i if i < k else i + 1)
        perm.append(k)
        return q.map_dimensions(perm)

    def relation_image(self, rel: Polyhedron) -> Polyhedron:
        """psi_rel: embed into 2n dims, meet the relation, keep primed dims."""
        if rel.dim != 2 * self._dim:
            raise DimensionError(
                f"relation of dimension {rel.dim}, expected {2 * self._dim}"
            )
        if rel.topology is not self._topology:
            raise TopologyError("relation topology differs")
        n = self._dim
        if self.is_empty():
            return self
        embedded = self.add_dimensions(n)
        meet = embedded.intersection(rel)
        return meet.remove_dimensions(range(n))

    def time_elapse(self, rates: Polyhedron) -> Polyhedron:
        """``{v + t*w : v in self, w in rates, t >= 0}`` via generators."""
        self._check_compatible(rates)
        if self.is_empty() or rates.is_empty():
            return Polyhedron.empty(self._dim, self._topology)
        lines, rays = self._gens_any()
        dlines, drays = rates._gens_any()
        new_lines = list(lines) + list(dlines)
        new_rays = list(rays)
        for r in drays:
            direction = [0] + list(r[1 : 1 + self._dim]) + ([0] if self._topology is Topology.NNC else [])
            v = _norm(direction)
            if v is not None:
                new_rays.append(v)
        return Polyhedron._from_rep_gens(self._dim, self._topology, new_lines, new_rays)

    def topological_closure(self, *, as_closed: bool = False) -> Polyhedron:
        if self._topology is Topology.CLOSED:
            return self
        target = Topology.CLOSED if as_closed else Topology.NNC
        if self.is_empty():
            return Polyhedron.empty(self._dim, target)
        gens = []
        for g in self.minimized_generators():
            if g.kind is GenKind.CLOSURE_POINT:
                gens.append(Generator(GenKind.POINT, g.coeffs, g.divisor))
            else:
                gens.append(g)
        return Polyhedron.from_generators(self._dim, target, gens)

    # -- dimension surgery --------------------------------------------------------

    def add_dimensions(self, m: int) -> Polyhedron:
        if m < 0:
            raise DimensionError("cannot add a negative number of dimensions")
        if m == 0:
            return self
        if self.is_empty():
            return Polyhedron.empty(self._dim + m, self._topology)
        rows = []
        pad = (0,) * m
        if self._topology is Topology.CLOSED:
            for vec, is_eq in self._rows_any():
                rows.append((vec + pad, is_eq))
        else:
            for vec, is_eq in self._rows_any():
                rows.append((vec[:-1] + pad + vec[-1:], is_eq))
        return Polyhedron._from_rep_rows(self._dim + m, self._topology, rows)

    def remove_dimensions(self, dims: Iterable[int]) -> Polyhedron:
        drop = sorted(set(dims))
        for d in drop:
            if not 0 <= d < self._dim:
                raise DimensionError(f"dimension {d} out of range")
        if not drop:
            return self
        new_dim = self._dim - len(drop)
        if self.is_empty():
            return Polyhedron.empty(new_dim, self._topology)
        cols = [0] + [1 + i for i in range(self._dim) if i not in set(drop)]
        if self._topology is Topology.NNC:
            cols.append(self._eps_col())
        lines, rays = self._gens_any()
        new_lines = []
        for l in lines:
            v = _norm([l[c] for c in cols])
            if v is not None:
                new_lines.append(v)
        new_rays = []
        for r in rays:
            v = _norm([r[c] for c in cols])
            if v is not None:
                new_rays.append(v)
        return Polyhedron._from_rep_gens(new_dim, self._topology, new_lines, new_rays)

    def map_dimensions(self, perm: Sequence[int]) -> Polyhedron:
        if len(perm) != self._dim or sorted(perm) != list(range(self._dim)):
            raise DimensionError("map_dimensions needs a total permutation")
        if self.is_empty():
            return self
        cols = [0] * self._hom_dim
        cols[0] = 0
        for old, new in enumerate(perm):
            cols[1 + new] = 1 + old
        if self._topology is Topology.NNC:
            cols[self._eps_col()] = self._eps_col()

        def remap(vec: Vec) -> Vec:
            return tuple(vec[c] for c in cols)

        if self._rows is not None or self._min_rows is not None:
            rows = [(remap(v), eq) for v, eq in self._rows_any()]
            return Polyhedron._from_rep_rows(self._dim, self._topology, rows)
        lines, rays = self._gens_any()
        return Polyhedron._from_rep_gens(
            self._dim, self._topology, [remap(l) for l in lines], [remap(r) for r in rays]
        )

    def concatenate(self, other: Polyhedron) -> Polyhedron:
        if self._topology is not other._topology:
            raise TopologyError("concatenation needs matching topologies")
        m, n = self._dim, other._dim
        if self.is_empty() or other.is_empty():
            return Polyhedron.empty(m + n, self._topology)
        rows: list[Row] = []
        if self._topology is Topology.CLOSED:
            for vec, eq in self._rows_any():
                rows.append((vec + (0,) * n, eq))
            for vec, eq in other._rows_any():
                rows.append(((vec[0],) + (0,) * m + vec[1:], eq))
        else:
            for vec, eq in self._rows_any():
                rows.append((vec[:-1] + (0,) * n + vec[-1:], eq))
            for vec, eq in other._rows_any():
                rows.append(((vec[0],) + (0,) * m + vec[1:], eq))
        return Polyhedron._from_rep_rows(m + n, self._topology, rows)

    # -- bounds -------------------------------------------------------------------

    def dim_bounds(self, k: int) -> tuple[Fraction | None, Fraction | None]:
        """Bounds of the projection onto dimension k (closure bounds for NNC).

        Returns (lo, hi) with None meaning unbounded; must not be called
        on an empty polyhedron.
        """
        if not 0 <= k < self._dim:
            raise DimensionError(f"dimension {k} out of range")
        if self.is_empty():
            raise ValueError("dim_bounds on an empty polyhedron")
        lines, rays = self._minimal_gens()
        col = 1 + k
        lo: Fraction | None = None
        hi: Fraction | None = None
        unbounded_lo = any(l[col] != 0 for l in lines)
        unbounded_hi = unbounded_lo
        for r in rays:
            if r[0] == 0:
                if r[col] < 0:
                    unbounded_lo = True
                elif r[col] > 0:
                    unbounded_hi = True
        for r in rays:
            if r[0] > 0:
                val = Fraction(r[col], r[0])
                lo = val if lo is None else min(lo, val)
                hi = val if hi is None else max(hi, val)
        return (None if unbounded_lo else lo, None if unbounded_hi else hi)


# ---------------------------------------------------------------------------
# The standard widening
# ---------------------------------------------------------------------------

def _split_inequalities(rows: Iterable[Row]) -> list[Vec]:
    out: list[Vec] = []
    for vec, is_eq in rows:
        out.append(vec)
        if is_eq:
            out.append(tuple(-x for x in vec))
    return out


def standard_widening(older: Polyhedron, newer: Polyhedron) -> Polyhedron:
    """The standard polyhedra widening ``older widen newer``.

    Requires ``older`` to be included in ``newer`` (engines call it as
    ``x widen (x join f(x))``).  The result keeps the constraints of
    ``older`` satisfied by every generator of ``newer`` (equalities
    split into inequality pairs) together with the constraints of
    ``newer``'s minimized system that can stand in for some constraint
    of ``older`` without changing it; for NNC values the computation
    runs on the slack embedding with the slack side constraints pinned.
    """
    older._check_compatible(newer)
    if not newer.contains(older):
        raise WideningPreconditionError("widening requires the first argument to be smaller")
    if older.is_empty():
        return newer
    if older._rep_contains(newer):
        return newer

    def exchangeable(rows):
        # the pinned slack side rows are re-added by the builder and must
        # not take part in the keep/replace game
        n = older.dim
        return [v for v in _split_inequalities(rows) if any(v[1 : 1 + n])]

    p_rows = exchangeable(older._minimal_rows())
    lines, rays = newer._gens_any()
    s1 = []
    for vec in p_rows:
        if all(_dot(vec, l) == 0 for l in lines) and all(_dot(vec, r) >= 0 for r in rays):
            s1.append(vec)
    kept = set(s1)
    q_rows = exchangeable(newer._minimal_rows())
    p_set = list(dict.fromkeys(p_rows))
    for beta in q_rows:
        if beta in kept:
            continue
        for gamma in p_set:
            trial_rows = [(v, False) for v in p_set if v != gamma] + [(beta, False)]
            trial = Polyhedron._from_rep_rows(older.dim, older.topology, trial_rows)
            if trial._rep_contains(older) and older._rep_contains(trial):
                s1.append(beta)
                kept.add(beta)
                break
    result_rows: list[Row] = [(v, False) for v in dict.fromkeys(s1)]
    return Polyhedron._from_rep_rows(older.dim, older.topology, result_rows)
