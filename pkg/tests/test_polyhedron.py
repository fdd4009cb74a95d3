"""Kernel unit tests: conversion, lattice operations, images, surgery."""

from fractions import Fraction

import pytest

from polyinv.linalg import GenKind, Generator, LinExpr, Rel, canonicalize_constraint
from polyinv.parse import parse_constraints
from polyinv.polyhedron import (
    GeneratorSystemError,
    Polyhedron,
    Topology,
    TopologyError,
)

from .oracles import enumerate_vertices_1d

X01 = {"x0": 0, "x1": 1}
WX = {"w": 0, "x": 1}


def poly(text, n=2, index=None, topology=Topology.CLOSED):
    cs = parse_constraints(text, index or X01, n)
    return Polyhedron.from_constraints(n, topology, cs)


def gens_of(p):
    return [(g.kind, g.coeffs, g.divisor) for g in p.minimized_generators()]


class TestConstruction:
    def test_redundant_constraint_dropped(self):
        p = poly("x>=0, x<=1, x<=2", n=1, index={"x": 0})
        assert p.constraints_pretty(["x"]) == "{x<=1, x>=0}"

    def test_contradictory_is_empty(self):
        assert poly("x>=1, x<=0", n=1, index={"x": 0}).is_empty()

    def test_no_constraints_is_universe(self):
        assert Polyhedron.universe(2).is_universe()

    def test_strict_needs_nnc(self):
        c = canonicalize_constraint([1], ">", 0)
        with pytest.raises(TopologyError):
            Polyhedron.from_constraints(1, Topology.CLOSED, [c])

    def test_closure_point_needs_nnc(self):
        with pytest.raises(TopologyError):
            Polyhedron.from_generators(1, Topology.CLOSED, [Generator.closure_point([0])])

    def test_pointless_generators_rejected(self):
        with pytest.raises(GeneratorSystemError):
            Polyhedron.from_generators(1, Topology.CLOSED, [Generator.ray([1])])

    def test_empty_generator_list(self):
        assert Polyhedron.from_generators(2, Topology.CLOSED, []).is_empty()


class TestConversion:
    def test_segment_vertices_match_enumeration_oracle(self):
        cs = parse_constraints("x>=0, x<=1", {"x": 0}, 1)
        p = Polyhedron.from_constraints(1, Topology.CLOSED, cs)
        vertices = enumerate_vertices_1d(cs)
        assert vertices == [0, 1]
        got = sorted(
            g.coordinates()[0] for g in p.minimized_generators() if g.kind is GenKind.POINT
        )
        assert got == vertices

    def test_universe_line_rendered_as_ray_pair(self):
        got = gens_of(Polyhedron.universe(1))
        assert (GenKind.POINT, (0,), 1) in got
        assert (GenKind.RAY, (1,), 0) in got
        assert (GenKind.RAY, (-1,), 0) in got

    def test_hand_converted_wedge(self):
        p = poly("2*x0+3*x1>=5, x1>=1")
        assert gens_of(p) == [
            (GenKind.POINT, (1, 1), 1),
            (GenKind.RAY, (-3, 2), 0),
            (GenKind.RAY, (1, 0), 0),
        ]
        # round-trip through the generator side
        back = Polyhedron.from_generators(2, Topology.CLOSED, p.minimized_generators())
        assert back.equals(p)

    def test_half_plane_needs_lineality(self):
        p = poly("x0+x1>=0")
        back = Polyhedron.from_generators(2, Topology.CLOSED, p.minimized_generators())
        assert back.equals(p)
        assert back.contains_point([5, -5]) and not back.contains_point([0, -1])


class TestPredicates:
    def test_contains_point_strictness(self):
        p = poly("x>0", n=1, index={"x": 0}, topology=Topology.NNC)
        assert not p.is_empty()
        assert not p.contains_point([0])
        assert p.contains_point([Fraction(1, 100)])

    def test_nnc_strict_contradiction(self):
        assert poly("x>0, x<=0", n=1, index={"x": 0}, topology=Topology.NNC).is_empty()

    def test_inclusion(self):
        assert poly("x>=0", n=1, index={"x": 0}).contains(poly("x=0", n=1, index={"x": 0}))
        assert not poly("x>=1", n=1, index={"x": 0}).contains(poly("x>=0", n=1, index={"x": 0}))

    def test_paper_inclusion_p0_in_q0(self):
        q0 = poly("2*x0+3*x1>=5, x1>=1")
        p0 = poly("x0>=1, x1=1")
        assert q0.contains(p0)


class TestLattice:
    def test_meet(self):
        p = poly("x>=0", n=1, index={"x": 0}).intersection(poly("x<=0", n=1, index={"x": 0}))
        assert p.constraints_pretty(["x"]) == "{x=0}"

    def test_nnc_meet_empty(self):
        a = poly("w<10", n=1, index={"w": 0}, topology=Topology.NNC)
        b = poly("w=10", n=1, index={"w": 0}, topology=Topology.NNC)
        assert a.intersection(b).is_empty()

    def test_add_constraint_makes_redundant(self):
        q0 = poly("2*x0+3*x1>=5, x1>=1")
        q0f = q0.add_constraints(parse_constraints("x0<=0", X01, 2))
        assert q0f.equals(poly("2*x0+3*x1>=5, x0<=0"))

    def test_hull_bottom_identity(self):
        q = poly("x0>=1, x1=1")
        assert Polyhedron.empty(2).poly_hull(q).equals(q)
        assert q.poly_hull(Polyhedron.empty(2)).equals(q)

    def test_hull_derived_example(self):
        h = poly("x0>=1, x1=1").poly_hull(poly("x0>=-2, x1=3"))
        assert h.equals(poly("2*x0+3*x1>=5, x1>=1, x1<=3"))

    def test_hull_idempotent(self):
        p = poly("2*x0+3*x1>=5, x1>=1")
        assert p.poly_hull(p).equals(p)


class TestImages:
    def test_affine_image_paper_steps(self):
        p0 = poly("x0>=1, x1=1")
        x0 = LinExpr.variable(0, 2)
        x1 = LinExpr.variable(1, 2)
        two = LinExpr.constant(2, 2)
        p0p = p0.affine_image(1, x1 + two)
        assert p0p.equals(poly("x0>=1, x1=3"))
        p1 = p0p.affine_image(0, x0 - x1)
        assert p1.equals(poly("x0>=-2, x1=3"))

    def test_affine_image_identity(self):
        p = poly("2*x0+3*x1>=5, x1>=1")
        assert p.affine_image(0, LinExpr.variable(0, 2)).equals(p)

    def test_affine_preimage_inverts_image(self):
        p = poly("x0>=1, x1=3")
        e = LinExpr.variable(0, 2) - LinExpr.variable(1, 2)
        img = p.affine_image(0, e)
        assert img.affine_preimage(0, e).equals(p)

    def test_affine_preimage_of_constant_assignment(self):
        p = poly("x0=5, x1>=0")
        pre = p.affine_preimage(0, LinExpr.constant(5, 2))
        assert pre.equals(poly("x1>=0"))

    def test_bounded_affine_image_constant_bounds(self):
        p = poly("x0=0, x1=0")
        q = p.bounded_affine_image(1, LinExpr.constant(0, 2), LinExpr.constant(1, 2))
        assert q.equals(poly("x0=0, x1>=0, x1<=1"))

    def test_bounded_affine_image_degenerate_equals_affine(self):
        p = poly("x0>=1, x1=1")
        e = LinExpr.variable(1, 2) + LinExpr.constant(2, 2)
        assert p.bounded_affine_image(1, e, e).equals(p.affine_image(1, e))

    def test_bounded_affine_image_interval_shift(self):
        p = poly("x0=0, x1=0")
        x0 = LinExpr.variable(0, 2)
        one = LinExpr.constant(1, 2)
        q = p.bounded_affine_image(0, x0, x0 + one)
        assert q.equals(poly("x0>=0, x0<=1, x1=0"))

    def test_bounded_affine_image_unbounded_side(self):
        p = poly("x0=0, x1=0")
        q = p.bounded_affine_image(0, LinExpr.variable(0, 2), None)
        assert q.equals(poly("x0>=0, x1=0"))


class TestRelationAndElapse:
    def test_relation_image_definition(self):
        p = poly("w>=1, w<=10", index=WX)
        rel_index = {"w": 0, "x": 1, "w'": 2, "x'": 3}
        rel = Polyhedron.from_constraints(
            4, Topology.CLOSED, parse_constraints("w=10, w'=10, x'=0", rel_index, 4)
        )
        assert p.relation_image(rel).equals(poly("w=10, x=0", index=WX))

    def test_relation_image_identity(self):
        p = poly("w>=1, w<=10, x>=2", index=WX)
        rel_index = {"w": 0, "x": 1, "w'": 2, "x'": 3}
        rel = Polyhedron.from_constraints(
            4, Topology.CLOSED, parse_constraints("w'=w, x'=x", rel_index, 4)
        )
        assert p.relation_image(rel).equals(p)

    def test_relation_image_of_empty(self):
        rel = Polyhedron.universe(4)
        assert Polyhedron.empty(2).relation_image(rel).is_empty()

    def test_time_elapse_single_ray(self):
        p = poly("w=10, x=0", index=WX)
        rates = poly("w=1, x=1", index=WX)
        assert p.time_elapse(rates).equals(poly("w-x=10, x>=0", index=WX))

    def test_time_elapse_zero_rates(self):
        p = poly("w=10, x=0", index=WX)
        rates = poly("w=0, x=0", index=WX)
        assert p.time_elapse(rates).equals(p)

    def test_time_elapse_empty_cases(self):
        p = poly("w=10, x=0", index=WX)
        assert Polyhedron.empty(2).time_elapse(p).is_empty()
        assert p.time_elapse(Polyhedron.empty(2)).is_empty()

    def test_elapse_idempotent(self):
        p = poly("w=10, x=0", index=WX)
        rates = poly("w=1, x=1", index=WX)
        once = p.time_elapse(rates)
        assert once.time_elapse(rates).equals(once)


class TestClosure:
    def test_closure_weakens_strict(self):
        p = poly("w>=1, w<10", n=1, index={"w": 0}, topology=Topology.NNC)
        assert p.topological_closure().equals(
            poly("w>=1, w<=10", n=1, index={"w": 0}, topology=Topology.NNC)
        )

    def test_closure_of_closed_is_identity(self):
        p = poly("x0>=1, x1=1")
        assert p.topological_closure() is p

    def test_closure_of_empty(self):
        assert Polyhedron.empty(2, Topology.NNC).topological_closure().is_empty()

    def test_closure_as_closed(self):
        p = poly("w>0", n=1, index={"w": 0}, topology=Topology.NNC)
        c = p.topological_closure(as_closed=True)
        assert c.topology is Topology.CLOSED
        assert c.equals(poly("w>=0", n=1, index={"w": 0}))


class TestSurgery:
    def test_concatenate(self):
        a = poly("x=1", n=1, index={"x": 0})
        b = poly("y>=0", n=1, index={"y": 0})
        c = a.concatenate(b)
        assert c.equals(poly("x0=1, x1>=0"))

    def test_projection_fourier_motzkin_case(self):
        # eliminating y from {x+y >= 1, y >= 3} leaves x unconstrained
        p = poly("x0+x1>=1, x1>=3")
        q = p.remove_dimensions([1])
        assert q.dim == 1 and q.is_universe()

    def test_add_dimensions_free(self):
        p = poly("x=0", n=1, index={"x": 0})
        q = p.add_dimensions(1)
        assert q.equals(poly("x0=0"))
        lo, hi = q.dim_bounds(1)
        assert lo is None and hi is None

    def test_map_dimensions(self):
        p = poly("x0=1, x1>=2")
        q = p.map_dimensions([1, 0])
        assert q.equals(poly("x1=1, x0>=2"))

    def test_nnc_surgery_keeps_strictness(self):
        p = poly("x0>0", topology=Topology.NNC)
        q = p.remove_dimensions([1])
        assert q.contains_point([1]) and not q.contains_point([0])


class TestNNCConsistency:
    def test_equality_independent_of_construction_order(self):
        a = poly("x0>0, x0<5, x1>=1", topology=Topology.NNC)
        b = poly("x1>=1, x0<5, x0>0", topology=Topology.NNC)
        assert a.equals(b)

    def test_nnc_generators_of_open_interval(self):
        p = poly("x>0, x<1", n=1, index={"x": 0}, topology=Topology.NNC)
        gens = p.minimized_generators()
        assert any(g.kind is GenKind.POINT for g in gens)
        cps = sorted(g.coordinates()[0] for g in gens if g.kind is GenKind.CLOSURE_POINT)
        assert cps == [0, 1]

    def test_nnc_roundtrip_through_generators(self):
        p = poly("x0>0, x0+x1<=3", topology=Topology.NNC)
        back = Polyhedron.from_generators(2, Topology.NNC, p.minimized_generators())
        assert back.equals(p)


class TestDimBounds:
    def test_bounds_of_wedge(self):
        p = poly("2*x0+3*x1>=5, x1>=1")
        assert p.dim_bounds(0) == (None, None)
        assert p.dim_bounds(1) == (1, None)

    def test_bounds_of_point(self):
        p = poly("x0=1, x1=1")
        assert p.dim_bounds(0) == (1, 1)
