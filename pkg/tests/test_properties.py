"""Randomized kernel property suites (smoke-sized; the acceptance gate
runs the same engines at their full case counts)."""

import random

from . import suites


def test_dd_round_trip():
    assert suites.dd_round_trip_suite(random.Random(101), 120) == 120


def test_hull_bounds():
    assert suites.hull_bounds_suite(random.Random(102), 120) == 120


def test_inclusion_agrees_with_fourier_motzkin():
    assert suites.inclusion_oracle_suite(random.Random(103), 120) == 120


def test_widening_chains_stabilize():
    assert suites.widening_chain_suite(random.Random(104), 80) == 80


def test_elapse_laws():
    assert suites.elapse_suite(random.Random(105), 120) == 120


def test_closure_laws():
    assert suites.closure_suite(random.Random(106), 120) == 120


def test_nnc_emptiness_agrees_with_rational_feasibility():
    assert suites.nnc_emptiness_suite(random.Random(107), 120) == 120


def test_intersection_pointwise():
    assert suites.intersection_point_suite(random.Random(108), 80) == 80


def test_soundness_fuzz_smoke():
    checked, diverged = suites.soundness_fuzz_suite(random.Random(109), 150)
    assert checked == 150
    assert diverged < checked  # the generator must mostly produce terminating runs


def test_soundness_fuzz_powerset_smoke():
    checked, _ = suites.soundness_fuzz_suite(random.Random(110), 60, domain="powerset")
    assert checked == 60
