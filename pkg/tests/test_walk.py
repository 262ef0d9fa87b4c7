import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semitree.tree import TreeError, TreeParams, TruncatedTree
from semitree.walk import (
    eigen_martingale_check,
    exact_distribution,
    frequency_agreement,
    simulate,
    simulate_levels,
    vertex_distribution,
)

P23 = TreeParams(2, 3)


def test_zero_steps():
    law = exact_distribution(P23, 0)
    assert law.level_mass == (1,)
    assert simulate(P23, 0, 50, seed=1).counts == (50,)


def test_two_steps():
    law = exact_distribution(P23, 2)
    assert law.level_mass == (Fraction(1, 4), 0, Fraction(3, 4))
    assert law.vertex_mass(0) == Fraction(1, 4)
    assert law.vertex_mass(2) == Fraction(1, 12)


@pytest.mark.parametrize("params", [P23, TreeParams(3, 2), TreeParams(4, 2)])
def test_radial_against_vertex_propagation(params):
    tree = TruncatedTree(params, 7)
    for n in range(7):
        law = exact_distribution(params, n)
        per_vertex = vertex_distribution(tree, n)
        assert law.total == 1
        assert per_vertex == {v: m for v, m in law.on_ball(tree).items() if m}


def test_parity_of_support():
    law = exact_distribution(P23, 7)
    assert all(m == 0 for ell, m in enumerate(law.level_mass) if ell % 2 == 0)


def test_horizon_beyond_depth_rejected():
    with pytest.raises(TreeError):
        exact_distribution(P23, 5, depth=5)
    with pytest.raises(TreeError):
        vertex_distribution(TruncatedTree(P23, 4), 4)


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=-2, max_value=2, max_denominator=10), st.integers(0, 10))
def test_martingale_exact(gamma, n):
    res = eigen_martingale_check(P23, gamma, n, trials=0)
    assert res["exact_residual"] == 0


def test_martingale_examples():
    assert eigen_martingale_check(P23, 1, 5, trials=0)["exact_expectation"] == 1
    assert eigen_martingale_check(P23, Fraction(0), 2, trials=0)["exact_expectation"] == 0
    res = eigen_martingale_check(P23, Fraction(1, 2), 4, trials=200_000, seed=3)
    assert res["exact_expectation"] == Fraction(1, 16)
    assert res["mc_within_3sigma"]


def test_seeded_reproducible():
    a = simulate_levels(P23, 5, 1000, seed=7)
    b = simulate_levels(P23, 5, 1000, seed=7)
    c = simulate_levels(P23, 5, 1000, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_threaded_blocks_match_serial():
    a = simulate_levels(P23, 4, 250_000, seed=2)
    b = simulate_levels(P23, 4, 250_000, seed=2, workers=3)
    assert np.array_equal(a, b)


def test_level0_frequency_two_steps():
    sim = simulate(P23, 2, 1_000_000, seed=0)
    sigma = math.sqrt(0.25 * 0.75 / 1e6)
    assert abs(sim.frequencies[0] - 0.25) <= 3 * sigma


def test_frequencies_four_steps():
    rows = frequency_agreement(P23, 4, 200_000, seed=4)
    assert all(r["within"] for r in rows)


def test_trials_required():
    with pytest.raises(ValueError):
        simulate(P23, 3, 0)
