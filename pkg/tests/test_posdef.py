from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semitree.posdef import (
    exact_psd,
    gns_inner,
    gns_l2_proportionality,
    gram_matrix,
    is_positive_definite,
    matrix_coefficient_check,
)
from semitree.radial_algebra import RadialSeq, convolve_radial, functional_L, involution
from semitree.spherical import eval_spherical
from semitree.tree import TreeError, TreeParams, TruncatedTree

P23 = TreeParams(2, 3)


def test_exact_psd_small():
    assert exact_psd([[1, 1], [1, 1]])
    assert not exact_psd([[1, 2], [2, 1]])
    assert exact_psd([[0, 0], [0, 0]])
    assert not exact_psd([[0, 1], [1, 0]])


@settings(max_examples=50)
@given(st.lists(st.integers(-3, 3), min_size=9, max_size=9))
def test_exact_psd_matches_eigenvalues(entries):
    a = np.array(entries, dtype=float).reshape(3, 3)
    g = a @ a.T - np.eye(3) * entries[0] / 2
    rows = [[Fraction(x).limit_denominator(4) for x in row] for row in g]
    eig = np.linalg.eigvalsh(np.array(rows, dtype=float))
    if abs(eig[0]) > 1e-9:
        assert exact_psd(rows) == (eig[0] > 0)


def test_gram_constant_function():
    phi = eval_spherical(P23, 1, 8)
    rep = gram_matrix(phi, [(), (0, 0), (1, 2, 0, 1)])
    assert np.all(rep.matrix == 1)
    assert rep.psd and rep.exact_confirmed
    assert rep.min_eigenvalue == pytest.approx(0, abs=1e-12)


def test_gram_three_siblings():
    phi = eval_spherical(P23, 0, 4)
    rep = gram_matrix(phi, [(0, 0), (0, 1), (0, 2)])
    expected = np.array([[1, -1 / 3, -1 / 3], [-1 / 3, 1, -1 / 3], [-1 / 3, -1 / 3, 1]])
    assert np.allclose(rep.matrix, expected)
    assert np.allclose(sorted(rep.eigenvalues), [1 / 3, 4 / 3, 4 / 3])
    assert rep.psd and rep.symmetric


def test_gram_not_psd_above_one():
    phi = eval_spherical(P23, 1.2, 4)
    rep = gram_matrix(phi, [(), (0, 0)])
    assert rep.matrix[0, 1] == pytest.approx((4 * 1.44 - 1) / 3)
    assert not rep.psd


def test_gram_rejects_odd_vertex():
    with pytest.raises(TreeError):
        gram_matrix(eval_spherical(P23, 0, 4), [(), (0,)])


@pytest.mark.parametrize("gamma", [Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(19, 20)])
def test_pd_passes(gamma):
    verdict = is_positive_definite(P23, gamma)
    assert verdict.passed
    assert verdict.min_eigenvalue >= -1e-10


@pytest.mark.parametrize("gamma", [Fraction(3, 2), Fraction(21, 20), Fraction(-11, 10)])
def test_pd_fails_with_witness(gamma):
    verdict = is_positive_definite(P23, gamma)
    assert not verdict.passed
    assert len(verdict.witness) == 2
    phi = eval_spherical(P23, gamma, 8)
    assert not gram_matrix(phi, verdict.witness).psd


def test_pd_rejects_complex():
    verdict = is_positive_definite(P23, 0.3j)
    assert not verdict.passed
    assert "non-real" in verdict.reason


def test_pass_implies_bounded():
    for gamma in (Fraction(k, 10) for k in range(-10, 11)):
        if is_positive_definite(P23, gamma, max_set_size=2).passed:
            assert max(abs(x) for x in eval_spherical(P23, gamma, 40).values) <= 1


def test_gns_examples():
    phi = eval_spherical(P23, 0, 8)
    u, w = (0, 0), (0, 1)
    assert gns_inner(phi, [(1, u)], [(1, u)]) == 1
    assert gns_inner(phi, [(1, u)], [(1, (2, 1, 0, 0))]) == phi[6]
    assert gns_inner(phi, [(1, u), (-1, w)], [(1, u), (-1, w)]) == Fraction(8, 3)


def test_gns_matches_gram_form():
    phi = eval_spherical(P23, Fraction(1, 2), 8)
    verts = [(), (0, 0), (1, 1), (0, 1, 0, 2)]
    c = [Fraction(1), Fraction(-2), Fraction(1, 2), Fraction(3)]
    rep = gram_matrix(phi, verts)
    form = float(np.array(c, dtype=float) @ rep.matrix @ np.array(c, dtype=float))
    assert float(gns_inner(phi, list(zip(c, verts)), list(zip(c, verts)))) == pytest.approx(form)


def test_functional_form_matches_gram_form():
    phi = eval_spherical(P23, Fraction(-1, 2), 12)
    f = RadialSeq(P23, [Fraction(2), 0, Fraction(-1), 0, Fraction(1, 3)])
    tree = TruncatedTree(P23, 4)
    combo = [(f.at(len(v)), v) for v in tree.vertices(even_only=True)]
    assert gns_inner(phi, combo, combo) == functional_L(phi, convolve_radial(involution(f), f))


@pytest.mark.parametrize("level,target", [(2, Fraction(-1, 3)), (4, Fraction(1, 9))])
@pytest.mark.parametrize("method", ["count", "enumerate"])
def test_matrix_coefficient(level, target, method):
    depth = 16 if method == "count" else 8
    res = matrix_coefficient_check(P23, 0, (0,) * level, depth=depth, method=method)
    assert res["target"] == target
    assert res["passed"]


def test_matrix_coefficient_root():
    res = matrix_coefficient_check(P23, 0, (), depth=6)
    assert res["ratio"] == 1


def test_matrix_coefficient_rejects_non_l2():
    with pytest.raises(ValueError):
        matrix_coefficient_check(TreeParams(3, 2), 0, (0, 0))
    with pytest.raises(ValueError):
        matrix_coefficient_check(P23, Fraction(1, 2), (0, 0))


def test_gns_l2_constant_is_phi_norm():
    rng = np.random.default_rng(2)
    centers = [(), (0, 0), (1, 2), (0, 1, 1, 0)]
    coeffs = [rng.normal(size=4) for _ in range(5)]
    res = gns_l2_proportionality(P23, 0, centers, coeffs)
    assert res["spread"] <= res["tail_tolerance"] + 1e-12
    assert np.mean(res["ratios"]) == pytest.approx(res["phi_l2_norm_squared"], rel=1e-8)
    assert res["phi_l2_norm_squared"] == pytest.approx(4.0)


def test_gns_l2_enumeration_agrees_roughly():
    centers = [(), (0, 0)]
    coeffs = [[1.0, 0.5], [1.0, -1.0]]
    enum = gns_l2_proportionality(P23, 0, centers, coeffs, depth=10, method="enumerate")
    count = gns_l2_proportionality(P23, 0, centers, coeffs, depth=10)
    assert np.allclose(enum["ratios"], count["ratios"], rtol=0.2)
    assert all(r < c for r, c in zip(enum["ratios"], [4, 4]))
