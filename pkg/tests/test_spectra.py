import math
from fractions import Fraction

import pytest

from semitree.spectra import (
    atom_at_zero,
    is_tempered,
    lp_membership_scan,
    s1_real_interval,
    s2_real_interval,
    spectrum_report,
)
from semitree.tree import TreeParams

PAIRS = [(a, b) for a in (2, 3, 4) for b in (2, 3, 4)]


def e2_closed(qp, qm):
    return (math.sqrt(qp) + math.sqrt(qm)) / math.sqrt((qp + 1) * (qm + 1))


@pytest.mark.parametrize("qp,qm", [(2, 3), (3, 2), (3, 3)])
def test_s1_is_unit_interval(qp, qm):
    e1 = s1_real_interval(TreeParams(qp, qm))
    assert e1.value == pytest.approx(1, abs=1e-9)
    assert e1.confirmed


@pytest.mark.parametrize("qp,qm", [(2, 3), (3, 2), (4, 3)])
def test_s2_endpoint(qp, qm):
    e2, inner = s2_real_interval(TreeParams(qp, qm))
    assert e2.value == pytest.approx(e2_closed(qp, qm), abs=1e-6)
    assert e2.confirmed
    assert e2.direct_value == pytest.approx(e2_closed(qp, qm), abs=1e-6)
    gap = abs(math.sqrt(qp) - math.sqrt(qm)) / math.sqrt((qp + 1) * (qm + 1))
    assert inner == pytest.approx(gap, abs=1e-6)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_homogeneous_endpoint(q):
    e2, inner = s2_real_interval(TreeParams(q, q))
    assert e2.value == pytest.approx(2 * math.sqrt(q) / (q + 1), abs=1e-6)
    assert inner == 0.0


def test_23_endpoint_value():
    e2, _ = s2_real_interval(TreeParams(2, 3), confirm=False)
    assert e2.value == pytest.approx(0.908248, abs=1e-6)


@pytest.mark.parametrize("qp,qm", PAIRS)
def test_atom_and_p_crit(qp, qm):
    atom = atom_at_zero(TreeParams(qp, qm))
    assert atom.present == (qp < qm)
    assert atom.p_star == pytest.approx(math.log(qp * qm) / math.log(qm), abs=1e-12)
    assert (atom.p_star < 2) == atom.present


def test_zero_tempered_only_when_qplus_le_qminus():
    assert is_tempered(TreeParams(2, 3), Fraction(0))
    assert is_tempered(TreeParams(3, 3), Fraction(0))
    assert not is_tempered(TreeParams(3, 2), Fraction(0))


def test_lp_scan_zero():
    rows = {r["p"]: r for r in lp_membership_scan(TreeParams(2, 3), Fraction(0), [1.5, 2.0])}
    assert rows[2.0]["status"] == "converged"
    assert rows[2.0]["ratio"] == pytest.approx(2 / 3)
    assert rows[2.0]["log_partial_sum"] == pytest.approx(math.log(4))
    assert rows[1.5]["status"] == "diverging"
    assert rows[1.5]["ratio"] == pytest.approx(6 * 3**-1.5)


def test_lp_scan_constant_diverges():
    rows = lp_membership_scan(TreeParams(3, 2), 1, [1.0, 4.0, 10.0], N=200)
    assert all(r["status"] == "diverging" for r in rows)


def test_report_invariants():
    rep = spectrum_report(TreeParams(3, 3))
    assert rep.s2_real[1] <= rep.s1_real[1]
    assert rep.s1_real[0] == -rep.s1_real[1]
    assert rep.s2_real[1] == pytest.approx(math.sqrt(3) / 2, abs=1e-6)
    assert not rep.atom_at_zero
    assert rep.p_crit == pytest.approx(2.0)
    assert rep.to_dict()["params"] == {"q_plus": 3, "q_minus": 3}
