"""Identity suites that compare every module against an independent oracle.

Each suite returns a :class:`SuiteReport`: a list of named checks, each with
a pass flag, a residual or measured value, and a witness on failure.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import automorphisms as auto
from . import posdef, radial_algebra as ra, spectra, spherical as sph, walk
from .tree import ROOT, TreeParams, TruncatedTree, Vertex, distance, sphere_size

EXACT_GAMMAS = (Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1), Fraction(3, 2))
FE_TOL = 1e-12
MC_SIGMAS = 3.0


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    witness: object = None
    info: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    params: TreeParams
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, value=None, witness=None, **info) -> Check:
        check = Check(name, bool(passed), value, None if passed else witness, info)
        self.checks.append(check)
        return check

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def _max_abs(xs) -> object:
    return max((abs(x) for x in xs), default=Fraction(0))


# isometries -----------------------------------------------------------------


def isometry_targets_check(tree: TruncatedTree, v: Vertex, pairs=None) -> dict:
    """Distance preservation, involutivity and parity for one path reversal.

    ``pairs=None`` checks every pair of window vertices; otherwise only the
    given pairs.
    """
    sigma = auto.path_reversal(tree, v)
    window = list(tree.vertices(max_level=sigma.window))
    image = {u: sigma(u) for u in window}
    out = {"target": v, "window": sigma.window, "vertices": len(window)}
    out["moves_root"] = image[ROOT] == v and image.get(v, sigma(v)) == ROOT
    bad_inv = next((u for u in window if len(image[u]) <= sigma.window and sigma(image[u]) != u), None)
    bad_par = next((u for u in window if (len(image[u]) - len(u)) % 2), None)
    out["injective"] = len(set(image.values())) == len(window)
    out["involution_witness"] = bad_inv
    out["parity_witness"] = bad_par
    if pairs is None:
        pairs = combinations(window, 2)
    bad_dist = None
    count = 0
    for a, b in pairs:
        count += 1
        if distance(image[a], image[b]) != distance(a, b):
            bad_dist = (a, b)
            break
    out["pairs_checked"] = count
    out["distance_witness"] = bad_dist
    out["passed"] = out["moves_root"] and out["injective"] and bad_inv is None and bad_par is None and bad_dist is None
    return out


def _random_pairs(tree: TruncatedTree, window: int, count: int, rng: random.Random):
    verts = list(tree.vertices(max_level=window))
    return [(rng.choice(verts), rng.choice(verts)) for _ in range(count)]


def functional_equation_check(params: TreeParams, gamma, depth: int, max_level: int) -> dict:
    """``radialize(phi o sigma_v)(n) - phi(|v|) phi(n)`` for every even ``|v|, n <= max_level``."""
    tree = TruncatedTree(params, depth)
    phi = sph.eval_spherical(params, gamma, depth)
    f = phi.values
    worst, witness, targets = 0, None, 0
    for v in tree.vertices(max_level=min(max_level, depth // 2), even_only=True):
        sigma = auto.path_reversal(tree, v)
        top = min(max_level, sigma.window)
        avg = auto.radialize(tree, lambda u: f[len(sigma(u))], max_level=top)
        targets += 1
        for n in range(top + 1):
            err = abs(avg.values[n] - f[len(v)] * f[n])
            if err > worst:
                worst, witness = err, (v, n)
    tol = 0 if phi.exact else FE_TOL
    return {"gamma": phi.gamma, "targets": targets, "max_error": worst, "witness": witness, "passed": worst <= tol}


def suite_isometries(params: TreeParams, depth: int = 8, samples: int = 200, seed: int = 0) -> SuiteReport:
    report = SuiteReport("isometries", params)
    tree = TruncatedTree(params, depth)
    rng = random.Random(seed)
    sigma0 = auto.identity(tree)
    report.add("identity", all(sigma0(u) == u for u in tree.vertices(max_level=depth)))
    for lvl in range(2, depth // 2 + 1, 2):
        exhaustive = lvl == 2
        worst = None
        checked = 0
        for v in tree.sphere(lvl):
            pairs = None if exhaustive else _random_pairs(tree, depth - lvl, samples, rng)
            res = isometry_targets_check(tree, v, pairs)
            checked += res["pairs_checked"]
            if not res["passed"]:
                worst = res
                break
        mode = "exhaustive" if exhaustive else f"sampled({samples})"
        report.add(
            f"path_reversal_level_{lvl}",
            worst is None,
            checked,
            worst and {k: worst[k] for k in ("target", "distance_witness", "involution_witness", "parity_witness")},
            mode=mode,
        )
    odd_rejected = False
    try:
        auto.path_reversal(tree, (0,))
    except ValueError:
        odd_rejected = True
    report.add("odd_target_rejected", odd_rejected)
    fe_level = min(6, depth // 2)
    for g in (Fraction(0), Fraction(1, 2), Fraction(1), 0.7):
        res = functional_equation_check(params, g, depth, fe_level)
        report.add(f"functional_equation_gamma_{g}", res["passed"], res["max_error"], res["witness"], targets=res["targets"])
    # radialization commutes with radial convolvers
    small = TruncatedTree(params, max(depth, 6))
    g = {v: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for v in small.vertices(max_level=2, even_only=True)}
    f = ra.mu_n(params, 2) + ra.mu_n(params, 4) * 3
    conv = ra.convolve(small, f, g)
    lhs = auto.radialize(small, conv, max_level=6)
    eg = auto.radialize(small, g, max_level=2)
    rhs = ra.convolve_radial(f, ra.RadialSeq(params, eg.values))
    report.add("radialization_commutes", lhs.same_values(rhs), _max_abs(lhs.values[i] - rhs.at(i) for i in range(7)))
    return report


# algebra --------------------------------------------------------------------


def brute_convolve(tree: TruncatedTree, f: ra.RadialSeq, g: dict, top: int) -> dict:
    """Double sum ``sum_w f(d(v, w)) g(w)`` over every V+ vertex ``v`` with ``|v| <= top``."""
    out = {}
    for v in tree.vertices(max_level=top, even_only=True):
        acc = sum((f.at(distance(v, w)) * gw for w, gw in g.items()), Fraction(0))
        if acc:
            out[v] = acc
    return out


def mu2_identity_check(params: TreeParams, n: int) -> dict:
    """``mu_2 * mu_2n`` on a depth-(2n+4) tree against the three-term formula, level by level."""
    tree = TruncatedTree(params, 2 * n + 4)
    qp, qm = params.q_plus, params.q_minus
    c = Fraction(1, (qp + 1) * qm)
    coeffs = {2 * n - 2: c, 2 * n: c * (qm - 1), 2 * n + 2: c * qp * qm}
    if n == 0:
        coeffs = {2: Fraction(1)}
    expected = ra.RadialSeq(params, [0] * (2 * n + 3))
    for k, a in coeffs.items():
        if k >= 0:
            expected = expected + ra.mu_n(params, k) * a
    got = ra.convolve(tree, ra.mu_n(params, 2), ra.mu_n(params, 2 * n).on_sphere(tree))
    per_level: dict = {}
    for v, x in got.items():
        per_level.setdefault(len(v), set()).add(x)
    worst = Fraction(0)
    covered = True
    for ell in range(2 * n + 3):
        target = expected.at(ell)
        vals = per_level.get(ell, set())
        if target != 0:
            count = sum(1 for v in got if len(v) == ell)
            covered &= count == sphere_size(params, ell)
        for x in vals:
            worst = max(worst, abs(x - target))
    radial = ra.convolve_radial(ra.mu_n(params, 2), ra.mu_n(params, 2 * n))
    return {
        "n": n,
        "depth": tree.depth,
        "max_residual": worst,
        "full_spheres": covered,
        "radial_route_matches": radial.same_values(expected),
        "coefficient_sum": sum(coeffs.values()),
        "passed": worst == 0 and covered and radial.same_values(expected) and sum(coeffs.values()) == 1,
    }


def random_radial(params: TreeParams, radius: int, rng: random.Random) -> ra.RadialSeq:
    vals = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) if k % 2 == 0 else Fraction(0) for k in range(radius + 1)]
    return ra.RadialSeq(params, vals)


def _vplus_inner(f: ra.RadialSeq, g: ra.RadialSeq):
    n = max(len(f), len(g))
    return sum((f.at(k) * g.at(k) * sphere_size(f.params, k) for k in range(0, n, 2)), Fraction(0))


def suite_algebra(params: TreeParams, depth: int = 12, nmax: int = 4, seed: int = 0) -> SuiteReport:
    report = SuiteReport("algebra", params)
    rng = random.Random(seed)

    for n in range(0, nmax + 1):
        if 2 * n + 4 > max(depth, 2 * nmax + 4):
            break
        res = mu2_identity_check(params, n)
        report.add(f"mu2_mu{2 * n}_identity", res["passed"], res["max_residual"], res, depth=res["depth"])

    tree8 = TruncatedTree(params, 8)
    word = (0, 0)
    g = {word: Fraction(1)}
    fast = ra.convolve(tree8, ra.mu_n(params, 2), g)
    slow = brute_convolve(tree8, ra.mu_n(params, 2), g, 6)
    report.add("convolve_vs_double_sum", fast == slow, len(fast))

    # commutativity of {mu_0, mu_2, mu_4, mu_6}, brute force in both orders
    even = [k for k in (0, 2, 4, 6) if 2 * k <= depth]
    worst, witness = Fraction(0), None
    tree = TruncatedTree(params, max(2 * max(even), 2))
    table = {}
    for a in even:
        for b in even:
            if a + b <= tree.depth and (b, a) not in table:
                out = ra.convolve(tree, ra.mu_n(params, a), ra.mu_n(params, b).on_sphere(tree))
                table[(a, b)] = auto.radialize(tree, out, max_level=a + b)
    for (a, b), lhs in table.items():
        rhs = table.get((b, a))
        if rhs is None:
            rhs = ra.RadialSeq(params, auto.radialize(
                tree, ra.convolve(tree, ra.mu_n(params, b), ra.mu_n(params, a).on_sphere(tree)), max_level=a + b
            ).values, on_vplus=False)
        radial = ra.convolve_radial(ra.mu_n(params, a), ra.mu_n(params, b))
        err = max(_max_abs(lhs.values[i] - rhs.values[i] for i in range(a + b + 1)),
                  _max_abs(lhs.values[i] - radial.at(i) for i in range(a + b + 1)))
        if err > worst or (err and witness is None):
            worst, witness = err, (a, b)
    report.add("commutativity", worst == 0, worst, witness, pairs=sorted(table))

    # associativity and the inner-product identity on random radial triples
    worst_assoc = worst_inner = Fraction(0)
    for _ in range(5):
        f, g2, h = (random_radial(params, 6, rng) for _ in range(3))
        left = ra.convolve_radial(ra.convolve_radial(f, g2), h)
        right = ra.convolve_radial(f, ra.convolve_radial(g2, h))
        worst_assoc = max(worst_assoc, _max_abs(left.at(i) - right.at(i) for i in range(19)))
        worst_inner = max(worst_inner, abs(_vplus_inner(f, ra.convolve_radial(g2, h)) - _vplus_inner(ra.convolve_radial(f, g2), h)))
    report.add("associativity", worst_assoc == 0, worst_assoc)
    report.add("inner_product_shift", worst_inner == 0, worst_inner)

    # equivariance under a path reversal
    t8 = TruncatedTree(params, 8)
    f = ra.mu_n(params, 2) * 2 + ra.mu_n(params, 0)
    g = {v: Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for v in t8.vertices(max_level=2, even_only=True)}
    worst_eq, witness = Fraction(0), None
    for v in t8.sphere(2):
        sigma = auto.path_reversal(t8, v)
        fg = ra.convolve(t8, f, g)
        tg = {sigma(w): x for w, x in g.items()}
        ftg = ra.convolve(t8, f, tg)
        for u in t8.vertices(max_level=sigma.window, even_only=True):
            err = abs(fg.get(sigma(u), 0) - ftg.get(u, 0))
            if err > worst_eq:
                worst_eq, witness = err, (v, u)
    report.add("isometry_equivariance", worst_eq == 0, worst_eq, witness)

    # mu_1 mu_n recurrence, pointwise on both parities
    for n in range(1, nmax + 1):
        res = ra.mu_n_operator_recurrence_check(TruncatedTree(params, n + 4), n, seed=seed)
        report.add(
            f"mu1_mu{n}_recurrence",
            res["passed"],
            res["max_residual"],
            res,
            residual_own_degree=res["max_residual_own_degree"],
            commutator=res["max_commutator"],
        )

    # Laplacian eigenfunctions
    t6 = TruncatedTree(params, 6)
    for gamma in (Fraction(1, 2), Fraction(0)):
        phi = sph.eval_spherical(params, gamma, 6)
        out = ra.laplace_apply(t6, lambda w: phi.values[len(w)])
        err = _max_abs(out[v] - gamma * phi.values[len(v)] for v in out)
        report.add(f"laplacian_eigen_gamma_{gamma}", err == 0, err)

    # eigenoperator, multiplicativity, involution
    worst_eig = worst_mult = worst_inv = Fraction(0)
    for gamma in (Fraction(0), Fraction(1, 2), Fraction(-1, 3), Fraction(1), Fraction(3, 2)):
        phi = sph.eval_spherical(params, gamma, 40)
        gamma2 = phi.values[2]
        phi_v = ra.spherical_on_vplus(phi)
        for n in range(0, nmax + 1):
            conv = ra.convolve_radial(ra.mu_n(params, 2 * n), phi_v)
            eig = sph.p_polynomial(params, n)(gamma2)
            top = len(phi_v) - 1 - 2 * n
            worst_eig = max(worst_eig, _max_abs(conv.at(k) - eig * phi_v.at(k) for k in range(top + 1)))
        for _ in range(4):
            f, g2 = random_radial(params, 6, rng), random_radial(params, 6, rng)
            lhs = ra.functional_L(phi, ra.convolve_radial(f, g2))
            rhs = ra.functional_L(phi, f) * ra.functional_L(phi, g2)
            worst_mult = max(worst_mult, abs(lhs - rhs))
            lf = ra.functional_L(phi, f)
            worst_inv = max(worst_inv, abs(ra.functional_L(phi, ra.convolve_radial(ra.involution(f), f)) - lf * lf))
    report.add("eigenoperator", worst_eig == 0, worst_eig)
    report.add("multiplicativity", worst_mult == 0, worst_mult)
    report.add("involution_square", worst_inv == 0, worst_inv)
    return report


# spherical ------------------------------------------------------------------


def suite_spherical(params: TreeParams, levels: int = 200) -> SuiteReport:
    report = SuiteReport("spherical", params)
    phi0 = sph.eval_spherical(params, Fraction(0), levels)
    bad = next((n for n in range(levels + 1) if phi0.values[n] != sph.spherical_zero(params, n)), None)
    report.add("zero_closed_form", bad is None, levels, bad)
    for gamma in EXACT_GAMMAS:
        phi = sph.eval_spherical(params, gamma, levels)
        res = phi.residuals()
        bad = next((i for i, r in enumerate(res) if r != 0), None)
        report.add(f"recurrence_residual_gamma_{gamma}", bad is None, _max_abs(res), bad)
    # parity symmetry f_n(-gamma) = (-1)^n f_n(gamma)
    g = Fraction(2, 7)
    a, b = sph.eval_spherical(params, g, 60), sph.eval_spherical(params, -g, 60)
    report.add("parity_symmetry", all(b[n] == (-1) ** n * a[n] for n in range(61)))
    # transfer matrix reproduces the recurrence two levels at a time
    A_plus, A_minus, M = sph.transfer_matrices(params, g)
    vec, bad = (Fraction(1), g), None
    for k in range(1, 30):
        vec = M.apply(vec)
        if vec != (a[2 * k], a[2 * k - 1]):
            bad = k
            break
    report.add("transfer_matrix", bad is None, 30, bad)
    # P_n(Q_2) = Q_2n
    q2 = sph.q_polynomial(params, 2)
    bad = next((n for n in range(11) if sph.p_polynomial(params, n).compose(q2) != sph.q_polynomial(params, 2 * n)), None)
    report.add("p_compose_q2", bad is None, 10, bad)
    return report


# posdef ---------------------------------------------------------------------


def pd_grid(start: Fraction, stop: Fraction, step: Fraction) -> list[Fraction]:
    count = int((stop - start) / step)
    return [start + i * step for i in range(count + 1)]


def suite_posdef(params: TreeParams, max_set_size: int = 3, depth: int = 4, seed: int = 0,
                 grid: list | None = None) -> SuiteReport:
    report = SuiteReport("posdef", params)
    grid = grid if grid is not None else pd_grid(Fraction(-3, 2), Fraction(3, 2), Fraction(1, 20))
    wrong, min_pass = [], math.inf
    for g in grid:
        verdict = posdef.is_positive_definite(params, g, max_set_size=max_set_size, max_depth=depth, seed=seed)
        expected = abs(g) <= 1
        cls = sph.classify(params, g)
        if verdict.passed != expected or cls.bounded != expected or (not verdict.passed and not verdict.witness):
            wrong.append(str(g))
        if verdict.passed:
            min_pass = min(min_pass, verdict.min_eigenvalue)
    report.add("pd_iff_bounded_real", not wrong, len(grid), wrong)
    report.add("pass_min_eigenvalue", min_pass >= -posdef.PSD_TOL, min_pass)
    complex_verdict = posdef.is_positive_definite(params, 0.3j)
    report.add("complex_gamma_rejected", not complex_verdict.passed, complex_verdict.reason)

    # Gram quadratic form agrees with L_phi(f* * f) for radial f written as translate sums
    phi = sph.eval_spherical(params, Fraction(1, 2), 20)
    f = random_radial(params, 4, random.Random(seed))
    tree = TruncatedTree(params, 4)
    combo = [(f.at(len(v)), v) for v in tree.vertices(even_only=True) if f.at(len(v))]
    gns = posdef.gns_inner(phi, combo, combo)
    lf = ra.functional_L(phi, ra.convolve_radial(ra.involution(f), f))
    report.add("gram_form_vs_functional", gns == lf, gns - lf)

    if params.q_plus < params.q_minus:
        for m in (2, 4):
            v = tuple([0] * m)
            res = posdef.matrix_coefficient_check(params, Fraction(0), v, depth=16)
            report.add(f"matrix_coefficient_level_{m}", res["passed"], res["error"], res, tail_bound=res["tail_bound"])
        prop = _gns_proportionality(params, seed)
        report.add("gns_l2_proportional", prop["spread"] <= prop["tail_tolerance"] + 1e-9, prop["spread"],
                   prop, constant=float(np.mean(prop["ratios"])), phi_l2_norm_squared=prop["phi_l2_norm_squared"])
    return report


def _gns_proportionality(params: TreeParams, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    centers = [(), (0, 0), (0, 1), (1, 0), (0, 0, 0, 0)]
    coeffs = [rng.normal(size=len(centers)).tolist() for _ in range(6)]
    return posdef.gns_l2_proportionality(params, Fraction(0), centers, coeffs)


# spectra --------------------------------------------------------------------


def suite_spectra(params: TreeParams, tol: float = 1e-10) -> SuiteReport:
    report = SuiteReport("spectra", params)
    rep = spectra.spectrum_report(params, tol)
    qp, qm = params.q_plus, params.q_minus
    e1 = rep.s1_real[1]
    report.add("s1_endpoint", abs(e1 - 1) <= 1e-9 and rep.s1_confirmed, e1 - 1)
    expected_e2 = (math.sqrt(qp) + math.sqrt(qm)) / math.sqrt((qp + 1) * (qm + 1))
    e2 = rep.s2_real[1]
    report.add("s2_endpoint", abs(e2 - expected_e2) <= 1e-6 and rep.s2_confirmed, e2 - expected_e2,
               direct=rep.s2_direct_endpoint)
    expected_inner = abs(math.sqrt(qp) - math.sqrt(qm)) / math.sqrt((qp + 1) * (qm + 1))
    report.add("s2_inner_edge", abs(rep.s2_gap_inner_edge - expected_inner) <= 1e-6, rep.s2_gap_inner_edge - expected_inner)
    report.add("nesting", rep.s2_real[1] <= rep.s1_real[1] and rep.s1_real[0] == -rep.s1_real[1])
    report.add("zero_tempered_iff_qplus_le_qminus", rep.zero_tempered == (qp <= qm), rep.zero_tempered)
    report.add("atom_iff_qplus_lt_qminus", rep.atom_at_zero == (qp < qm) == (rep.p_crit < 2), rep.atom_at_zero)
    p_expected = math.log(qp * qm) / math.log(qm)
    report.add("p_crit", abs(rep.p_crit - p_expected) <= 1e-12, rep.p_crit - p_expected)
    row = spectra.lp_membership_scan(params, Fraction(0), [2.0])[0]
    report.add("l2_scan_matches_atom", (row["status"] == "converged") == rep.atom_at_zero, row["ratio"])
    return report


# walk -----------------------------------------------------------------------


def suite_walk(params: TreeParams, trials: int = 1_000_000, seed: int = 0, seeds: int = 10,
               nmax: int = 10, mc_nmax: int = 6) -> SuiteReport:
    report = SuiteReport("walk", params)
    tree = TruncatedTree(params, 9)
    bad = None
    for n in range(9):
        law = walk.exact_distribution(params, n)
        vd = walk.vertex_distribution(tree, n)
        if law.total != 1 or any(vd.get(v, 0) != law.vertex_mass(len(v)) for v in tree.vertices(max_level=n)):
            bad = n
            break
        if any(m for ell, m in enumerate(law.level_mass) if (ell - n) % 2):
            bad = n
            break
    report.add("exact_law_radial_conserved", bad is None, 8, bad)
    worst = Fraction(0)
    for gamma in (Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(1), Fraction(3, 2)):
        for n in range(nmax + 1):
            res = walk.eigen_martingale_check(params, gamma, n, trials=0)
            worst = max(worst, abs(res["exact_residual"]))
    report.add("exact_martingale", worst == 0, worst)
    if trials:
        misses = []
        cells = misses_f = total_f = 0
        for s in range(seed, seed + seeds):
            for n in range(mc_nmax + 1):
                res = walk.eigen_martingale_check(params, Fraction(1, 2), n, trials=trials, seed=s)
                cells += 1
                if not res["mc_within_3sigma"]:
                    misses.append({"seed": s, "n": n, "mean": res["mc_mean"], "se": res["mc_std_error"]})
                rows = walk.frequency_agreement(params, n, trials, s, MC_SIGMAS)
                total_f += len(rows)
                misses_f += sum(not r["within"] for r in rows)
        report.add("monte_carlo_martingale", not misses, cells, misses)
        share = 1 - misses_f / total_f
        report.add("monte_carlo_frequencies", share >= 0.99, share, cells=total_f)
    # side-by-side: n-step law versus the uniform sphere law (reported only)
    law = walk.exact_distribution(params, 4)
    report.add("p4_vs_mu4_reported", True, [str(x) for x in law.level_mass],
               mu4_mass_at_level_4=str(ra.mu_n(params, 4).mass(4)))
    return report


SUITES = {
    "isometries": suite_isometries,
    "algebra": suite_algebra,
    "spherical": suite_spherical,
    "posdef": suite_posdef,
    "spectra": suite_spectra,
    "walk": suite_walk,
}


