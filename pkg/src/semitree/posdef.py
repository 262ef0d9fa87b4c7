"""Positive-definiteness of spherical functions restricted to V+.

A function phi on V+ radial around the root is positive definite when every
Gram matrix ``G_ij = phi(d(v_i, v_j))`` over finite vertex sets of V+ is
positive semi-definite.  Matrices are screened in floating point; for
rational gamma, any verdict within 1e-6 of the boundary is settled by exact
symmetric elimination.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .automorphisms import apply, path_reversal
from .spherical import SphericalEval, classify, eval_spherical
from .tree import TreeError, TreeParams, TruncatedTree, Vertex, distance, sphere_count, sphere_size

PSD_TOL = 1e-10
BOUNDARY_BAND = 1e-6


def exact_psd(matrix: Sequence[Sequence[Fraction]]) -> bool:
    """Exact PSD test by symmetric Gaussian elimination on rationals.

    A zero pivot is admissible only if the rest of its row vanishes.
    """
    a = [list(map(Fraction, row)) for row in matrix]
    n = len(a)
    active = list(range(n))
    while active:
        p = active[0]
        pivot = a[p][p]
        if pivot < 0:
            return False
        rest = active[1:]
        if pivot == 0:
            if any(a[p][j] != 0 for j in rest):
                return False
            active = rest
            continue
        for i in rest:
            factor = a[i][p] / pivot
            if factor:
                for j in rest:
                    a[i][j] -= factor * a[p][j]
        active = rest
    return True


def _phi_values(phi: SphericalEval | Sequence) -> Sequence:
    return phi.values if isinstance(phi, SphericalEval) else phi


def _is_real(x) -> bool:
    return not isinstance(x, complex) or x.imag == 0


@dataclass
class GramReport:
    vertices: list
    matrix: np.ndarray
    eigenvalues: np.ndarray
    min_eigenvalue: float
    psd: bool
    tolerance: float
    exact_confirmed: bool | None = None
    note: str = ""

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))


def _verdict(min_eig: float, norm: float, tol: float) -> bool:
    return min_eig >= -tol * max(1.0, norm)


def gram_matrix(phi: SphericalEval, vertices: Sequence[Vertex], tol: float = PSD_TOL) -> GramReport:
    values = _phi_values(phi)
    verts = [tuple(v) for v in vertices]
    for v in verts:
        if len(v) % 2:
            raise TreeError(f"vertex {v} is in V-; Gram matrices live on V+")
    k = len(verts)
    dist = [[distance(verts[i], verts[j]) for j in range(k)] for i in range(k)]
    top = max((max(row) for row in dist), default=0)
    if top >= len(values):
        raise ValueError(f"need phi up to distance {top}, have {len(values) - 1}")
    entries = [[values[dist[i][j]] for j in range(k)] for i in range(k)]
    if not all(_is_real(x) for row in entries for x in row):
        mat = np.array(entries, dtype=complex)
        eig = np.linalg.eigvals(mat)
        return GramReport(verts, mat, eig, float("nan"), False, tol, None, "phi is not real-valued")
    mat = np.array([[float(x) for x in row] for row in entries])
    eig = np.linalg.eigvalsh(mat)
    min_eig = float(eig[0]) if k else 0.0
    norm = float(np.max(np.abs(eig))) if k else 0.0
    psd = _verdict(min_eig, norm, tol)
    confirmed = None
    if isinstance(phi, SphericalEval) and phi.exact and abs(min_eig) <= BOUNDARY_BAND:
        confirmed = exact_psd(entries)
        psd = confirmed
    return GramReport(verts, mat, eig, min_eig, psd, tol, confirmed)


@dataclass
class PDVerdict:
    gamma: object
    passed: bool
    witness: list | None
    reason: str
    min_eigenvalue: float
    matrices_checked: int
    exact_confirmations: int = 0
    details: dict = field(default_factory=dict)


def canonical_vplus(params: TreeParams, max_depth: int) -> list[Vertex]:
    tree = TruncatedTree(params, max_depth)
    return list(tree.vertices(even_only=True))


def _random_vplus_vertex(params: TreeParams, max_level: int, rng: np.random.Generator) -> Vertex:
    n = 2 * int(rng.integers(0, max_level // 2 + 1))
    return tuple(int(rng.integers(0, params.out_degree(i))) for i in range(n))


def is_positive_definite(
    params: TreeParams,
    gamma,
    max_set_size: int = 3,
    max_depth: int = 4,
    random_subsets: int = 32,
    random_size: int = 10,
    seed: int = 0,
    tol: float = PSD_TOL,
) -> PDVerdict:
    """Search Gram matrices of V+ vertex sets for a PSD failure.

    Order: every subset of size <= ``max_set_size`` of the canonical V+ ball
    of radius ``max_depth`` (smallest first), then the whole canonical set,
    then seeded random sets reaching two levels further out.
    """
    rand_depth = max_depth + 2
    phi = eval_spherical(params, gamma, 2 * rand_depth)
    values = phi.values
    for n, x in enumerate(values):
        if not _is_real(x):
            return PDVerdict(phi.gamma, False, [n], "non-real value of phi at distance n", math.nan, 0)

    canon = canonical_vplus(params, max_depth)
    k = len(canon)
    dist = np.array([[distance(a, b) for b in canon] for a in canon], dtype=np.int64)
    phi_f = np.array([float(x) for x in values])
    full = phi_f[dist]
    exact = phi.exact
    cache: dict = {}
    stats = {"checked": 0, "exact": 0, "min": math.inf}

    def settle(idx, min_eig, norm) -> bool:
        ok = _verdict(min_eig, norm, tol)
        if exact and abs(min_eig) <= BOUNDARY_BAND:
            sub = dist[np.ix_(idx, idx)]
            key = tuple(sub.ravel().tolist())
            if key not in cache:
                cache[key] = exact_psd([[values[d] for d in row] for row in sub.tolist()])
                stats["exact"] += 1
            ok = cache[key]
        return ok

    def fail(vertices, min_eig, reason):
        return PDVerdict(
            phi.gamma, False, list(vertices), reason, min_eig, stats["checked"], stats["exact"]
        )

    for size in range(2, min(max_set_size, k) + 1):
        combos = np.array(list(itertools.combinations(range(k), size)), dtype=np.int64)
        mats = full[combos[:, :, None], combos[:, None, :]]
        eigs = np.linalg.eigvalsh(mats)
        stats["checked"] += len(combos)
        mins, norms = eigs[:, 0], np.max(np.abs(eigs), axis=1)
        stats["min"] = min(stats["min"], float(mins.min()))
        suspect = np.nonzero(mins < BOUNDARY_BAND)[0]
        for i in suspect:
            idx = combos[i].tolist()
            if not settle(idx, float(mins[i]), float(norms[i])):
                return fail([canon[j] for j in idx], float(mins[i]), f"Gram matrix of {size} vertices not PSD")

    eig = np.linalg.eigvalsh(full)
    stats["checked"] += 1
    stats["min"] = min(stats["min"], float(eig[0]))
    if not settle(list(range(k)), float(eig[0]), float(np.max(np.abs(eig)))):
        return fail(canon, float(eig[0]), "Gram matrix of the canonical set not PSD")

    rng = np.random.default_rng(seed)
    for _ in range(random_subsets):
        verts = sorted({_random_vplus_vertex(params, rand_depth, rng) for _ in range(random_size)})
        d = np.array([[distance(a, b) for b in verts] for a in verts], dtype=np.int64)
        eig = np.linalg.eigvalsh(phi_f[d])
        stats["checked"] += 1
        stats["min"] = min(stats["min"], float(eig[0]))
        ok = _verdict(float(eig[0]), float(np.max(np.abs(eig))), tol)
        if exact and abs(eig[0]) <= BOUNDARY_BAND:
            ok = exact_psd([[values[x] for x in row] for row in d.tolist()])
            stats["exact"] += 1
        if not ok:
            return fail(verts, float(eig[0]), "Gram matrix of a random vertex set not PSD")

    return PDVerdict(phi.gamma, True, None, "all Gram matrices PSD", stats["min"], stats["checked"], stats["exact"])


def gns_inner(phi: SphericalEval | Sequence, combo1, combo2):
    """``<sum c_i tau[v_i] phi, sum d_j tau[w_j] phi>_phi = sum c_i conj(d_j) phi(d(v_i, w_j))``."""
    values = _phi_values(phi)
    acc = 0
    for c, v in combo1:
        for d, w in combo2:
            dj = d.conjugate() if hasattr(d, "conjugate") else d
            acc = acc + c * dj * values[distance(tuple(v), tuple(w))]
    return acc


def _square_summable_growth(params: TreeParams, gamma):
    cls = classify(params, gamma)
    threshold = 1 / math.sqrt(params.q_plus * params.q_minus)
    if not cls.bounded or not cls.growth < threshold * (1 - 1e-12):
        raise ValueError(
            f"phi(gamma={gamma}) is not square-summable on V+ (growth {cls.growth:.6g} per two levels)"
        )
    return cls


def tail_bound(params: TreeParams, values: Sequence, growth: float, depth: int, shift: int) -> float:
    """Bound on ``sum_{n > depth, n even} |C(n)| max_{k >= n - shift}|phi_k| |phi_n|``.

    Uses ``|phi_n| <= A rho^n`` with ``rho = sqrt(growth)`` and ``A`` the
    largest observed ``|phi_n| / rho^n``.
    """
    rho = math.sqrt(growth)
    amp = max(abs(complex(x)) / rho**n for n, x in enumerate(values))
    ratio = params.q_plus * params.q_minus * rho**4
    j0 = depth // 2 + 1
    c2 = sphere_size(params, 2)
    qq = params.q_plus * params.q_minus
    return amp * amp * rho ** (-shift) * (c2 / qq) * ratio**j0 / (1 - ratio)


def matrix_coefficient_check(
    params: TreeParams, gamma, v: Vertex, depth: int = 16, method: str = "count"
) -> dict:
    """Ball-truncated ``<pi(tau[v]) phi, phi> / ||phi||^2`` against ``phi(|v|)``.

    ``method="count"`` groups the ball by distance from ``v`` and from the
    root; ``method="enumerate"`` walks every vertex of the ball and applies
    the path-reversal isometry.
    """
    cls = _square_summable_growth(params, gamma)
    v = params.check_word(v)
    m = len(v)
    if m % 2:
        raise TreeError("v must lie in V+")
    phi = eval_spherical(params, gamma, depth + m)
    f = phi.values
    num = 0
    den = 0
    if method == "count":
        for n in range(0, depth + 1, 2):
            shell = 0
            for k in range(abs(n - m), n + m + 1, 2):
                cnt = sphere_count(params, m, k, n)
                if cnt:
                    shell = shell + cnt * f[k]
            num = num + shell * f[n]
            den = den + sphere_size(params, n) * f[n] * f[n]
    elif method == "enumerate":
        tree = TruncatedTree(params, depth + m)
        sigma = path_reversal(tree, v) if m else None
        for u in tree.vertices(max_level=depth, even_only=True):
            image = apply(sigma, u) if sigma is not None else u
            num = num + f[len(image)] * f[len(u)]
            den = den + f[len(u)] * f[len(u)]
    else:
        raise ValueError(f"unknown method {method!r}")
    ratio = num / den
    target = f[m]
    growth = float(cls.growth_exact) if cls.growth_exact is not None else cls.growth
    t_num = tail_bound(params, f, growth, depth, m)
    t_den = tail_bound(params, f, growth, depth, 0)
    bound = (t_num + abs(float(target)) * t_den) / float(den)
    error = abs(complex(ratio - target))
    return {
        "gamma": phi.gamma,
        "v": v,
        "depth": depth,
        "method": method,
        "numerator": num,
        "l2_norm_squared": den,
        "ratio": ratio,
        "target": target,
        "error": error,
        "tail_bound": bound,
        "passed": error <= bound,
    }


def _ball_arrays(params: TreeParams, depth: int):
    verts = list(TruncatedTree(params, depth).vertices(even_only=True))
    words = np.full((len(verts), max(depth, 1)), -1, dtype=np.int64)
    for i, w in enumerate(verts):
        words[i, : len(w)] = w
    lengths = np.array([len(w) for w in verts], dtype=np.int64)
    return words, lengths


def _distances_to(words: np.ndarray, lengths: np.ndarray, v: Vertex) -> np.ndarray:
    m = len(v)
    if m == 0:
        return lengths.copy()
    eq = words[:, :m] == np.array(v, dtype=np.int64)
    lcp = np.cumprod(eq, axis=1).sum(axis=1)
    return lengths + m - 2 * lcp


def translate_l2_inner(params: TreeParams, values: Sequence, D: int, depth: int):
    """``sum_{u in V+, |u| <= depth} phi(|u|) phi(d(b, u))`` for any ``b`` with ``|b| = D``.

    Equals the l2 inner product of two translates of phi whose centers are at
    distance ``D``, truncated to a ball around one of them.
    """
    acc = 0
    for n in range(0, depth + 1, 2):
        shell = 0
        for k in range(abs(n - D), n + D + 1, 2):
            cnt = sphere_count(params, D, k, n)
            if cnt:
                shell = shell + cnt * values[k]
        acc = acc + shell * values[n]
    return acc


def gns_l2_proportionality(
    params: TreeParams,
    gamma,
    centers: Sequence[Vertex],
    coefficient_sets: Sequence[Sequence[float]],
    depth: int = 120,
    method: str = "count",
) -> dict:
    """Measure ``||f||^2_l2 / ||f||^2_phi`` for ``f = sum c_i tau[v_i] phi``.

    ``method="count"`` gets each l2 inner product of two translates from
    sphere-intersection counts on a ball of radius ``depth`` around one
    center; ``method="enumerate"`` sums over the explicit V+ ball of radius
    ``depth`` around the root (only feasible for small depth).  Reports each
    ratio together with ``||phi||^2`` over V+ so the measured constant can be
    compared with it.
    """
    cls = _square_summable_growth(params, gamma)
    centers = [tuple(c) for c in centers]
    radius = max(len(c) for c in centers)
    dists = np.array([[distance(a, b) for b in centers] for a in centers], dtype=np.int64)
    phi = eval_spherical(params, gamma, depth + 2 * radius + 2, exact=False)
    f = np.array([float(x) for x in phi.values])
    if method == "count":
        inner = {int(D): float(translate_l2_inner(params, f, int(D), depth)) for D in np.unique(dists)}
        slack_of = {D: tail_bound(params, f, cls.growth, depth, D) for D in inner}
        l2_gram = np.vectorize(inner.get)(dists).astype(float)
        tail = np.vectorize(slack_of.get)(dists).astype(float)
    elif method == "enumerate":
        words, lengths = _ball_arrays(params, depth)
        translates = np.array([f[_distances_to(words, lengths, c)] for c in centers])
        l2_gram = translates @ translates.T
        tail = np.full(dists.shape, tail_bound(params, f, cls.growth, depth - radius, radius))
    else:
        raise ValueError(f"unknown method {method!r}")
    phi_gram = f[dists]
    ratios, slacks = [], []
    for coeffs in coefficient_sets:
        c = np.asarray(coeffs, dtype=float)
        form = float(c @ phi_gram @ c)
        ratios.append(float(c @ l2_gram @ c) / form)
        slacks.append(float(np.abs(c) @ tail @ np.abs(c)) / abs(form))
    norm_sq = 0.0
    long_phi = eval_spherical(params, gamma, 4000, exact=False).values
    for n in range(0, len(long_phi), 2):
        term = sphere_size(params, n) * float(long_phi[n]) ** 2
        norm_sq += term
        if n > 2 * radius and term < 1e-18 * norm_sq:
            break
    return {
        "method": method,
        "depth": depth,
        "ratios": ratios,
        "spread": max(ratios) - min(ratios),
        "phi_l2_norm_squared": norm_sq,
        "tail_tolerance": 2 * max(slacks),
    }
