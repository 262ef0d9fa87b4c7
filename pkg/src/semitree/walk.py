"""Isotropic nearest-neighbor random walk started at the root.

Exact laws use the level process: from level n > 0 the walk steps inward
with probability 1/(q_n + 1) and outward otherwise; the root always steps
out.  A per-vertex propagation on a truncated tree is kept as the oracle for
radiality.  Monte Carlo runs use Philox streams, one per trial block.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spherical import eval_spherical
from .tree import TreeError, TreeParams, TruncatedTree, sphere_size

BLOCK = 100_000


@dataclass(frozen=True)
class WalkDistribution:
    params: TreeParams
    horizon: int
    level_mass: tuple  # exact probability of being on each sphere

    def vertex_mass(self, n: int) -> Fraction:
        """Probability of each individual vertex at level n."""
        if n >= len(self.level_mass):
            return Fraction(0)
        return self.level_mass[n] / sphere_size(self.params, n)

    def on_ball(self, tree: TruncatedTree) -> dict:
        """Per-vertex masses on every vertex of ``tree`` up to the horizon."""
        top = min(self.horizon, tree.depth)
        return {v: self.vertex_mass(len(v)) for n in range(top + 1) for v in tree.sphere(n)}

    @property
    def total(self) -> Fraction:
        return sum(self.level_mass, Fraction(0))

    def expectation(self, values) -> object:
        return sum((m * values[n] for n, m in enumerate(self.level_mass) if m), 0)


def exact_distribution(params: TreeParams, n: int, depth: int | None = None) -> WalkDistribution:
    if n < 0:
        raise ValueError(f"negative horizon {n}")
    if depth is not None and n > depth - 1:
        raise TreeError(f"horizon {n} exceeds safe depth {depth - 1}")
    mass = [Fraction(1)]
    for _ in range(n):
        nxt = [Fraction(0)] * (len(mass) + 1)
        for ell, p in enumerate(mass):
            if not p:
                continue
            if ell == 0:
                nxt[1] += p
                continue
            q = params.degree(ell)
            nxt[ell - 1] += p / (q + 1)
            nxt[ell + 1] += p * q / (q + 1)
        mass = nxt
    return WalkDistribution(params, n, tuple(mass))


def vertex_distribution(tree: TruncatedTree, n: int) -> dict:
    """Per-vertex law after n steps by propagating along explicit neighbor lists."""
    if n > tree.depth - 1:
        raise TreeError(f"horizon {n} exceeds safe depth {tree.depth - 1}")
    dist = {(): Fraction(1)}
    for _ in range(n):
        nxt: dict = {}
        for v, p in dist.items():
            nbrs = tree.neighbors(v)
            share = p / len(nbrs)
            for w in nbrs:
                nxt[w] = nxt.get(w, 0) + share
        dist = nxt
    return dist


def _streams(seed: int, trials: int):
    blocks = [BLOCK] * (trials // BLOCK)
    if trials % BLOCK:
        blocks.append(trials % BLOCK)
    seqs = np.random.SeedSequence(seed).spawn(len(blocks))
    return [(size, np.random.Generator(np.random.Philox(s))) for size, s in zip(blocks, seqs)]


def _inward_probability(params: TreeParams, top: int) -> np.ndarray:
    p_in = np.empty(top + 1)
    p_in[0] = 0.0
    for ell in range(1, top + 1):
        p_in[ell] = 1.0 / (params.degree(ell) + 1)
    return p_in


def simulate_levels(params: TreeParams, n: int, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Level of each trial after n steps (array of length ``trials``)."""
    if trials < 1:
        raise ValueError("need at least one trial")
    p_in = _inward_probability(params, n + 1)

    def run(block):
        size, rng = block
        levels = np.zeros(size, dtype=np.int64)
        for _ in range(n):
            levels += np.where(rng.random(size) < p_in[levels], -1, 1)
        return levels

    blocks = _streams(seed, trials)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(run, blocks))  # map keeps block order
    else:
        out = [run(b) for b in blocks]
    return np.concatenate(out)


@dataclass(frozen=True)
class SimulationResult:
    horizon: int
    trials: int
    seed: int
    counts: tuple
    frequencies: tuple
    std_errors: tuple


def simulate(params: TreeParams, n: int, trials: int, seed: int = 0, workers: int = 1) -> SimulationResult:
    levels = simulate_levels(params, n, trials, seed, workers)
    counts = np.bincount(levels, minlength=n + 1)
    freqs = counts / trials
    se = np.sqrt(freqs * (1 - freqs) / trials)
    return SimulationResult(n, trials, seed, tuple(int(c) for c in counts), tuple(freqs.tolist()), tuple(se.tolist()))


def frequency_agreement(params: TreeParams, n: int, trials: int, seed: int, sigmas: float = 3.0) -> list[dict]:
    """Per-level comparison of Monte Carlo frequencies with the exact law."""
    sim = simulate(params, n, trials, seed)
    exact = exact_distribution(params, n)
    rows = []
    for ell, p in enumerate(exact.level_mass):
        p = float(p)
        se = math.sqrt(p * (1 - p) / trials)
        freq = sim.frequencies[ell] if ell < len(sim.frequencies) else 0.0
        rows.append(
            {
                "level": ell,
                "exact": p,
                "frequency": freq,
                "std_error": se,
                "within": abs(freq - p) <= sigmas * se if se > 0 else freq == p,
            }
        )
    return rows


def eigen_martingale_check(params: TreeParams, gamma, n: int, trials: int = 100_000, seed: int = 0) -> dict:
    """Compare ``E[phi_gamma(X_n)]`` (exact law and Monte Carlo) with ``gamma**n``."""
    phi = eval_spherical(params, gamma, n)
    law = exact_distribution(params, n)
    exact_mean = law.expectation(phi.values)
    target = phi.gamma**n
    out = {
        "gamma": phi.gamma,
        "n": n,
        "target": target,
        "exact_expectation": exact_mean,
        "exact_residual": exact_mean - target,
    }
    if trials:
        values = np.array([complex(x) for x in phi.values])
        if not values.imag.any():
            values = values.real
        samples = values[simulate_levels(params, n, trials, seed)]
        mean = samples.mean()
        se = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
        gap = abs(mean - complex(target))
        out.update(
            {
                "trials": trials,
                "seed": seed,
                "mc_mean": mean.item(),
                "mc_std_error": se,
                "mc_within_3sigma": bool(gap <= 3 * se) if se > 0 else bool(gap < 1e-12),
            }
        )
    return out
