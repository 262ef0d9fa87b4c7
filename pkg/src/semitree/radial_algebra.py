"""Convolution by radial functions on the orbit V+ and the multiplicative functionals.

Radial functions store the *per-vertex* value at each distance from the
root; masses are always obtained by multiplying with exact sphere sizes.
The convolution of a radial ``f`` with a function ``g`` on V+ is

    (f * g)(v) = sum_w f(d(v, w)) g(w).

:func:`convolve` evaluates it vertex by vertex on a truncated tree;
:func:`convolve_radial` uses sphere-intersection counts instead and never
touches a vertex.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .spherical import SphericalEval
from .tree import (
    TreeError,
    TreeParams,
    TruncatedTree,
    Vertex,
    sphere_around,
    sphere_count,
    sphere_size,
    sphere_size_around,
)


class OrbitError(ValueError):
    """A function is not supported on V+ where the V+ convolution requires it."""


@dataclass(frozen=True)
class RadialSeq:
    params: TreeParams
    values: tuple
    on_vplus: bool = True

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.on_vplus and any(self.values[n] != 0 for n in range(1, len(self.values), 2)):
            raise OrbitError("a V+ radial function must vanish at odd distances")

    def __len__(self):
        return len(self.values)

    def at(self, n: int):
        return self.values[n] if 0 <= n < len(self.values) else 0

    @property
    def radius(self) -> int:
        """Largest distance carrying a nonzero value (-1 for the zero function)."""
        for n in range(len(self.values) - 1, -1, -1):
            if self.values[n] != 0:
                return n
        return -1

    def mass(self, n: int):
        return self.at(n) * sphere_size(self.params, n)

    def total_mass(self):
        return sum((self.mass(n) for n in range(len(self.values))), 0)

    def as_function(self) -> Callable[[Vertex], object]:
        return lambda v: self.at(len(v))

    def on_sphere(self, tree: TruncatedTree) -> dict[Vertex, object]:
        """Per-vertex dictionary of the nonzero values inside ``tree``."""
        out = {}
        for n, value in enumerate(self.values):
            if value != 0:
                for v in tree.sphere(n):
                    out[v] = value
        return out

    def padded(self, length: int) -> "RadialSeq":
        vals = list(self.values[:length]) + [0] * max(0, length - len(self.values))
        return RadialSeq(self.params, vals, self.on_vplus)

    def _combine(self, other: "RadialSeq", op) -> "RadialSeq":
        n = max(len(self), len(other))
        return RadialSeq(
            self.params,
            [op(self.at(i), other.at(i)) for i in range(n)],
            self.on_vplus and other.on_vplus,
        )

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, scalar):
        return RadialSeq(self.params, [scalar * v for v in self.values], self.on_vplus)

    __rmul__ = __mul__

    def same_values(self, other: "RadialSeq", tol: float = 0.0) -> bool:
        n = max(len(self), len(other))
        return all(abs(self.at(i) - other.at(i)) <= tol for i in range(n))


def mu_n(params: TreeParams, n: int) -> RadialSeq:
    """Uniform probability on the sphere of radius ``n`` around the root."""
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    values = [Fraction(0)] * (n + 1)
    values[n] = Fraction(1, sphere_size(params, n))
    return RadialSeq(params, values, on_vplus=n % 2 == 0)


def delta_root(params: TreeParams) -> RadialSeq:
    return mu_n(params, 0)


def _check_vplus_radial(f: RadialSeq):
    if any(f.at(n) != 0 for n in range(1, len(f), 2)):
        raise OrbitError("convolution on V+ needs a radial function supported on V+")


def convolve(tree: TruncatedTree, f: RadialSeq, g: Mapping[Vertex, object]) -> dict[Vertex, object]:
    """``f * g`` on V+ for radial ``f`` and finitely supported ``g``.

    The result is complete: every vertex at which ``f * g`` is nonzero is
    inside the window, or the call is rejected.
    """
    _check_vplus_radial(f)
    radius = f.radius
    out: dict[Vertex, object] = {}
    if radius < 0:
        return out
    for w, gw in g.items():
        if len(w) % 2:
            raise OrbitError("g must be supported on V+ (even levels)")
        if gw == 0:
            continue
        if len(w) + radius > tree.depth:
            raise TreeError(
                f"support at level {len(w)} plus range {radius} exceeds depth {tree.depth}"
            )
        for k in range(0, radius + 1, 2):
            fk = f.at(k)
            if fk == 0:
                continue
            contrib = fk * gw
            for v in sphere_around(tree.params, w, k):
                out[v] = out.get(v, 0) + contrib
    return out


def convolve_radial(f: RadialSeq, g: RadialSeq) -> RadialSeq:
    """``f * g`` for two radial functions on V+, via sphere-intersection counts."""
    _check_vplus_radial(f)
    _check_vplus_radial(g)
    params = f.params
    rf, rg = f.radius, g.radius
    if rf < 0 or rg < 0:
        return RadialSeq(params, [Fraction(0)])
    top = rf + rg
    values = []
    for n in range(top + 1):
        acc = 0
        if n % 2 == 0:
            for k in range(0, rf + 1, 2):
                fk = f.at(k)
                if fk == 0:
                    continue
                for m in range(abs(n - k), min(n + k, rg) + 1, 2):
                    gm = g.at(m)
                    if gm != 0:
                        acc = acc + fk * gm * sphere_count(params, n, k, m)
        values.append(acc)
    return RadialSeq(params, values)


def laplace_apply(tree: TruncatedTree, h: Callable[[Vertex], object] | Mapping[Vertex, object]) -> dict:
    """Neighbor average ``mu_1 h`` on all vertices strictly inside the window."""
    get = (lambda w: h.get(w, 0)) if isinstance(h, Mapping) else h
    out = {}
    for v in tree.vertices(max_level=tree.depth - 1):
        nbrs = tree.neighbors(v)
        total = sum((get(w) for w in nbrs), 0)
        out[v] = Fraction(total, len(nbrs)) if isinstance(total, int) else total / len(nbrs)
    return out


@dataclass(frozen=True)
class KernelOp:
    """Summation operator ``R h(v) = sum_w r(v, w) h(w)`` with ``r = 0`` beyond ``range``."""

    tree: TruncatedTree
    kernel: Callable[[Vertex, Vertex], object]
    range: int

    def apply(self, h: Callable[[Vertex], object] | Mapping[Vertex, object]) -> dict:
        get = (lambda w: h.get(w, 0)) if isinstance(h, Mapping) else h
        out = {}
        top = self.tree.depth - self.range
        for v in self.tree.vertices(max_level=top):
            acc = 0
            for k in range(self.range + 1):
                for w in sphere_around(self.tree.params, v, k):
                    r = self.kernel(v, w)
                    if r != 0:
                        acc = acc + r * get(w)
            out[v] = acc
        return out


def sphere_mean_operator(tree: TruncatedTree, n: int) -> KernelOp:
    """``mu_n`` acting on functions on V: mean over the sphere of radius n around each vertex."""
    params = tree.params
    from .tree import distance

    sizes = {eps: Fraction(1, sphere_size_around(params, (0,) * eps, n)) for eps in (0, 1)}

    def kernel(v, w):
        return sizes[len(v) % 2] if distance(v, w) == n else 0

    return KernelOp(tree, kernel, n)


def _random_rational_function(tree: TruncatedTree, seed: int) -> dict:
    rng = random.Random(seed)
    return {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in tree.vertices()}


def mu_n_operator_recurrence_check(tree: TruncatedTree, n: int, seed: int = 0) -> dict:
    """Check ``mu_1 mu_n = mu_{n-1}/(q'+1) + q' mu_{n+1}/(q'+1)`` pointwise.

    ``q'`` is the homogeneity degree of the *neighbors* of the evaluation
    vertex.  The report also carries the residual obtained with the degree of
    the evaluation vertex itself, and the commutator ``mu_1 mu_n - mu_n mu_1``.
    """
    if n < 1 or n + 1 > tree.depth - 1:
        raise TreeError(f"need 1 <= n and n + 2 <= depth, got n={n}, depth={tree.depth}")
    params = tree.params
    h = _random_rational_function(tree, seed)
    mu1 = sphere_mean_operator(tree, 1)
    mun_h = sphere_mean_operator(tree, n).apply(h)
    lower = sphere_mean_operator(tree, n - 1).apply(h) if n > 1 else h
    upper = sphere_mean_operator(tree, n + 1).apply(h)
    mu1_h = mu1.apply(h)
    top = tree.depth - n - 1

    worst = {+1: Fraction(0), -1: Fraction(0)}
    worst_literal = {+1: Fraction(0), -1: Fraction(0)}
    worst_comm = Fraction(0)
    checked = 0
    for v in tree.vertices(max_level=top):
        nbrs = params.degree(len(v) + 1)
        own = params.degree(len(v))
        lhs = sum((mun_h[w] for w in tree.neighbors(v)), Fraction(0)) / (own + 1)
        rhs = lower[v] / (nbrs + 1) + nbrs * upper[v] / (nbrs + 1)
        rhs_literal = lower[v] / (own + 1) + own * upper[v] / (own + 1)
        comm = lhs - sum((mu1_h[w] for w in sphere_around(params, v, n)), Fraction(0)) / sphere_size_around(params, v, n)
        eps = 1 if len(v) % 2 == 0 else -1
        worst[eps] = max(worst[eps], abs(lhs - rhs))
        worst_literal[eps] = max(worst_literal[eps], abs(lhs - rhs_literal))
        worst_comm = max(worst_comm, abs(comm))
        checked += 1
    return {
        "n": n,
        "depth": tree.depth,
        "vertices_checked": checked,
        "max_residual": max(worst.values()),
        "max_residual_by_parity": {"+": worst[1], "-": worst[-1]},
        "max_residual_own_degree": max(worst_literal.values()),
        "max_commutator": worst_comm,
        "passed": max(worst.values()) == 0,
    }


def _values_of(phi: SphericalEval | Sequence) -> Sequence:
    return phi.values if isinstance(phi, SphericalEval) else phi


def functional_L(phi: SphericalEval | Sequence, f: RadialSeq):
    """``L_phi(f) = <f, phi> = sum_n f(n) |C(n)| phi_n`` over V+."""
    values = _values_of(phi)
    if f.radius >= len(values):
        raise ValueError(f"spherical values known to {len(values) - 1}, f reaches {f.radius}")
    acc = 0
    for n in range(0, f.radius + 1, 2):
        if f.at(n) != 0:
            acc = acc + f.at(n) * sphere_size(f.params, n) * values[n]
    return acc


def involution(f: RadialSeq) -> RadialSeq:
    """``f*``: with the involutive section this is complex conjugation on radial functions."""
    return RadialSeq(f.params, [v.conjugate() for v in f.values], f.on_vplus)


def spherical_on_vplus(phi: SphericalEval, length: int | None = None) -> RadialSeq:
    """Restriction of a spherical function to V+ as a radial sequence."""
    vals = list(phi.values if length is None else phi.values[:length])
    return RadialSeq(phi.params, [v if n % 2 == 0 else 0 * v for n, v in enumerate(vals)])
