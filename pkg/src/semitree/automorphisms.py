"""Explicit isometries of the tree that move the root to a chosen vertex of V+.

``path_reversal(tree, v)`` reverses the geodesic ``[v0, v]`` and carries the
branches hanging off the geodesic vertex ``x_k`` onto those hanging off
``x_{m-k}``, pairing them by rank.  The rank pairing from ``k`` to ``m-k`` is
the inverse of the one from ``m-k`` to ``k``, so every such map is an
involution.  Using it as the section ``v -> tau[v]`` makes
``tau[v]^-1 = tau[v]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .tree import ROOT, TreeError, TreeParams, TruncatedTree, Vertex, common_prefix, format_vertex


@dataclass(frozen=True)
class Isometry:
    params: TreeParams
    target: Vertex
    depth: int

    @property
    def window(self) -> int:
        """Largest level of a vertex the map is trusted on."""
        return self.depth - len(self.target)

    def __call__(self, u: Vertex) -> Vertex:
        return apply(self, u)

    def _others(self, k: int) -> list[int]:
        # non-geodesic child indices at geodesic vertex x_k
        v = self.target
        m = len(v)
        width = self.params.out_degree(k)
        if k == m:
            return list(range(width))
        return [c for c in range(width) if c != v[k]]

    def _image(self, u: Vertex) -> Vertex:
        v = self.target
        m = len(v)
        if m == 0:
            return u
        k = common_prefix(u, v)
        if k == len(u):
            # u is the geodesic vertex x_k
            return v[: m - k]
        branch = self._others(k).index(u[k])
        head = v[: m - k]
        return head + (self._others(m - k)[branch],) + u[k + 1 :]


def identity(tree: TruncatedTree) -> Isometry:
    return Isometry(tree.params, ROOT, tree.depth)


def path_reversal(tree: TruncatedTree, v: Vertex) -> Isometry:
    """Involutive isometry swapping ``v0`` and ``v`` (``v`` must lie in V+)."""
    v = tree.params.check_word(v)
    if len(v) % 2:
        raise TreeError(
            f"{format_vertex(v)!r} is in V-: no automorphism maps V+ to V- when q+ != q-"
        )
    if 2 * len(v) > tree.depth:
        raise TreeError(f"depth {tree.depth} too small for a reversal to level {len(v)}")
    return Isometry(tree.params, v, tree.depth)


def apply(sigma: Isometry, u: Vertex) -> Vertex:
    if len(u) > sigma.window:
        raise TreeError(
            f"vertex at level {len(u)} outside the window (<= {sigma.window}) of this isometry"
        )
    return sigma._image(tuple(u))


def radialize(
    tree: TruncatedTree,
    g: Callable[[Vertex], object] | Mapping[Vertex, object],
    max_level: int | None = None,
):
    """Average ``g`` over each sphere around the root; returns a RadialSeq."""
    from .radial_algebra import RadialSeq

    top = tree.depth if max_level is None else max_level
    lookup = (lambda w: g.get(w, 0)) if isinstance(g, Mapping) else g
    values = []
    for n in range(top + 1):
        sphere = tree.sphere(n)
        total = sum((lookup(w) for w in sphere), 0)
        if isinstance(total, int):
            total = Fraction(total)
        values.append(total / len(sphere))
    return RadialSeq(tree.params, tuple(values), on_vplus=False)
