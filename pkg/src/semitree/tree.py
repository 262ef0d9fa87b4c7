"""Coordinate words on the semi-homogeneous tree rooted at a vertex of V+.

A vertex is the tuple of child indices read off the geodesic from the root
``v0 = ()``.  The root has ``q_plus + 1`` children; a vertex at odd level
(in V-) has ``q_minus`` children, a vertex at even positive level (in V+)
has ``q_plus`` children.  Nothing here materializes the infinite tree: word
arithmetic handles distances and neighborhoods, and :class:`TruncatedTree`
is the finite window used by the brute-force oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterator

Vertex = tuple[int, ...]

ROOT: Vertex = ()


class TreeError(ValueError):
    """Invalid vertex, level or window request."""


@dataclass(frozen=True)
class TreeParams:
    q_plus: int
    q_minus: int

    def __post_init__(self):
        for name in ("q_plus", "q_minus"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 2:
                raise TreeError(f"{name} must be an integer >= 2, got {value!r}")

    @property
    def homogeneous(self) -> bool:
        return self.q_plus == self.q_minus

    def degree(self, level: int) -> int:
        """Homogeneity degree q of a vertex at ``level`` (its neighbor count minus one)."""
        return self.q_plus if level % 2 == 0 else self.q_minus

    def out_degree(self, level: int) -> int:
        """Number of children (outward neighbors) of a vertex at ``level``."""
        if level == 0:
            return self.q_plus + 1
        return self.degree(level)

    def swapped(self) -> "TreeParams":
        return TreeParams(self.q_minus, self.q_plus)

    def check_word(self, word: Vertex) -> Vertex:
        word = tuple(word)
        for i, c in enumerate(word):
            if not isinstance(c, int) or c < 0 or c >= self.out_degree(i):
                raise TreeError(
                    f"index {c!r} at position {i} out of range [0, {self.out_degree(i) - 1}]"
                )
        return word


def level(v: Vertex) -> int:
    return len(v)


def parity(v: Vertex) -> int:
    """+1 on V+ (even level), -1 on V- (odd level)."""
    return 1 if len(v) % 2 == 0 else -1


def sphere_size(params: TreeParams, n: int) -> int:
    """Exact number of vertices at distance ``n`` from the root."""
    if n < 0:
        raise TreeError(f"negative radius {n}")
    size = 1
    for k in range(n):
        size *= params.out_degree(k)
    return size


def sphere_size_around(params: TreeParams, v: Vertex, n: int) -> int:
    """Number of vertices at distance ``n`` from ``v``; depends only on the parity of ``v``."""
    if n < 0:
        raise TreeError(f"negative radius {n}")
    if n == 0:
        return 1
    size = params.degree(len(v)) + 1
    for k in range(1, n):
        size *= params.degree(len(v) + k)
    return size


def common_prefix(u: Vertex, v: Vertex) -> int:
    k = 0
    for a, b in zip(u, v):
        if a != b:
            break
        k += 1
    return k


def distance(u: Vertex, v: Vertex) -> int:
    return len(u) + len(v) - 2 * common_prefix(u, v)


def children(params: TreeParams, v: Vertex) -> list[Vertex]:
    return [v + (c,) for c in range(params.out_degree(len(v)))]


def neighbors(params: TreeParams, v: Vertex) -> list[Vertex]:
    """Parent (if any) followed by all children of ``v``."""
    out = [v[:-1]] if v else []
    return out + children(params, v)


def subtree_at(params: TreeParams, v: Vertex, steps: int, skip: int | None = None) -> Iterator[Vertex]:
    """Descendants of ``v`` exactly ``steps`` levels below it.

    ``skip`` excludes one child of ``v`` (the branch leading back toward a
    starting vertex when walking spheres around an arbitrary center).
    """
    if steps == 0:
        yield v
        return
    ranges = [range(params.out_degree(len(v) + i)) for i in range(steps)]
    for tail in product(*ranges):
        if skip is not None and tail[0] == skip:
            continue
        yield v + tail


def sphere_around(params: TreeParams, v: Vertex, k: int) -> Iterator[Vertex]:
    """All vertices at distance exactly ``k`` from ``v`` in the infinite tree."""
    if k < 0:
        raise TreeError(f"negative radius {k}")
    for up in range(min(k, len(v)) + 1):
        anchor = v[: len(v) - up]
        down = k - up
        if up == 0:
            yield from subtree_at(params, anchor, down)
        elif down == 0:
            yield anchor
        else:
            yield from subtree_at(params, anchor, down, skip=v[len(anchor)])


def sphere_count(params: TreeParams, n: int, k: int, m: int) -> int:
    """Number of vertices w with |w| = m and d(v, w) = k, for any v with |v| = n.

    Counting route for the same sets :func:`sphere_around` enumerates.
    """
    twice_up = n + k - m
    if twice_up < 0 or twice_up % 2:
        return 0
    up = twice_up // 2
    if up > n or up > k:
        return 0
    down = k - up
    top = n - up
    if down == 0:
        return 1
    count = params.out_degree(top) - (1 if up > 0 else 0)
    for ell in range(top + 1, top + down):
        count *= params.out_degree(ell)
    return count


def format_vertex(v: Vertex) -> str:
    return "/".join(str(c) for c in v)


def parse_vertex(text: str, params: TreeParams | None = None) -> Vertex:
    text = text.strip()
    word = tuple(int(c) for c in text.split("/")) if text else ROOT
    return params.check_word(word) if params is not None else word


@dataclass(frozen=True)
class TruncatedTree:
    """All vertices of level at most ``depth``, enumerated sphere by sphere."""

    params: TreeParams
    depth: int = 12
    _spheres: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 0:
            raise TreeError(f"negative depth {self.depth}")

    def sphere(self, n: int) -> list[Vertex]:
        if n < 0 or n > self.depth:
            raise TreeError(f"sphere {n} outside truncated tree of depth {self.depth}")
        if n not in self._spheres:
            self._spheres[n] = list(subtree_at(self.params, ROOT, n))
        return self._spheres[n]

    def vertices(self, max_level: int | None = None, even_only: bool = False) -> Iterator[Vertex]:
        top = self.depth if max_level is None else min(max_level, self.depth)
        for n in range(top + 1):
            if even_only and n % 2:
                continue
            yield from self.sphere(n)

    @cached_property
    def size(self) -> int:
        return sum(sphere_size(self.params, n) for n in range(self.depth + 1))

    def contains(self, v: Vertex) -> bool:
        return len(v) <= self.depth

    def is_boundary(self, v: Vertex) -> bool:
        return len(v) == self.depth

    def neighbors(self, v: Vertex) -> list[Vertex]:
        """Neighbors of ``v`` inside the window.

        Raises for vertices on the truncation boundary, whose neighbor list
        would be incomplete.
        """
        if not self.contains(v):
            raise TreeError(f"vertex at level {len(v)} outside depth {self.depth}")
        if self.is_boundary(v):
            raise TreeError(f"boundary vertex {format_vertex(v)!r}: neighbor list incomplete")
        return neighbors(self.params, v)

    def sphere_around(self, v: Vertex, k: int) -> list[Vertex]:
        if len(v) + k > self.depth:
            raise TreeError(
                f"sphere of radius {k} around level-{len(v)} vertex leaves depth {self.depth}"
            )
        return list(sphere_around(self.params, v, k))


def enumerate_sphere(tree: TruncatedTree, n: int) -> list[Vertex]:
    return tree.sphere(n)
