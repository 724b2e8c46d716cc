"""Wrapping-cluster percolation on shrunk lattices under edge erasure."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lattice import Color, Geometry, ShrunkLattice


class SequenceIncomplete(RuntimeError):
    pass


class _WindingUnionFind:
    """Union-find whose nodes carry their covering-plane offset to the root.

    A union that closes a cycle with nonzero net displacement has found a
    loop winding the torus.
    """

    def __init__(self, nodes: Iterable[int]):
        self.parent = {n: n for n in nodes}
        self.offset = {n: (0, 0) for n in self.parent}
        self.size = {n: 1 for n in self.parent}

    def find(self, n: int) -> tuple[int, tuple[int, int]]:
        path = []
        while self.parent[n] != n:
            path.append(n)
            n = self.parent[n]
        root = n
        # compress, accumulating offsets from the top of the path down
        acc = (0, 0)
        for m in reversed(path):
            o = self.offset[m]
            acc = (acc[0] + o[0], acc[1] + o[1])
            self.offset[m] = acc
            self.parent[m] = root
        return root, self.offset[path[0]] if path else (0, 0)

    def union(self, a: int, b: int, shift: tuple[int, int]) -> bool:
        """Join ``a`` and ``b`` where pos(b) = pos(a) + shift; True if a winding cycle closes."""
        ra, oa = self.find(a)
        rb, ob = self.find(b)
        if ra == rb:
            return oa[0] + shift[0] != ob[0] or oa[1] + shift[1] != ob[1]
        # offset of rb relative to ra
        d = (oa[0] + shift[0] - ob[0], oa[1] + shift[1] - ob[1])
        if self.size[ra] < self.size[rb]:
            ra, rb, d = rb, ra, (-d[0], -d[1])
        self.parent[rb] = ra
        self.offset[rb] = d
        self.size[ra] += self.size[rb]
        return False


@dataclass
class ErasureState:
    lattice: ShrunkLattice
    erased: set[int] = field(default_factory=set)

    def __post_init__(self):
        bad = set(self.erased) - {e.id for e in self.lattice.edges}
        if bad:
            raise ValueError(f"unknown shrunk edge ids {sorted(bad)[:5]}")

    @property
    def fraction(self) -> float:
        return len(self.erased) / self.lattice.n_edges if self.lattice.n_edges else 0.0


def wraps(state: ErasureState) -> bool:
    """Does some cluster of surviving edges wind around the torus?"""
    uf = _WindingUnionFind(state.lattice.nodes)
    erased = state.erased
    for e in state.lattice.edges:
        if e.id not in erased and uf.union(e.a, e.b, e.shift):
            return True
    return False


def wrap_directions(state: ErasureState) -> tuple[bool, bool]:
    """(horizontal, vertical): does some surviving cycle wind in that torus direction?"""
    uf = _WindingUnionFind(state.lattice.nodes)
    horizontal = vertical = False
    for e in state.lattice.edges:
        if e.id in state.erased:
            continue
        ra, oa = uf.find(e.a)
        rb, ob = uf.find(e.b)
        if ra == rb:
            horizontal |= oa[0] + e.shift[0] != ob[0]
            vertical |= oa[1] + e.shift[1] != ob[1]
        else:
            uf.union(e.a, e.b, e.shift)
    return horizontal, vertical


def winding_classes(state: ErasureState) -> set[tuple[int, int]]:
    """Mod-2 winding numbers spanned by surviving cycles, as a set of nonzero vectors.

    A cycle winding (w_x, w_y) times carries a string operator whose logical
    class depends only on the parities, so the result has 0, 1 or 3 elements.
    """
    L = state.lattice.L
    uf = _WindingUnionFind(state.lattice.nodes)
    span: set[tuple[int, int]] = set()
    for e in state.lattice.edges:
        if e.id in state.erased:
            continue
        ra, oa = uf.find(e.a)
        rb, ob = uf.find(e.b)
        if ra != rb:
            uf.union(e.a, e.b, e.shift)
            continue
        w = ((oa[0] + e.shift[0] - ob[0]) // L % 2, (oa[1] + e.shift[1] - ob[1]) // L % 2)
        if w != (0, 0) and w not in span:
            span |= {w} | {((w[0] + s[0]) % 2, (w[1] + s[1]) % 2) for s in span}
            span.discard((0, 0))
        if len(span) == 3:
            break
    return span


def wraps_bfs(state: ErasureState) -> bool:
    """Independent check of :func:`wraps` by breadth-first search in the covering plane."""
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {n: [] for n in state.lattice.nodes}
    for e in state.lattice.edges:
        if e.id in state.erased:
            continue
        adj[e.a].append((e.b, e.shift))
        adj[e.b].append((e.a, (-e.shift[0], -e.shift[1])))
    pos: dict[int, tuple[int, int]] = {}
    for start in adj:
        if start in pos:
            continue
        pos[start] = (0, 0)
        queue = deque([start])
        while queue:
            n = queue.popleft()
            p = pos[n]
            for m, s in adj[n]:
                q = (p[0] + s[0], p[1] + s[1])
                if m not in pos:
                    pos[m] = q
                    queue.append(m)
                elif pos[m] != q:
                    return True
    return False


@dataclass(frozen=True)
class Onset:
    index: int  # erased edges at the first non-wrapping moment
    fraction: float
    complete: bool  # False when the whole sequence never destroyed wrapping


def onset_index(lattice: ShrunkLattice, sequence: Sequence[int]) -> Onset:
    """Reverse sweep: re-add erased edges last-first until a winding cycle closes."""
    n_edges = lattice.n_edges
    in_seq = set(sequence)
    if len(in_seq) != len(sequence):
        raise ValueError("erasure sequence contains duplicates")
    uf = _WindingUnionFind(lattice.nodes)
    by_id = {e.id: e for e in lattice.edges}
    for e in lattice.edges:
        if e.id not in in_seq and uf.union(e.a, e.b, e.shift):
            return Onset(n_edges, 1.0, False)
    for t in range(len(sequence) - 1, -1, -1):
        e = by_id[sequence[t]]
        if uf.union(e.a, e.b, e.shift):
            return Onset(t + 1, (t + 1) / n_edges, True)
    # empty lattice never wraps
    return Onset(0, 0.0, True)


def onset_fraction(lattice: ShrunkLattice, sequence: Sequence[int], strict: bool = False) -> float:
    """Erased-edge fraction at which wrapping first disappears.

    Returns 1.0 when the sequence never destroys wrapping; with ``strict``
    that case raises :class:`SequenceIncomplete` instead.
    """
    onset = onset_index(lattice, sequence)
    if not onset.complete and strict:
        raise SequenceIncomplete("erasure sequence never destroys wrapping")
    return onset.fraction


def onset_index_forward(lattice: ShrunkLattice, sequence: Sequence[int]) -> Onset:
    """Oracle: recompute :func:`wraps_bfs` after every erasure."""
    state = ErasureState(lattice)
    if not wraps_bfs(state):
        return Onset(0, 0.0, True)
    for t, eid in enumerate(sequence):
        state.erased.add(eid)
        if not wraps_bfs(state):
            return Onset(t + 1, (t + 1) / lattice.n_edges, True)
    return Onset(lattice.n_edges, 1.0, False)


_S = 2.0 * math.sin(math.pi / 18.0)


@dataclass(frozen=True)
class ThresholdConstant:
    geometry: Geometry
    color: Color
    expression: str
    value: float

    def to_record(self) -> dict:
        return {
            "geometry": self.geometry.value,
            "color": self.color.label,
            "expression": self.expression,
            "r_c": self.value,
        }


# critical erased-bond fractions; double-bond lattices take the square root
_CONSTANTS = {
    (Geometry.G488, Color.RED): ("1/2", 0.5),
    (Geometry.G488, Color.BLUE): ("sqrt(1/2)", math.sqrt(0.5)),
    (Geometry.G488, Color.GREEN): ("sqrt(1/2)", math.sqrt(0.5)),
    (Geometry.G666, Color.RED): ("1-2sin(pi/18)", 1.0 - _S),
    (Geometry.G666, Color.BLUE): ("1-2sin(pi/18)", 1.0 - _S),
    (Geometry.G666, Color.GREEN): ("1-2sin(pi/18)", 1.0 - _S),
    (Geometry.G4612, Color.RED): ("kagome 0.4756", 0.4756),
    (Geometry.G4612, Color.BLUE): ("sqrt(1-2sin(pi/18))", math.sqrt(1.0 - _S)),
    (Geometry.G4612, Color.GREEN): ("sqrt(2sin(pi/18))", math.sqrt(_S)),
}


def r_c_constant(geometry, color) -> ThresholdConstant:
    g = Geometry.parse(geometry)
    c = Color.parse(color)
    expr, value = _CONSTANTS[(g, c)]
    return ThresholdConstant(g, c, expr, value)
