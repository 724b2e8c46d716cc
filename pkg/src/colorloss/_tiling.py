"""Unit-cell templates for the three regular color-code tilings.

Each tiling is given by two lattice vectors and the Cartesian positions of
the qubits of one unit cell (bond length 1).  Edges are found by distance,
faces by walking the planar embedding, so the only hand-entered data are
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_TOL = 1e-6


@dataclass(frozen=True)
class EdgeTemplate:
    k1: int
    k2: int
    shift: tuple[int, int]  # cell of k2 relative to the cell of k1


@dataclass(frozen=True)
class FaceTemplate:
    # cyclic boundary as (site, cell offset relative to the face's home cell)
    cycle: tuple[tuple[int, tuple[int, int]], ...]

    @property
    def size(self) -> int:
        return len(self.cycle)


@dataclass
class Tiling:
    name: str
    vectors: np.ndarray  # rows are the two lattice vectors
    sites: np.ndarray  # (n, 2) Cartesian positions inside the cell
    edges: list[EdgeTemplate] = field(default_factory=list)
    faces: list[FaceTemplate] = field(default_factory=list)
    # half-edge (k1, k2, shift) -> (face template index, home cell relative to k1's cell)
    half_edge_face: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def position(self, k: int, cell) -> np.ndarray:
        return self.sites[k] + cell[0] * self.vectors[0] + cell[1] * self.vectors[1]


def _find_edges(t: Tiling) -> None:
    seen = set()
    for k1 in range(t.n_sites):
        for k2 in range(t.n_sites):
            for dx in range(-2, 3):
                for dy in range(-2, 3):
                    if k1 == k2 and dx == 0 and dy == 0:
                        continue
                    d = np.linalg.norm(t.position(k2, (dx, dy)) - t.sites[k1])
                    if abs(d - 1.0) > _TOL:
                        continue
                    key = (k1, k2, (dx, dy))
                    rev = (k2, k1, (-dx, -dy))
                    if rev in seen:
                        continue
                    seen.add(key)
                    t.edges.append(EdgeTemplate(k1, k2, (dx, dy)))


def _neighbour_table(t: Tiling):
    """Per site, incident half-edges sorted counter-clockwise."""
    table: list[list[tuple[int, tuple[int, int]]]] = [[] for _ in range(t.n_sites)]
    for e in t.edges:
        table[e.k1].append((e.k2, e.shift))
        table[e.k2].append((e.k1, (-e.shift[0], -e.shift[1])))
    for k, row in enumerate(table):
        def angle(item, k=k):
            v = t.position(item[0], item[1]) - t.sites[k]
            return math.atan2(v[1], v[0])
        row.sort(key=angle)
    return table


def _home_cell(t: Tiling, points: np.ndarray) -> tuple[int, int]:
    centroid = points.mean(axis=0)
    frac = np.linalg.solve(t.vectors.T, centroid)
    frac = np.round(frac, 9)
    return int(math.floor(frac[0])), int(math.floor(frac[1]))


def _find_faces(t: Tiling) -> None:
    table = _neighbour_table(t)
    templates: dict[frozenset, int] = {}
    for k in range(t.n_sites):
        for k2, s in table[k]:
            # walk the face to the right of the half-edge (k,0) -> (k2,s)
            walk = [(k, (0, 0))]
            halfedges = [((k, (0, 0)), (k2, s))]
            cur, prev = (k2, s), (k, (0, 0))
            while cur != walk[0]:
                walk.append(cur)
                row = table[cur[0]]
                back = (prev[0], (prev[1][0] - cur[1][0], prev[1][1] - cur[1][1]))
                idx = row.index(back)
                nk, ns = row[(idx - 1) % len(row)]
                nxt = (nk, (cur[1][0] + ns[0], cur[1][1] + ns[1]))
                halfedges.append((cur, nxt))
                prev, cur = cur, nxt
            pts = np.array([t.position(kk, c) for kk, c in walk])
            home = _home_cell(t, pts)
            rel = tuple((kk, (c[0] - home[0], c[1] - home[1])) for kk, c in walk)
            key = frozenset(rel)
            if key not in templates:
                templates[key] = len(t.faces)
                t.faces.append(FaceTemplate(rel))
            fi = templates[key]
            for (a, ca), (b, cb) in halfedges:
                shift = (cb[0] - ca[0], cb[1] - ca[1])
                t.half_edge_face[(a, b, shift)] = (fi, (home[0] - ca[0], home[1] - ca[1]))


def _build(name: str, vectors, sites) -> Tiling:
    t = Tiling(name, np.asarray(vectors, dtype=float), np.asarray(sites, dtype=float))
    _find_edges(t)
    _find_faces(t)
    # order face templates by size so ids are stable across runs
    order = sorted(range(len(t.faces)), key=lambda i: (t.faces[i].size, sorted(t.faces[i].cycle)))
    remap = {old: new for new, old in enumerate(order)}
    t.faces = [t.faces[i] for i in order]
    t.half_edge_face = {k: (remap[f], h) for k, (f, h) in t.half_edge_face.items()}
    if len(t.edges) * 2 != 3 * t.n_sites or 2 * len(t.faces) != t.n_sites:
        raise RuntimeError(f"malformed {name} template")
    return t


def square_octagon() -> Tiling:
    a = 1.0 + math.sqrt(2.0)
    d = math.sqrt(2.0) / 2.0
    return _build("4.8.8", [(a, 0.0), (0.0, a)], [(d, 0.0), (0.0, d), (-d, 0.0), (0.0, -d)])


def honeycomb() -> Tiling:
    s3 = math.sqrt(3.0)
    a1 = np.array([s3, 0.0])
    a2 = np.array([s3 / 2.0, 1.5])
    v0 = np.array([0.0, 1.0])
    v1 = np.array([s3 / 2.0, 0.5])
    sites = []
    for m in range(3):
        sites.append(v0 + m * a1)
        sites.append(v1 + m * a1)
    # sqrt(3) x sqrt(3) supercell: the period of the face 3-coloring
    return _build("6.6.6", [a1 + a2, 2 * a2 - a1], sites)


def square_hexagon_dodecagon() -> Tiling:
    big = 3.0 + math.sqrt(3.0)
    radius = 1.0 / (2.0 * math.sin(math.radians(15.0)))
    sites = [
        (radius * math.cos(math.radians(15 + 30 * k)), radius * math.sin(math.radians(15 + 30 * k)))
        for k in range(12)
    ]
    return _build("4.6.12", [(big, 0.0), (big / 2.0, big * math.sqrt(3.0) / 2.0)], sites)
