"""Color-code lattices on the torus.

A :class:`ColorCodeLattice` holds a trivalent, face-3-colorable multigraph
whose qubits sit on the vertices.  The object is mutable: the loss protocol
removes qubit pairs, shrinks and merges faces and rewires edges in place.
Faces are stored as qubit sets, which is all the stabilizer structure needs;
the cyclic boundary can be recovered with :meth:`ColorCodeLattice.face_cycle`.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from . import _tiling
from .gf2 import BitMatrix

LATTICE_SCHEMA = "colorloss.lattice/1"


class Color(enum.IntEnum):
    RED = 0
    BLUE = 1
    GREEN = 2

    @classmethod
    def parse(cls, value) -> "Color":
        if isinstance(value, Color):
            return value
        if isinstance(value, int):
            return cls(value)
        return cls[str(value).strip().upper()]

    @property
    def label(self) -> str:
        return self.name.lower()


COLORS = (Color.RED, Color.BLUE, Color.GREEN)


class Geometry(enum.Enum):
    G488 = "488"
    G666 = "666"
    G4612 = "4612"

    @classmethod
    def parse(cls, value) -> "Geometry":
        if isinstance(value, Geometry):
            return value
        text = str(value).strip().upper().replace(".", "").replace("G", "")
        for g in cls:
            if g.value == text:
                return g
        raise ValueError(f"unknown geometry {value!r}; expected one of 488, 666, 4612")

    @property
    def label(self) -> str:
        return {"488": "4.8.8", "666": "6.6.6", "4612": "4.6.12"}[self.value]


class Direction(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class UnsupportedSize(ValueError):
    """The requested linear size cannot carry a periodic 3-face-coloring."""


class Edge(NamedTuple):
    u: int
    v: int
    color: Color
    original: bool

    def other(self, q: int) -> int:
        return self.v if q == self.u else self.u


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple
    message: str


@dataclass(frozen=True)
class ShrunkEdge:
    id: int
    a: int  # face id of one endpoint node
    b: int
    original_edge: int
    shift: tuple[int, int]  # cell displacement a -> b in the covering plane


@dataclass
class ShrunkLattice:
    color: Color
    nodes: list[int]
    edges: list[ShrunkEdge]
    L: int

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def parallel_pairs(self) -> int:
        """Number of node pairs joined by more than one edge."""
        counts: dict = {}
        for e in self.edges:
            key = (min(e.a, e.b), max(e.a, e.b))
            counts[key] = counts.get(key, 0) + 1
        return sum(1 for c in counts.values() if c > 1)

    def degrees(self) -> dict[int, int]:
        deg = {n: 0 for n in self.nodes}
        for e in self.edges:
            deg[e.a] += 1
            deg[e.b] += 1
        return deg


@dataclass(frozen=True)
class LogicalRepresentative:
    q: int
    color: Color
    direction: Direction
    support: frozenset


@lru_cache(maxsize=None)
def _template(geometry: Geometry) -> _tiling.Tiling:
    return {
        Geometry.G488: _tiling.square_octagon,
        Geometry.G666: _tiling.honeycomb,
        Geometry.G4612: _tiling.square_hexagon_dodecagon,
    }[geometry]()


class ColorCodeLattice:
    """Mutable color-code lattice on an ``L x L`` torus of unit cells."""

    def __init__(self, geometry: Geometry, L: int):
        self.geometry = geometry
        self.L = L
        self.n_qubits = 0
        self.cell_size = 0
        self.qubit_cell: list[tuple[int, int, int]] = []
        self.edges: dict[int, Edge] = {}
        self.edge_shift: dict[int, tuple[int, int]] = {}
        self.nbr: list[list[int] | None] = []
        self.faces: dict[int, set[int]] = {}
        self.face_color: dict[int, Color] = {}
        self.qface: list[list[int] | None] = []
        self.face_home: dict[int, tuple[int, int]] = {}
        self.member_offset: dict[tuple[int, int], tuple[int, int]] = {}
        self.n_original_edges = 0
        self.n_original_faces = 0
        self.next_edge_id = 0

    # -- queries --------------------------------------------------------

    @property
    def alive(self) -> list[int]:
        return [q for q, row in enumerate(self.nbr) if row is not None]

    def is_alive(self, q: int) -> bool:
        return 0 <= q < self.n_qubits and self.nbr[q] is not None

    def n_alive(self) -> int:
        return sum(1 for row in self.nbr if row is not None)

    def neighbour(self, q: int, color: int) -> int:
        return self.edges[self.nbr[q][color]].other(q)

    def neighbours(self, q: int) -> list[int]:
        return [self.neighbour(q, c) for c in COLORS]

    def face_of(self, q: int, color: int) -> int:
        return self.qface[q][color]

    def edges_of_color(self, color: Color) -> list[int]:
        return sorted(e for e, edge in self.edges.items() if edge.color == color)

    def encoded_qubits(self) -> int:
        return self.n_alive() - (2 * len(self.faces) - 4)

    def face_cycle(self, fid: int) -> list[int]:
        """Boundary of a face as a cyclic qubit list (alternating edge colors)."""
        members = self.faces[fid]
        color = self.face_color[fid]
        others = [c for c in COLORS if c != color]
        start = min(members)
        cycle = [start]
        q, step = start, 0
        while True:
            q = self.neighbour(q, others[step % 2])
            step += 1
            if q == start and step % 2 == 0:
                break
            if step > 2 * len(members) + 2:
                break
            cycle.append(q)
        return cycle

    def copy(self) -> "ColorCodeLattice":
        """Independent copy; geometry tables that corrections never touch are shared."""
        new = ColorCodeLattice.__new__(ColorCodeLattice)
        new.__dict__.update(self.__dict__)
        new.edges = dict(self.edges)
        new.nbr = [None if row is None else list(row) for row in self.nbr]
        new.faces = {f: set(m) for f, m in self.faces.items()}
        new.face_color = dict(self.face_color)
        new.qface = [None if row is None else list(row) for row in self.qface]
        return new

    def ball(self, center: int, radius: int) -> dict[int, int]:
        """Graph distance from ``center`` for every alive qubit within ``radius``."""
        dist = {center: 0}
        queue = deque([center])
        while queue:
            q = queue.popleft()
            if dist[q] == radius:
                continue
            for n in self.neighbours(q):
                if n not in dist:
                    dist[n] = dist[q] + 1
                    queue.append(n)
        return dist

    def ball_wraps(self, center: int, radius: int) -> bool:
        """True if the radius ball meets itself around the torus."""
        pos = {center: (0, 0)}
        dist = {center: 0}
        queue = deque([center])
        while queue:
            q = queue.popleft()
            if dist[q] == radius:
                continue
            for c in COLORS:
                eid = self.nbr[q][c]
                edge = self.edges[eid]
                sx, sy = self.edge_shift[eid]
                if edge.u != q:
                    sx, sy = -sx, -sy
                n = edge.other(q)
                p = (pos[q][0] + sx, pos[q][1] + sy)
                if n in pos:
                    if pos[n] != p:
                        return True
                    continue
                pos[n] = p
                dist[n] = dist[q] + 1
                queue.append(n)
        return False

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": LATTICE_SCHEMA,
            "geometry": self.geometry.value,
            "L": self.L,
            "n_qubits": self.n_qubits,
            "cell_size": self.cell_size,
            "qubit_cell": [list(c) for c in self.qubit_cell],
            "alive": [row is not None for row in self.nbr],
            "edges": [
                {
                    "id": eid,
                    "u": e.u,
                    "v": e.v,
                    "color": e.color.label,
                    "original": e.original,
                    "shift": list(self.edge_shift[eid]) if eid in self.edge_shift else None,
                }
                for eid, e in sorted(self.edges.items())
            ],
            "faces": [
                {
                    "id": fid,
                    "color": self.face_color[fid].label,
                    "qubits": self.face_cycle(fid),
                    "home": list(self.face_home[fid]) if fid in self.face_home else None,
                }
                for fid in sorted(self.faces)
            ],
            "member_offset": [[f, q, ox, oy] for (f, q), (ox, oy) in sorted(self.member_offset.items())],
            "n_original_edges": self.n_original_edges,
            "n_original_faces": self.n_original_faces,
            "next_edge_id": self.next_edge_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ColorCodeLattice":
        if data.get("schema") != LATTICE_SCHEMA:
            raise ValueError(f"unsupported lattice schema {data.get('schema')!r}")
        lat = cls(Geometry.parse(data["geometry"]), int(data["L"]))
        lat.n_qubits = data["n_qubits"]
        lat.cell_size = data["cell_size"]
        lat.qubit_cell = [tuple(c) for c in data["qubit_cell"]]
        lat.nbr = [[None, None, None] if a else None for a in data["alive"]]
        for rec in data["edges"]:
            color = Color.parse(rec["color"])
            lat.edges[rec["id"]] = Edge(rec["u"], rec["v"], color, rec["original"])
            if rec["shift"] is not None:
                lat.edge_shift[rec["id"]] = tuple(rec["shift"])
            lat.nbr[rec["u"]][color] = rec["id"]
            lat.nbr[rec["v"]][color] = rec["id"]
        lat.qface = [[None, None, None] if a else None for a in data["alive"]]
        for rec in data["faces"]:
            color = Color.parse(rec["color"])
            lat.faces[rec["id"]] = set(rec["qubits"])
            lat.face_color[rec["id"]] = color
            if rec["home"] is not None:
                lat.face_home[rec["id"]] = tuple(rec["home"])
            for q in rec["qubits"]:
                lat.qface[q][color] = rec["id"]
        lat.member_offset = {(f, q): (ox, oy) for f, q, ox, oy in data["member_offset"]}
        lat.n_original_edges = data["n_original_edges"]
        lat.n_original_faces = data["n_original_faces"]
        lat.next_edge_id = data["next_edge_id"]
        return lat


def _seed_colors(geometry: Geometry, lat: ColorCodeLattice, sizes: dict[int, int]) -> dict[int, Color]:
    if geometry is Geometry.G4612:
        by_size = {4: Color.RED, 12: Color.BLUE, 6: Color.GREEN}
        return {f: by_size[s] for f, s in sizes.items()}
    if geometry is Geometry.G488:
        colors = {f: Color.RED for f, s in sizes.items() if s == 4}
        first_octagon = min(f for f, s in sizes.items() if s == 8)
        colors[first_octagon] = Color.BLUE
        return colors
    faces0 = sorted(lat.qface[0])
    return {faces0[0]: Color.RED, faces0[1]: Color.BLUE, faces0[2]: Color.GREEN}


def _propagate_colors(lat: ColorCodeLattice, colors: dict[int, Color]) -> dict[int, Color]:
    """Every qubit sees three distinct colors; two known faces fix the third."""
    qubits_of: dict[int, list[int]] = {}
    for q, fs in enumerate(lat.qface):
        for f in fs:
            qubits_of.setdefault(f, []).append(q)
    queue = deque(f for f in colors)
    while queue:
        f = queue.popleft()
        for q in qubits_of[f]:
            known = [colors[g] for g in lat.qface[q] if g in colors]
            unknown = [g for g in lat.qface[q] if g not in colors]
            if len(set(known)) != len(known):
                raise UnsupportedSize(f"face coloring conflict at qubit {q}")
            if len(unknown) == 1 and len(known) == 2:
                missing = ({0, 1, 2} - {int(c) for c in known}).pop()
                colors[unknown[0]] = Color(missing)
                queue.append(unknown[0])
    if len(colors) != len(qubits_of):
        raise UnsupportedSize("face coloring does not reach every face")
    for q, fs in enumerate(lat.qface):
        if len({colors[f] for f in fs}) != 3:
            raise UnsupportedSize(f"face coloring does not close periodically (qubit {q})")
    return colors


def build(geometry, L: int) -> ColorCodeLattice:
    """Build the regular color-code lattice on an ``L x L`` torus of unit cells.

    Qubit ids are row-major over cells, ``(y * L + x) * cell_size + site``.
    Raises :class:`UnsupportedSize` when the face coloring cannot close
    (odd ``L`` for 4.8.8) or the torus is too small for faces to be simple.
    """
    geometry = Geometry.parse(geometry)
    if not isinstance(L, int) or L < 2:
        raise UnsupportedSize(f"L must be an integer >= 2, got {L!r}")
    t = _template(geometry)
    lat = ColorCodeLattice(geometry, L)
    n_cell = t.n_sites
    lat.cell_size = n_cell
    lat.n_qubits = n_cell * L * L

    def qid(x: int, y: int, k: int) -> int:
        return ((y % L) * L + (x % L)) * n_cell + k

    lat.qubit_cell = [(x, y, k) for y in range(L) for x in range(L) for k in range(n_cell)]
    lat.nbr = [[None, None, None] for _ in range(lat.n_qubits)]
    lat.qface = [[] for _ in range(lat.n_qubits)]

    n_ftmpl = len(t.faces)
    sizes: dict[int, int] = {}
    for y in range(L):
        for x in range(L):
            for ti, ft in enumerate(t.faces):
                fid = (y * L + x) * n_ftmpl + ti
                members = [qid(x + o[0], y + o[1], k) for k, o in ft.cycle]
                if len(set(members)) != len(members):
                    raise UnsupportedSize(f"L={L} too small: a {ft.size}-gon wraps onto itself")
                lat.faces[fid] = set(members)
                lat.face_home[fid] = (x, y)
                sizes[fid] = ft.size
                for (k, o), q in zip(ft.cycle, members):
                    lat.qface[q].append(fid)
                    lat.member_offset[(fid, q)] = o

    colors = _propagate_colors(lat, _seed_colors(geometry, lat, sizes))
    lat.face_color = colors
    lat.qface = [sorted(fs, key=lambda f: colors[f]) for fs in lat.qface]

    eid = 0
    for y in range(L):
        for x in range(L):
            for et in t.edges:
                u = qid(x, y, et.k1)
                v = qid(x + et.shift[0], y + et.shift[1], et.k2)
                fl, hl = t.half_edge_face[(et.k1, et.k2, et.shift)]
                fr, hr = t.half_edge_face[(et.k2, et.k1, (-et.shift[0], -et.shift[1]))]
                left = ((y + hl[1]) % L * L + (x + hl[0]) % L) * n_ftmpl + fl
                rx, ry = x + et.shift[0] + hr[0], y + et.shift[1] + hr[1]
                right = ((ry % L) * L + (rx % L)) * n_ftmpl + fr
                c = {0, 1, 2} - {int(colors[left]), int(colors[right])}
                if len(c) != 1:
                    raise UnsupportedSize(f"edge {eid} borders two faces of one color")
                color = Color(c.pop())
                if lat.nbr[u][color] is not None or lat.nbr[v][color] is not None:
                    raise UnsupportedSize(f"edge coloring clash at edge {eid}")
                lat.edges[eid] = Edge(u, v, color, True)
                lat.edge_shift[eid] = et.shift
                lat.nbr[u][color] = eid
                lat.nbr[v][color] = eid
                eid += 1
    lat.n_original_edges = eid
    lat.next_edge_id = eid
    lat.n_original_faces = len(lat.faces)
    report = validate(lat)
    if report:
        raise UnsupportedSize(f"L={L} produced an invalid lattice: {report[0].message}")
    return lat


def validate(lat: ColorCodeLattice) -> list[Violation]:
    """Check the trivalent, 3-colored structure; an empty list means valid."""
    out: list[Violation] = []
    for q, row in enumerate(lat.nbr):
        if row is None:
            continue
        for c in COLORS:
            eid = row[c]
            edge = lat.edges.get(eid)
            if edge is None:
                out.append(Violation("trivalence", (q,), f"qubit {q} has no {c.label} edge"))
                continue
            if edge.color != c:
                out.append(Violation("edge-coloring", (q, eid), f"edge {eid} is {edge.color.label}, listed as {c.label} at qubit {q}"))
            if q not in (edge.u, edge.v):
                out.append(Violation("incidence", (q, eid), f"edge {eid} does not touch qubit {q}"))
        fs = lat.qface[q]
        for c in COLORS:
            f = fs[c]
            if f not in lat.faces or lat.face_color[f] != c or q not in lat.faces[f]:
                out.append(Violation("face-incidence", (q, f), f"qubit {q} lacks a consistent {c.label} face"))
    for eid, edge in lat.edges.items():
        for end in (edge.u, edge.v):
            if not lat.is_alive(end) or lat.nbr[end][edge.color] != eid:
                out.append(Violation("edge-coloring", (eid, end), f"edge {eid} not registered as the {edge.color.label} edge of {end}"))
        if not (lat.is_alive(edge.u) and lat.is_alive(edge.v)):
            continue
        for c in COLORS:
            if c == edge.color:
                continue
            if lat.qface[edge.u][c] != lat.qface[edge.v][c]:
                out.append(Violation("face-edge", (eid,), f"edge {eid} endpoints sit in different {c.label} faces"))
    for f, members in lat.faces.items():
        if len(members) < 2 or len(members) % 2:
            out.append(Violation("face-size", (f,), f"face {f} has size {len(members)}"))
        dead = [q for q in members if not lat.is_alive(q)]
        if dead:
            out.append(Violation("face-incidence", (f, *dead), f"face {f} holds removed qubits"))
            continue
        if len(members) >= 2 and len(lat.face_cycle(f)) != len(members):
            out.append(Violation("face-boundary", (f,), f"face {f} boundary is not a single cycle"))
    n = lat.n_alive()
    if 2 * len(lat.edges) != 3 * n:
        out.append(Violation("euler", (), f"E={len(lat.edges)} but 3N/2={3 * n / 2}"))
    if n - len(lat.edges) + len(lat.faces) != 0:
        out.append(Violation("euler", (), "V - E + F != 0"))
    if lat.encoded_qubits() != 4:
        out.append(Violation("encoded", (), f"k={lat.encoded_qubits()} != 4"))
    return out


def shrunk(lat: ColorCodeLattice, color) -> ShrunkLattice:
    """Per-color graph: faces of ``color`` joined by edges of ``color``.

    Shifts are only known for original edges; edges added by corrections get
    a zero shift and should not be used for winding detection.
    """
    color = Color.parse(color)
    nodes = sorted(f for f, c in lat.face_color.items() if c == color)
    edges = []
    for eid in lat.edges_of_color(color):
        e = lat.edges[eid]
        a = lat.qface[e.u][color]
        b = lat.qface[e.v][color]
        shift = (0, 0)
        if eid in lat.edge_shift and (a, e.u) in lat.member_offset and (b, e.v) in lat.member_offset:
            d = lat.edge_shift[eid]
            oa = lat.member_offset[(a, e.u)]
            ob = lat.member_offset[(b, e.v)]
            shift = (d[0] - ob[0] + oa[0], d[1] - ob[1] + oa[1])
        edges.append(ShrunkEdge(len(edges), a, b, eid, shift))
    return ShrunkLattice(color, nodes, edges, lat.L)


def face_matrix(lat: ColorCodeLattice) -> BitMatrix:
    """Qubit-by-face incidence over GF(2); columns follow sorted alive face ids."""
    fids = sorted(lat.faces)
    col = {f: j for j, f in enumerate(fids)}
    rows = [0] * lat.n_qubits
    for f, members in lat.faces.items():
        bit = 1 << col[f]
        for q in members:
            rows[q] |= bit
    return BitMatrix(rows, len(fids))


def _winding_path(sl: ShrunkLattice, start: int, target: tuple[int, int]) -> list[ShrunkEdge]:
    """Shortest walk in the covering plane from ``start`` to its translate by ``target``."""
    adj: dict[int, list[tuple[ShrunkEdge, int, tuple[int, int]]]] = {n: [] for n in sl.nodes}
    for e in sl.edges:
        adj[e.a].append((e, e.b, e.shift))
        adj[e.b].append((e, e.a, (-e.shift[0], -e.shift[1])))
    origin = (start, (0, 0))
    goal = (start, target)
    prev: dict = {origin: None}
    queue = deque([origin])
    limit = 4 * sl.L
    while queue:
        node, pos = queue.popleft()
        if (node, pos) == goal:
            break
        for e, n, s in adj[node]:
            p = (pos[0] + s[0], pos[1] + s[1])
            if abs(p[0]) > limit or abs(p[1]) > limit:
                continue
            key = (n, p)
            if key not in prev:
                prev[key] = ((node, pos), e)
                queue.append(key)
    if goal not in prev:
        raise RuntimeError("no winding path found")
    path = []
    cur = goal
    while prev[cur] is not None:
        parent, e = prev[cur]
        path.append(e)
        cur = parent
    return path[::-1]


def logical_representatives(lat: ColorCodeLattice) -> list[LogicalRepresentative]:
    """Four independent string logicals: {red, blue} x {horizontal, vertical}.

    Each support is the endpoint set (mod 2) of a closed wrapping walk of
    same-color edges.  The green strings are generated by these and faces.
    """
    reps = []
    q = 1
    for color in (Color.RED, Color.BLUE):
        sl = shrunk(lat, color)
        start = sl.nodes[0]
        for direction, target in ((Direction.HORIZONTAL, (lat.L, 0)), (Direction.VERTICAL, (0, lat.L))):
            support: set[int] = set()
            for e in _winding_path(sl, start, target):
                edge = lat.edges[e.original_edge]
                support ^= {edge.u, edge.v}
            reps.append(LogicalRepresentative(q, color, direction, frozenset(support)))
            q += 1
    return reps


def string_support(lat: ColorCodeLattice, color, direction: Direction) -> frozenset:
    """Support of a wrapping string of any color (used to check the green redundancy)."""
    color = Color.parse(color)
    sl = shrunk(lat, color)
    target = (lat.L, 0) if direction is Direction.HORIZONTAL else (0, lat.L)
    support: set[int] = set()
    for e in _winding_path(sl, sl.nodes[0], target):
        edge = lat.edges[e.original_edge]
        support ^= {edge.u, edge.v}
    return frozenset(support)


def string_distance(lat: ColorCodeLattice) -> int:
    """Weight of the lightest single-color string that winds the torus.

    Each edge of a shortest winding cycle in a shrunk lattice carries two
    qubits, and distinct edges of one color share none.
    """
    best = None
    for color in COLORS:
        sl = shrunk(lat, color)
        adj: dict[int, list[tuple[int, tuple[int, int]]]] = {n: [] for n in sl.nodes}
        for e in sl.edges:
            adj[e.a].append((e.b, e.shift))
            adj[e.b].append((e.a, (-e.shift[0], -e.shift[1])))
        for start in sl.nodes:
            depth = {(start, (0, 0)): 0}
            queue = deque([(start, (0, 0))])
            while queue:
                node, pos = queue.popleft()
                d = depth[(node, pos)]
                if best is not None and 2 * (d + 1) >= best:
                    break
                for n, s in adj[node]:
                    key = (n, (pos[0] + s[0], pos[1] + s[1]))
                    if key in depth:
                        continue
                    if n == start and key[1] != (0, 0):
                        best = 2 * (d + 1)
                        queue.clear()
                        break
                    depth[key] = d + 1
                    queue.append(key)
    return best
