import itertools
import json

import pytest

from colorloss import gf2
from colorloss.lattice import (
    COLORS,
    Color,
    ColorCodeLattice,
    Direction,
    Edge,
    Geometry,
    UnsupportedSize,
    build,
    face_matrix,
    logical_representatives,
    shrunk,
    string_distance,
    string_support,
    validate,
)

CASES = [("488", 2), ("488", 4), ("666", 2), ("666", 3), ("666", 4), ("4612", 2), ("4612", 3), ("4612", 4)]
CELL = {"488": 4, "666": 6, "4612": 12}
FACE_SIZES = {"488": {4: 1, 8: 1}, "666": {6: 3}, "4612": {4: 3, 6: 2, 12: 1}}


@pytest.fixture(scope="module", params=CASES, ids=lambda c: f"{c[0]}-L{c[1]}")
def lat(request):
    g, L = request.param
    return build(g, L)


def test_fresh_lattice_is_valid(lat):
    assert validate(lat) == []


def test_counts(lat):
    N = lat.n_qubits
    g = lat.geometry.value
    assert N == CELL[g] * lat.L ** 2
    assert len(lat.edges) * 2 == 3 * N
    assert N - len(lat.edges) + len(lat.faces) == 0
    assert lat.encoded_qubits() == 4


def test_face_sizes_per_cell(lat):
    g = lat.geometry.value
    sizes: dict[int, int] = {}
    for members in lat.faces.values():
        sizes[len(members)] = sizes.get(len(members), 0) + 1
    assert sizes == {s: n * lat.L ** 2 for s, n in FACE_SIZES[g].items()}


def test_color_classes_are_perfect_matchings(lat):
    for c in COLORS:
        ids = lat.edges_of_color(c)
        assert len(ids) == lat.n_qubits // 2
        touched = [q for e in ids for q in (lat.edges[e].u, lat.edges[e].v)]
        assert sorted(touched) == list(range(lat.n_qubits))


def test_adjacent_faces_differ_in_color(lat):
    for eid, e in lat.edges.items():
        fu = set(lat.qface[e.u])
        fv = set(lat.qface[e.v])
        shared = fu & fv
        assert len(shared) == 2
        colors = {lat.face_color[f] for f in shared}
        assert e.color not in colors and len(colors) == 2


def test_488_qubit_touches_one_square_two_octagons():
    lat = build("488", 2)
    for q in range(lat.n_qubits):
        assert sorted(len(lat.faces[f]) for f in lat.qface[q]) == [4, 8, 8]


def test_488_odd_size_rejected():
    with pytest.raises(UnsupportedSize):
        build("488", 3)


@pytest.mark.parametrize("L", [0, 1, -2])
def test_tiny_sizes_rejected(L):
    with pytest.raises(UnsupportedSize):
        build("666", L)


def test_deterministic_numbering():
    a, b = build("4612", 3), build("4612", 3)
    assert a.to_dict() == b.to_dict()
    assert a.qubit_cell[13] == (1, 0, 1)


def test_recolored_edge_is_reported():
    lat = build("666", 3)
    e = lat.edges[0]
    other = Color((e.color + 1) % 3)
    lat.edges[0] = Edge(e.u, e.v, other, e.original)
    kinds = {v.kind for v in validate(lat)}
    assert "edge-coloring" in kinds or "trivalence" in kinds


def test_dump_round_trip(lat):
    data = json.loads(json.dumps(lat.to_dict()))
    again = ColorCodeLattice.from_dict(data)
    assert again.to_dict() == lat.to_dict()
    assert validate(again) == []


def test_shrunk_bijection_and_counts(lat):
    for c in COLORS:
        sl = shrunk(lat, c)
        assert len(sl.nodes) == sum(1 for col in lat.face_color.values() if col == c)
        assert sl.n_edges == lat.n_qubits // 2
        assert sorted(e.original_edge for e in sl.edges) == lat.edges_of_color(c)


def test_488_red_shrunk_is_square_lattice():
    sl = shrunk(build("488", 4), "red")
    assert sl.parallel_pairs() == 0
    assert set(sl.degrees().values()) == {4}
    for c in ("blue", "green"):
        other = shrunk(build("488", 4), c)
        assert other.parallel_pairs() > 0


def test_4612_shrunk_connectivities():
    lat = build("4612", 4)
    red, blue, green = (shrunk(lat, c) for c in COLORS)
    assert red.parallel_pairs() == 0 and set(red.degrees().values()) == {4}
    # triangular with every bond doubled
    assert set(blue.degrees().values()) == {12} and blue.parallel_pairs() == blue.n_edges // 2
    # hexagonal with every bond doubled
    assert set(green.degrees().values()) == {6} and green.parallel_pairs() == green.n_edges // 2


def test_face_matrix_weights_and_rank(lat):
    F = face_matrix(lat)
    assert F.shape == (lat.n_qubits, len(lat.faces))
    assert sorted(F.column_weights()) == sorted(len(m) for m in lat.faces.values())
    assert set(F.row_weights()) == {3}
    assert F.rank() == len(lat.faces) - 2


def test_representatives_commute_and_are_independent(lat):
    F = face_matrix(lat)
    reps = logical_representatives(lat)
    assert len(reps) == 4
    assert {(r.color, r.direction) for r in reps} == {(c, d) for c in (Color.RED, Color.BLUE) for d in Direction}
    for r in reps:
        bits = sum(1 << q for q in r.support)
        assert F.transpose_mul(bits) == 0
    base = F.rank()
    extended = gf2.rank(_columns_as_rows(F) + [sum(1 << q for q in r.support) for r in reps])
    assert extended == base + 4


def _columns_as_rows(F):
    cols = [0] * F.ncols
    for i, row in enumerate(F.rows):
        j = 0
        while row:
            if row & 1:
                cols[j] |= 1 << i
            row >>= 1
            j += 1
    return cols


@pytest.mark.parametrize("g,L", [("666", 3), ("488", 4), ("4612", 3)])
def test_green_string_is_red_times_blue(g, L):
    lat = build(g, L)
    F = face_matrix(lat)
    for d in Direction:
        green = string_support(lat, Color.GREEN, d)
        red = string_support(lat, Color.RED, d)
        blue = string_support(lat, Color.BLUE, d)
        target = 0
        for q in green ^ red ^ blue:
            target |= 1 << q
        # target must lie in the span of the face columns
        assert gf2.solve_bits(F.rows, F.ncols, target) is not None


def test_ball_and_wrap_detection():
    lat = build("666", 6)
    ball = lat.ball(0, 3)
    assert ball[0] == 0 and max(ball.values()) == 3
    assert len(ball) == 1 + 3 + 6 + 9
    assert not lat.ball_wraps(0, 6)
    assert build("666", 2).ball_wraps(0, 6)


def test_string_distance_bounds_representatives(lat):
    d = string_distance(lat)
    assert d % 2 == 0
    assert d <= min(len(r.support) for r in logical_representatives(lat))


@pytest.mark.parametrize("g", ["488", "666"])
def test_string_distance_is_code_distance_on_small_tori(g):
    lat = build(g, 2)
    F = face_matrix(lat)
    d = string_distance(lat)
    assert d == 4
    lighter = (s for k in range(1, d) for s in itertools.combinations(range(lat.n_qubits), k))
    assert not any(gf2.contains_logical(F, s) for s in lighter)
    assert any(gf2.contains_logical(F, s) for s in itertools.combinations(range(lat.n_qubits), d))


def test_string_distance_grows_with_size():
    assert [string_distance(build("666", L)) for L in (3, 4, 5)] == [6, 8, 10]
