import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorloss import gf2
from colorloss.gf2 import BitMatrix, DimensionMismatch
from colorloss.lattice import Color, Direction, build, face_matrix, logical_representatives, string_support


def _rank_dense(a):
    a = a.copy() % 2
    r = 0
    rows, cols = a.shape
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i, c]), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def test_dense_round_trip():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, size=(7, 11), dtype=np.uint8)
    m = BitMatrix.from_dense(a)
    assert np.array_equal(m.to_dense(), a)
    assert m.shape == (7, 11)


def test_identity_solve():
    b = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
    assert np.array_equal(gf2.solve(BitMatrix.identity(5), b), b)


def test_zero_rhs():
    rng = np.random.default_rng(1)
    a = BitMatrix.from_dense(rng.integers(0, 2, size=(6, 9)))
    x = gf2.solve(a, np.zeros(6, dtype=np.uint8))
    assert x is not None and a.mul_vec(int("".join(map(str, x[::-1])), 2)) == 0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gf2.solve(BitMatrix.identity(3), np.zeros(4, dtype=np.uint8))


def _bits(x):
    return sum(int(v) << i for i, v in enumerate(x))


@pytest.mark.parametrize("seed", range(5))
def test_planted_solution(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=(50, 70), dtype=np.uint8)
    x0 = rng.integers(0, 2, size=70, dtype=np.uint8)
    b = (a.astype(int) @ x0) % 2
    A = BitMatrix.from_dense(a)
    x = gf2.solve(A, b)
    assert x is not None
    assert np.array_equal((a.astype(int) @ x) % 2, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_solver_soundness_and_rank(m, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
    b = rng.integers(0, 2, size=m, dtype=np.uint8)
    A = BitMatrix.from_dense(a)
    assert A.rank() == _rank_dense(a)
    x = gf2.solve(A, b)
    aug = np.column_stack([a, b])
    if x is None:
        assert _rank_dense(aug) > _rank_dense(a)
    else:
        assert np.array_equal((a.astype(int) @ x) % 2, b)


def test_transpose_mul_and_with_column():
    a = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8)
    A = BitMatrix.from_dense(a)
    assert A.transpose_mul(0b11) == 0b011
    B = A.with_column(0b10)
    assert np.array_equal(B.to_dense(), np.array([[1, 0, 1, 0], [0, 1, 1, 1]]))


@pytest.fixture(scope="module")
def hex3():
    lat = build("666", 3)
    return lat, face_matrix(lat), logical_representatives(lat)


def test_empty_removal(hex3):
    lat, F, reps = hex3
    assert gf2.info_intact(F, reps, [])
    assert not gf2.contains_logical(F, [])
    assert all(gf2.intact_classes(F, [r.support for r in reps], []))


def test_all_removed(hex3):
    lat, F, reps = hex3
    everything = range(lat.n_qubits)
    assert not gf2.info_intact(F, reps, everything)
    assert gf2.contains_logical(F, everything)


def test_single_face_is_not_logical(hex3):
    lat, F, reps = hex3
    face = next(iter(lat.faces.values()))
    assert not gf2.contains_logical(F, face)
    assert gf2.info_intact(F, reps, face)


def test_red_string_kills_information(hex3):
    lat, F, reps = hex3
    red = string_support(lat, Color.RED, Direction.HORIZONTAL)
    assert gf2.contains_logical(F, red)
    assert not gf2.info_intact(F, reps, red)
    # any class whose string crosses the removed one is broken
    broken = [r for r in reps if not gf2.class_intact(F, r.support, red)]
    assert broken


def _brute_intact(lat, F, support, removed):
    """Exhaustive search over face subsets of the faces touching the removed set."""
    removed = set(removed)
    cols = {}
    for f, members in lat.faces.items():
        if members & removed:
            cols[f] = members
    fids = list(cols)
    s = set(support)
    for k in range(len(fids) + 1):
        for combo in itertools.combinations(fids, k):
            t = set(s)
            for f in combo:
                t ^= cols[f]
            if not t & removed:
                return True
    return False


def test_single_step_removal_keeps_all_classes(hex3):
    lat, F, reps = hex3
    for c in (Color.RED, Color.BLUE, Color.GREEN):
        removed = {7, lat.neighbour(7, c)}
        for r in reps:
            assert gf2.class_intact(F, r.support, removed)
            assert _brute_intact(lat, F, r.support, removed)


def test_class_intact_matches_brute_force():
    lat = build("666", 2)
    F = face_matrix(lat)
    reps = logical_representatives(lat)
    rng = np.random.default_rng(3)
    for _ in range(40):
        removed = set(int(q) for q in rng.choice(lat.n_qubits, size=int(rng.integers(1, 6)), replace=False))
        for r in reps:
            assert gf2.class_intact(F, r.support, removed) == _brute_intact(lat, F, r.support, removed)


def test_other_type_generators_never_help(hex3):
    # multiplying a pure-type string by faces of the other Pauli type only grows
    # its support, so its intersection with the removed set cannot shrink
    lat, F, reps = hex3
    rng = np.random.default_rng(9)
    for r in reps:
        removed = set(int(q) for q in rng.choice(lat.n_qubits, size=6, replace=False))
        before = set(r.support) & removed
        for members in lat.faces.values():
            # support of the product of an X string and a Z face: union of supports
            after = (set(r.support) | members) & removed
            assert before <= after


def test_monotone_in_removed_set(hex3):
    lat, F, reps = hex3
    rng = np.random.default_rng(4)
    order = [int(q) for q in rng.permutation(lat.n_qubits)]
    states = [gf2.info_intact(F, reps, order[:t]) for t in range(len(order) + 1)]
    first_bad = states.index(False)
    assert all(states[:first_bad]) and not any(states[first_bad:])


def test_first_logical_prefix_matches_prefix_checks(hex3):
    lat, F, reps = hex3
    rng = np.random.default_rng(8)
    for _ in range(5):
        order = [int(q) for q in rng.permutation(lat.n_qubits)]
        t = gf2.first_logical_prefix(F, order)
        assert gf2.contains_logical(F, order[:t])
        assert not gf2.contains_logical(F, order[: t - 1])
