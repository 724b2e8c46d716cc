"""Linear algebra over GF(2) and the logical-existence checks.

Rows are stored as Python ints used as bitsets (bit ``j`` is column ``j``),
which keeps XOR of long sparse rows cheap without any compiled helper.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class DimensionMismatch(ValueError):
    pass


class BitMatrix:
    """Dense binary matrix with bit-packed rows."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows: Sequence[int], ncols: int):
        self.rows = list(rows)
        self.ncols = ncols

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        a = np.asarray(array, dtype=np.uint8) & 1
        rows = [int("".join("1" if b else "0" for b in row[::-1]) or "0", 2) for row in a]
        return cls(rows, a.shape[1])

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls([1 << i for i in range(n)], n)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    out[i, j] = 1
                r >>= 1
                j += 1
        return out

    def column_weights(self) -> list[int]:
        return [sum((r >> j) & 1 for r in self.rows) for j in range(self.ncols)]

    def row_weights(self) -> list[int]:
        return [bin(r).count("1") for r in self.rows]

    def restrict_rows(self, keep: Iterable[int]) -> "BitMatrix":
        """Submatrix of the given row indices (the ``r o F`` product without zero rows)."""
        return BitMatrix([self.rows[i] for i in keep], self.ncols)

    def with_column(self, vec: int) -> "BitMatrix":
        """Append a column whose entries are the bits of ``vec`` (bit i = row i)."""
        rows = [r | (((vec >> i) & 1) << self.ncols) for i, r in enumerate(self.rows)]
        return BitMatrix(rows, self.ncols + 1)

    def mul_vec(self, x: int) -> int:
        """Return ``A x`` as a row bitset."""
        out = 0
        for i, r in enumerate(self.rows):
            if bin(r & x).count("1") & 1:
                out |= 1 << i
        return out

    def transpose_mul(self, v: int) -> int:
        """Return ``v^T A`` as a column bitset."""
        out = 0
        i = 0
        while v:
            if v & 1:
                out ^= self.rows[i]
            v >>= 1
            i += 1
        return out

    def rank(self) -> int:
        return rank(self.rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitMatrix) and self.ncols == other.ncols and self.rows == other.rows

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols})"


class EchelonBasis:
    """Incrementally grown row basis keyed by lowest set bit."""

    __slots__ = ("pivots",)

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, row: int) -> int:
        pivots = self.pivots
        while row:
            low = row & -row
            p = pivots.get(low)
            if p is None:
                return row
            row ^= p
        return 0

    def insert(self, row: int) -> bool:
        """Add a row; True if it raised the rank."""
        row = self.reduce(row)
        if not row:
            return False
        self.pivots[row & -row] = row
        return True


def rank(rows: Iterable[int]) -> int:
    basis = EchelonBasis()
    for r in rows:
        basis.insert(r)
    return len(basis)


def _as_bits(b) -> int:
    if isinstance(b, (int, np.integer)):
        return int(b)
    out = 0
    for i, bit in enumerate(np.asarray(b, dtype=np.uint8).ravel()):
        if bit & 1:
            out |= 1 << i
    return out


def _to_array(x: int, n: int) -> np.ndarray:
    return np.array([(x >> j) & 1 for j in range(n)], dtype=np.uint8)


def solve_bits(rows: Sequence[int], ncols: int, rhs: int) -> int | None:
    """Solve ``A x = b`` with ``A`` given by row bitsets; ``b`` bit i is row i.

    Returns a solution bitset over columns, or ``None`` if inconsistent.
    """
    flag = 1 << ncols
    pivots: dict[int, int] = {}
    for i, r in enumerate(rows):
        row = r | (flag if (rhs >> i) & 1 else 0)
        while row & (flag - 1):
            low = row & -row
            p = pivots.get(low)
            if p is None:
                break
            row ^= p
        if row & (flag - 1):
            pivots[row & -row] = row
        elif row:
            return None
    # back substitution: process pivots from the highest column down
    x = 0
    for low in sorted(pivots, reverse=True):
        row = pivots[low]
        body = row & (flag - 1) & ~low
        bit = ((row >> ncols) & 1) ^ (bin(body & x).count("1") & 1)
        if bit:
            x |= low
    return x


def solve(A: BitMatrix, b) -> np.ndarray | None:
    """Return some ``x`` with ``A x = b`` over GF(2), or ``None`` if none exists."""
    b_arr = np.asarray(b).ravel() if not isinstance(b, (int, np.integer)) else None
    if b_arr is not None and b_arr.size != A.nrows:
        raise DimensionMismatch(f"rhs has length {b_arr.size}, matrix has {A.nrows} rows")
    x = solve_bits(A.rows, A.ncols, _as_bits(b))
    return None if x is None else _to_array(x, A.ncols)


def _support_bits(support: Iterable[int]) -> int:
    out = 0
    for q in support:
        out |= 1 << q
    return out


def class_intact(F: BitMatrix, support: Iterable[int], removed: Iterable[int]) -> bool:
    """Can the logical on ``support`` be deformed by faces to avoid ``removed``?

    Solves ``(r o F) x = r o s``; only rows of removed qubits carry equations.
    """
    removed = sorted(set(removed))
    s = _support_bits(support)
    rhs = 0
    for i, q in enumerate(removed):
        if (s >> q) & 1:
            rhs |= 1 << i
    return solve_bits([F.rows[q] for q in removed], F.ncols, rhs) is not None


def intact_classes(F: BitMatrix, supports: Sequence[Iterable[int]], removed: Iterable[int]) -> list[bool]:
    """Per-class solvability, all right-hand sides eliminated in one pass."""
    removed = sorted(set(removed))
    n = F.ncols
    k = len(supports)
    sbits = [_support_bits(s) for s in supports]
    body_mask = (1 << n) - 1
    pivots: dict[int, int] = {}
    bad = 0
    for q in removed:
        row = F.rows[q]
        for c, s in enumerate(sbits):
            if (s >> q) & 1:
                row |= 1 << (n + c)
        while row & body_mask:
            low = row & -row
            p = pivots.get(low)
            if p is None:
                break
            row ^= p
        if row & body_mask:
            pivots[row & -row] = row
        else:
            bad |= row >> n
    return [not ((bad >> c) & 1) for c in range(k)]


def info_intact(F: BitMatrix, representatives, removed: Iterable[int]) -> bool:
    """Every independent logical class keeps a representative off ``removed``."""
    supports = [getattr(r, "support", r) for r in representatives]
    return all(intact_classes(F, supports, removed))


def contains_logical(F: BitMatrix, removed: Iterable[int]) -> bool:
    """Does ``removed`` hold the full support of some nontrivial logical?

    Compares the number of face-commuting vectors supported on ``removed``
    (``|r| - rank F_r``) with the number of face products supported there
    (``rank F - rank F_notr``).
    """
    removed = set(removed)
    inside = [F.rows[q] for q in removed]
    outside = [F.rows[q] for q in range(F.nrows) if q not in removed]
    commuting = len(inside) - rank(inside)
    stabilizers = rank(F.rows) - rank(outside)
    return commuting > stabilizers


def first_logical_prefix(F: BitMatrix, order: Sequence[int]) -> int | None:
    """Smallest ``t`` such that ``order[:t]`` contains a logical, else ``None``.

    One forward and one backward incremental rank sweep, so the whole
    removal sequence costs two eliminations instead of one per prefix.
    """
    n = len(order)
    total_rank = rank(F.rows)
    order_set = set(order)
    inside_rank = [0] * (n + 1)
    basis = EchelonBasis()
    for t, q in enumerate(order):
        inside_rank[t + 1] = inside_rank[t] + basis.insert(F.rows[q])
    outside_rank = [0] * (n + 1)
    basis = EchelonBasis()
    for q in range(F.nrows):
        if q not in order_set:
            basis.insert(F.rows[q])
    outside_rank[n] = len(basis)
    for t in range(n - 1, -1, -1):
        outside_rank[t] = outside_rank[t + 1] + basis.insert(F.rows[order[t]])
    for t in range(n + 1):
        if t - inside_rank[t] > total_rank - outside_rank[t]:
            return t
    return None
