"""Exact series coefficients of the erased-edge fraction r(p).

Every quantity here is a :class:`fractions.Fraction`; floats only appear in
:func:`r_of_p` and :func:`analytic_threshold`.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .lattice import COLORS, Color, ColorCodeLattice, Geometry, UnsupportedSize, build
from .protocol import erased_totals

R1 = Fraction(5, 3)
# two single-step corrections cannot share or rewire an edge beyond this distance
PAIR_RANGE = 3


class MissingSubset(KeyError):
    pass


class LatticeTooSmall(ValueError):
    pass


class NoBracket(ValueError):
    pass


@dataclass(frozen=True)
class InstanceRecord:
    instance: tuple[int, ...]
    R: Fraction
    E: Fraction


@dataclass(frozen=True)
class CoefficientRow:
    ell: int
    I: int
    R_bar: Fraction
    E_bar: Fraction
    alpha: Fraction


@dataclass
class CoefficientTable:
    geometry: Geometry
    color: Color
    rows: list[CoefficientRow] = field(default_factory=list)

    @property
    def alphas(self) -> list[Fraction]:
        return [r.alpha for r in self.rows]

    def row(self, ell: int) -> CoefficientRow:
        return self.rows[ell - 1]

    @property
    def ell_max(self) -> int:
        return len(self.rows)

    @classmethod
    def from_alphas(cls, alphas: Iterable, geometry=Geometry.G488, color=Color.RED) -> "CoefficientTable":
        """Bare table for evaluation only (I, R and E left as placeholders)."""
        rows = [CoefficientRow(ell, 0, Fraction(0), Fraction(0), Fraction(a)) for ell, a in enumerate(alphas, 1)]
        return cls(Geometry.parse(geometry), Color.parse(color), rows)


def energy(instance: Iterable[int], R_lookup: Mapping | Callable) -> Fraction:
    """Interaction energy by inclusion-exclusion over all subsets of ``instance``.

    ``R_lookup`` maps frozensets to exact R values (or is a callable).
    Single-loss subsets default to R1 and the empty set to zero.
    """
    inst = tuple(sorted(set(instance)))
    n = len(inst)
    get = R_lookup if callable(R_lookup) else None
    total = Fraction(0)
    for size in range(1, n + 1):
        sign = -1 if (n - size) % 2 else 1
        for sub in itertools.combinations(inst, size):
            key = frozenset(sub)
            if get is not None:
                value = get(key)
            elif key in R_lookup:
                value = R_lookup[key]
            elif size == 1:
                value = R1
            else:
                raise MissingSubset(sorted(key))
            total += sign * Fraction(value)
    return total


def reconstruct_R(instance: Iterable[int], E_lookup: Mapping) -> Fraction:
    """Inverse of :func:`energy`: R of an instance as the sum of its subset energies."""
    inst = tuple(sorted(set(instance)))
    total = Fraction(0)
    for size in range(1, len(inst) + 1):
        for sub in itertools.combinations(inst, size):
            key = frozenset(sub)
            if key in E_lookup:
                total += E_lookup[key]
            elif size == 1:
                total += R1
            else:
                raise MissingSubset(sorted(key))
    return total


def patch(lat: ColorCodeLattice, center: int, ell: int, margin: int = 3) -> set[int]:
    """Qubits within graph distance ``3 (ell - 1)`` of ``center``.

    The ball of radius ``3 (ell - 1) + margin`` must not meet itself around
    the torus, so corrections near the rim see the infinite-lattice
    neighbourhood.
    """
    radius = 3 * (ell - 1)
    if lat.ball_wraps(center, radius + margin):
        raise LatticeTooSmall(
            f"L={lat.L} too small for a radius-{radius} patch on {lat.geometry.label}"
        )
    return set(lat.ball(center, radius))


class _RCache:
    """Exact R values for all colors, computed on demand and memoised."""

    def __init__(self, lat: ColorCodeLattice, pair_range: int | None = PAIR_RANGE):
        self.lat = lat
        self.pair_range = pair_range
        self.values: dict[frozenset, tuple[Fraction, Fraction, Fraction]] = {}
        self._dist: dict[int, dict[int, int]] = {}
        self.computed = 0

    def _close(self, a: int, b: int) -> bool:
        if a not in self._dist:
            self._dist[a] = self.lat.ball(a, self.pair_range)
        return b in self._dist[a]

    def get(self, key: frozenset) -> tuple[Fraction, Fraction, Fraction]:
        hit = self.values.get(key)
        if hit is not None:
            return hit
        if len(key) == 1:
            value = (R1, R1, R1)
        elif len(key) == 2 and self.pair_range is not None and not self._close(*sorted(key)):
            value = (2 * R1, 2 * R1, 2 * R1)
        else:
            denom, totals = erased_totals(self.lat, key)
            value = tuple(Fraction(t, denom) for t in totals)
            self.computed += 1
        self.values[key] = value
        return value


def fully_interacting_all(
    lat: ColorCodeLattice,
    center: int,
    ell_max: int,
    pair_range: int | None = PAIR_RANGE,
    radius: int | None = None,
) -> dict[Color, list[InstanceRecord]]:
    """Instances containing ``center`` with 2..ell_max losses and nonzero energy, per color.

    ``pair_range`` pre-filters two-loss instances farther apart than the
    interaction range as separable (exactly zero energy).  ``radius`` widens
    the patch beyond the default ``3 (ell - 1)``.
    """
    if ell_max > 4:
        warnings.warn(f"ell_max={ell_max}: combinatorial cost grows steeply", RuntimeWarning, stacklevel=2)
    cache = _RCache(lat, pair_range)
    out: dict[Color, list[InstanceRecord]] = {c: [] for c in COLORS}
    for ell in range(2, ell_max + 1):
        if radius is None:
            region = patch(lat, center, ell)
        else:
            if lat.ball_wraps(center, radius + 3):
                raise LatticeTooSmall(f"L={lat.L} too small for radius {radius}")
            region = set(lat.ball(center, radius))
        others = sorted(region - {center})
        for rest in itertools.combinations(others, ell - 1):
            inst = (center,) + rest
            key = frozenset(inst)
            R_all = cache.get(key)
            for c in COLORS:
                E = energy(inst, lambda k, c=c: cache.get(k)[c])
                if E != 0:
                    out[c].append(InstanceRecord(tuple(sorted(inst)), R_all[c], E))
    return out


def enumerate_fully_interacting(lat: ColorCodeLattice, center: int, ell_max: int, color) -> list[InstanceRecord]:
    return fully_interacting_all(lat, center, ell_max)[Color.parse(color)]


def table_from_records(geometry: Geometry, color: Color, records: list[InstanceRecord], ell_max: int) -> CoefficientTable:
    rows = [CoefficientRow(1, 1, R1, R1, 2 * R1)]
    for ell in range(2, ell_max + 1):
        recs = [r for r in records if len(r.instance) == ell]
        I = len(recs)
        if I == 0:
            rows.append(CoefficientRow(ell, 0, Fraction(0), Fraction(0), Fraction(0)))
            continue
        R_bar = sum((r.R for r in recs), Fraction(0)) / I
        E_sum = sum((r.E for r in recs), Fraction(0))
        rows.append(CoefficientRow(ell, I, R_bar, E_sum / I, Fraction(2, ell) * E_sum))
    return CoefficientTable(geometry, color, rows)


def coefficient_tables(lat: ColorCodeLattice, ell_max: int = 3, center: int = 0) -> dict[Color, CoefficientTable]:
    """All three color tables from a single enumeration pass."""
    recs = fully_interacting_all(lat, center, ell_max)
    return {c: table_from_records(lat.geometry, c, recs[c], ell_max) for c in COLORS}


def coefficient_table(lat: ColorCodeLattice, color, ell_max: int = 3, center: int = 0) -> CoefficientTable:
    return coefficient_tables(lat, ell_max, center)[Color.parse(color)]


def minimal_size(geometry, ell_max: int) -> int:
    """Smallest supported L whose torus fits the ``ell_max`` patch."""
    geometry = Geometry.parse(geometry)
    L = 2
    while True:
        try:
            lat = build(geometry, L)
        except UnsupportedSize:
            L += 1
            continue
        if not lat.ball_wraps(0, 3 * (ell_max - 1) + 3):
            return L
        L += 1


def r_of_p(table: CoefficientTable, p: float) -> float:
    """Truncated series sum of alpha_l p^l."""
    return sum(float(a) * p ** ell for ell, a in enumerate(table.alphas, 1))


def analytic_threshold(table: CoefficientTable, r_c: float, hi: float = 0.6, xtol: float = 1e-10) -> float:
    """Loss rate where the truncated r(p) reaches ``r_c`` (bisection on [0, hi])."""
    if not 0.0 < r_c < 1.0:
        raise ValueError(f"r_c must lie in (0, 1), got {r_c}")
    if r_of_p(table, hi) < r_c:
        raise NoBracket(f"r({hi}) = {r_of_p(table, hi):.4f} < r_c = {r_c:.4f}")
    from scipy.optimize import bisect  # deferred: scipy dominates start-up time

    root = bisect(lambda p: r_of_p(table, p) - r_c, 0.0, hi, xtol=xtol)
    grid = [root * k / 200 for k in range(201)]
    values = [r_of_p(table, p) for p in grid]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise NoBracket("r(p) is not strictly increasing below the root")
    return root
