"""Monte Carlo estimates of r(p), p_c(L), p_f(L) and their finite-size extrapolation.

Randomness: every sample draws from its own Philox stream keyed by
``(seed, stream tag, geometry, L, sample index)`` through
:class:`numpy.random.SeedSequence`.  Results therefore do not depend on how
samples are spread over worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import gf2
from .lattice import COLORS, Color, ColorCodeLattice, Geometry, ShrunkLattice, build, face_matrix, logical_representatives, shrunk
from .percolation import onset_index
from .protocol import DegenerateCode, TraceWriter, apply_step

NU = 4.0 / 3.0
_GEOM_TAG = {Geometry.G488: 0, Geometry.G666: 1, Geometry.G4612: 2}
_STREAM_R, _STREAM_RUN = 1, 2


class InsufficientPoints(ValueError):
    pass


def sample_rng(seed: int, stream: int, geometry: Geometry, L: int, index: int, extra: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), stream, _GEOM_TAG[geometry], int(L), int(index), int(extra)])
    return np.random.Generator(np.random.Philox(ss))


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("COLORLOSS_THREADS")
        workers = int(env) if env else 1
    return max(1, int(workers))


@dataclass
class _Context:
    """Read-only per-(geometry, L) data shared by all samples."""

    lattice: ColorCodeLattice
    shrunk: dict[Color, ShrunkLattice]
    shrunk_id: dict[Color, dict[int, int]]  # original edge id -> shrunk edge id
    n_color_edges: dict[Color, int]
    _F: gf2.BitMatrix | None = None
    _reps: list | None = None

    @property
    def F(self) -> gf2.BitMatrix:
        if self._F is None:
            self._F = face_matrix(self.lattice)
        return self._F

    @property
    def representatives(self) -> list:
        if self._reps is None:
            self._reps = logical_representatives(self.lattice)
        return self._reps


@lru_cache(maxsize=16)
def context(geometry: Geometry, L: int) -> _Context:
    lat = build(geometry, L)
    sl = {c: shrunk(lat, c) for c in COLORS}
    ids = {c: {e.original_edge: e.id for e in sl[c].edges} for c in COLORS}
    return _Context(lat, sl, ids, {c: sl[c].n_edges for c in COLORS})


def _correct(lat: ColorCodeLattice, lost: int, rng: np.random.Generator, allow_degenerate: bool):
    return apply_step(lat, lost, lat.neighbour(lost, int(rng.integers(3))), allow_degenerate=allow_degenerate)


# -- r(p) -------------------------------------------------------------------


@dataclass
class REstimate:
    p: float
    mean: dict[Color, float]
    stderr: dict[Color, float]
    n: int
    degenerate: int


def _r_samples(args) -> tuple[list[tuple[int, tuple[int, int, int]]], int]:
    geometry, L, p, seed, indices, strict = args
    ctx = context(geometry, L)
    out = []
    degenerate = 0
    for i in indices:
        rng = sample_rng(seed, _STREAM_R, geometry, L, i)
        lat = ctx.lattice.copy()
        lost = np.flatnonzero(rng.random(lat.n_qubits) < p)
        lost = rng.permutation(lost)
        counts = [0, 0, 0]
        hit = False
        try:
            for q in lost:
                q = int(q)
                if lat.nbr[q] is None:
                    continue
                res = _correct(lat, q, rng, allow_degenerate=not strict)
                hit |= res.degenerate
                for c in COLORS:
                    counts[c] += len(res.erased[c])
        except DegenerateCode:
            degenerate += 1
            continue
        degenerate += hit
        out.append((i, tuple(counts)))
    return out, degenerate


def _chunks(n: int, parts: int) -> list[list[int]]:
    parts = max(1, min(parts, n))
    return [list(range(k, n, parts)) for k in range(parts)]


def _map(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def estimate_r_all(
    geometry, L: int, p: float, n_samples: int, seed: int = 0, workers: int | None = None, strict: bool = False
) -> REstimate:
    """Erased-original-edge fraction of all three shrunk lattices at loss rate ``p``.

    ``degenerate`` counts samples that met an isolated qubit pair.  By default
    such a pair is removed and the sample kept; with ``strict`` the sample is
    dropped instead, which empties large lattices at p >= 0.3.
    """
    geometry = Geometry.parse(geometry)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    ctx = context(geometry, L)
    workers = resolve_workers(workers)
    tasks = [(geometry, L, p, seed, idx, strict) for idx in _chunks(n_samples, workers)]
    rows, degenerate = [], 0
    for part, deg in _map(_r_samples, tasks, workers):
        rows.extend(part)
        degenerate += deg
    # fixed summation order keeps the result independent of the worker count
    rows = [counts for _, counts in sorted(rows)]
    mean, err = {}, {}
    for c in COLORS:
        x = np.array([r[c] for r in rows], dtype=float) / ctx.n_color_edges[c]
        mean[c] = float(x.mean()) if len(x) else math.nan
        err[c] = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan
    return REstimate(p, mean, err, len(rows), degenerate)


def estimate_r(
    geometry, L: int, color, p: float, n_samples: int, seed: int = 0, workers: int | None = None, strict: bool = False
) -> tuple[float, float]:
    est = estimate_r_all(geometry, L, p, n_samples, seed, workers, strict)
    c = Color.parse(color)
    return est.mean[c], est.stderr[c]


# -- full loss runs ------------------------------------------------------------


@dataclass
class SampleRun:
    seed: int
    index: int
    geometry: Geometry
    L: int
    order: list[int]
    steps: list[tuple[int, int, int]]  # (loss count t, lost, sacrificed)
    erasures: dict[Color, list[int]]  # shrunk edge ids in erasure order
    erasure_time: dict[Color, list[int]]  # loss count at each erasure
    removal: list[int]
    removal_time: list[int]
    degenerate: int = 0

    @property
    def n_qubits(self) -> int:
        return len(self.order)


def run_sample(geometry, L: int, seed: int, index: int = 0, trace: TraceWriter | None = None) -> SampleRun:
    """Lose every qubit in a random order, correcting each loss as it happens.

    The final isolated pairs are unavoidable in a full run, so they are
    removed and counted rather than raised.
    """
    geometry = Geometry.parse(geometry)
    ctx = context(geometry, L)
    rng = sample_rng(seed, _STREAM_RUN, geometry, L, index)
    lat = ctx.lattice.copy()
    order = [int(q) for q in rng.permutation(lat.n_qubits)]
    erasures = {c: [] for c in COLORS}
    times = {c: [] for c in COLORS}
    removal, removal_time, steps = [], [], []
    degenerate = 0
    for t, q in enumerate(order, 1):
        if lat.nbr[q] is None:
            continue
        res = _correct(lat, q, rng, allow_degenerate=True)
        degenerate += res.degenerate
        steps.append((t, res.lost, res.sacrificed))
        if trace is not None:
            trace.write(res)
        for c in COLORS:
            ids = ctx.shrunk_id[c]
            for eid in res.erased[c]:
                erasures[c].append(ids[eid])
                times[c].append(t)
        removal.extend((res.lost, res.sacrificed))
        removal_time.extend((t, t))
    return SampleRun(seed, index, geometry, L, order, steps, erasures, times, removal, removal_time, degenerate)


def pc_of_run(run: SampleRun, color) -> float:
    """Loss fraction at which the color's shrunk lattice stops wrapping."""
    c = Color.parse(color)
    ctx = context(run.geometry, run.L)
    onset = onset_index(ctx.shrunk[c], run.erasures[c])
    if onset.index == 0:
        return 0.0
    if not onset.complete:
        return 1.0
    return run.erasure_time[c][onset.index - 1] / run.n_qubits


def pf_of_run(run: SampleRun, method: str = "sweep") -> float:
    """Loss fraction at which some logical class loses every representative.

    ``sweep`` uses the containment rank criterion over all removal prefixes
    at once; ``bisect`` searches loss counts with the per-class solvability
    check, relying on monotonicity in the removed set.
    """
    ctx = context(run.geometry, run.L)
    N = run.n_qubits
    if method == "sweep":
        m = gf2.first_logical_prefix(ctx.F, run.removal)
        if m is None:
            return 1.0
        # both qubits of a step leave together
        return run.removal_time[m - 1] / N
    if method == "bisect":
        reps = ctx.representatives

        def broken(t: int) -> bool:
            k = int(np.searchsorted(run.removal_time, t, side="right"))
            return not gf2.info_intact(ctx.F, reps, run.removal[:k])

        if not broken(N):
            return 1.0
        lo, hi = 0, N  # broken(lo) is False, broken(hi) is True
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if broken(mid):
                hi = mid
            else:
                lo = mid
        return hi / N
    raise ValueError(f"unknown method {method!r}")


def sample_pc(geometry, L: int, color, seed: int, index: int = 0) -> float:
    return pc_of_run(run_sample(geometry, L, seed, index), color)


def sample_pf(geometry, L: int, seed: int, index: int = 0, method: str = "sweep") -> float:
    return pf_of_run(run_sample(geometry, L, seed, index), method)


@dataclass
class ThresholdSample:
    index: int
    pc: dict[Color, float]
    pf: float | None
    degenerate: int


def _threshold_samples(args) -> list[ThresholdSample]:
    geometry, L, seed, indices, want_pf = args
    out = []
    for i in indices:
        run = run_sample(geometry, L, seed, i)
        pc = {c: pc_of_run(run, c) for c in COLORS}
        pf = pf_of_run(run) if want_pf else None
        out.append(ThresholdSample(i, pc, pf, run.degenerate))
    return out


@dataclass
class ThresholdPoint:
    L: int
    mean: float
    stderr: float
    n: int

    def to_row(self) -> tuple:
        return (self.L, self.mean, self.stderr, self.n)


def threshold_samples(geometry, L: int, n_samples: int, seed: int = 0, pf: bool = True, workers: int | None = None) -> list[ThresholdSample]:
    geometry = Geometry.parse(geometry)
    context(geometry, L)
    workers = resolve_workers(workers)
    tasks = [(geometry, L, seed, idx, pf) for idx in _chunks(n_samples, workers)]
    samples = [s for part in _map(_threshold_samples, tasks, workers) for s in part]
    return sorted(samples, key=lambda s: s.index)


def summarize(values: Sequence[float], L: int) -> ThresholdPoint:
    x = np.asarray(values, dtype=float)
    err = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan
    return ThresholdPoint(L, float(x.mean()), err, len(x))


# -- finite-size scaling ------------------------------------------------------


@dataclass
class ScalingEstimate:
    points: list[ThresholdPoint]
    nu: float
    intercept: float
    intercept_stderr: float
    slope: float
    residuals: list[float] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "nu": self.nu,
            "intercept": self.intercept,
            "intercept_stderr": self.intercept_stderr,
            "slope": self.slope,
            "residuals": self.residuals,
            "points": [{"L": p.L, "mean": p.mean, "stderr": p.stderr, "n": p.n} for p in self.points],
        }


def scaling_fit(points: Iterable, nu: float = NU) -> ScalingEstimate:
    """Ordinary least squares of threshold against ``L^(-1/nu)``.

    ``points`` are :class:`ThresholdPoint` or ``(L, mean[, stderr, n])`` tuples.
    """
    pts = [p if isinstance(p, ThresholdPoint) else ThresholdPoint(int(p[0]), float(p[1]), float(p[2]) if len(p) > 2 else math.nan, int(p[3]) if len(p) > 3 else 0) for p in points]
    if len({p.L for p in pts}) < 3:
        raise InsufficientPoints("need at least three distinct L values")
    x = np.array([p.L ** (-1.0 / nu) for p in pts])
    y = np.array([p.mean for p in pts])
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(pts) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(A.T @ A)
    return ScalingEstimate(pts, nu, float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), float(coef[1]), [float(r) for r in resid])
