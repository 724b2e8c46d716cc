"""Sacrificed-qubit loss correction and exact erased-edge accounting.

A correction step removes a lost qubit together with one current neighbour.
Faces holding both qubits shrink, the two faces holding exactly one merge,
all edges at the pair are erased, and the broken color classes are closed
again with new (non-original) edges so every survivor stays trivalent.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .lattice import COLORS, Color, ColorCodeLattice, Edge


class ProtocolError(ValueError):
    pass


class NotAlive(ProtocolError):
    pass


class NotAdjacent(ProtocolError):
    pass


class DegenerateCode(ProtocolError):
    """The step would delete more than one face and change the code."""


@dataclass
class StepResult:
    lost: int
    sacrificed: int
    erased: dict[Color, list[int]]  # original edges only
    erased_all: list[int]
    added: list[int]
    shrunk: list[int]
    merged: list[tuple[int, int]]  # (kept face, absorbed face)
    removed_faces: list[int]
    degenerate: bool = False

    def erased_count(self, color) -> int:
        return len(self.erased[Color(color)])

    def to_record(self) -> dict:
        return {
            "lost": self.lost,
            "sacrificed": self.sacrificed,
            "erased": {c.label: ids for c, ids in self.erased.items()},
            "added": self.added,
            "shrunk": self.shrunk,
            "merged": [list(m) for m in self.merged],
            "removed_faces": self.removed_faces,
        }


@dataclass
class Correction:
    steps: list[tuple[int, int]]
    weight: Fraction


@dataclass
class CorrectionOutcome:
    erased: dict[Color, set[int]]
    removed: set[int]
    final: ColorCodeLattice | None = None


def apply_step(
    lat: ColorCodeLattice,
    lost: int,
    sacrificed: int,
    journal: list | None = None,
    allow_degenerate: bool = False,
) -> StepResult:
    """Remove ``lost`` and its neighbour ``sacrificed`` in place.

    With ``journal`` given, every mutation is logged so :func:`undo` can
    restore the previous state exactly (used by exhaustive enumeration).

    A pair joined by all three edge colors is an isolated component; removing
    it deletes three faces at once.  That raises :class:`DegenerateCode`
    unless ``allow_degenerate`` is set, in which case the pair is dropped.
    """
    if not lat.is_alive(lost):
        raise NotAlive(f"qubit {lost} is not alive")
    if not lat.is_alive(sacrificed):
        raise NotAlive(f"qubit {sacrificed} is not alive")
    ei = lat.nbr[lost]
    ej = lat.nbr[sacrificed]
    edges = lat.edges
    joining = [c for c in COLORS if edges[ei[c]].other(lost) == sacrificed]
    if not joining:
        raise NotAdjacent(f"qubits {lost} and {sacrificed} are not adjacent")
    if len(joining) == 3 and not allow_degenerate:
        raise DegenerateCode(f"qubits {lost} and {sacrificed} form an isolated component")

    qface_i = lat.qface[lost]
    qface_j = lat.qface[sacrificed]
    faces = lat.faces

    erased_all = sorted(set(ei) | set(ej))
    erased = {c: [] for c in COLORS}
    for eid in erased_all:
        e = edges[eid]
        if e.original:
            erased[e.color].append(eid)

    if journal is not None:
        journal.append(("edge_counter", lat.next_edge_id))
        journal.append(("nbr", lost, ei))
        journal.append(("nbr", sacrificed, ej))
        journal.append(("qface", lost, qface_i))
        journal.append(("qface", sacrificed, qface_j))

    # reconnect each color class broken by the removal
    added = []
    ends = []
    for c in COLORS:
        if c in joining:
            continue
        u = edges[ei[c]].other(lost)
        v = edges[ej[c]].other(sacrificed)
        ends.append((c, u, v))
    for eid in erased_all:
        if journal is not None:
            journal.append(("edge", eid, edges[eid]))
        del edges[eid]
    for c, u, v in ends:
        eid = lat.next_edge_id
        lat.next_edge_id += 1
        edges[eid] = Edge(u, v, c, False)
        if journal is not None:
            journal.append(("edge", eid, None))
            journal.append(("nbr_slot", u, c, lat.nbr[u][c]))
            journal.append(("nbr_slot", v, c, lat.nbr[v][c]))
        lat.nbr[u][c] = eid
        lat.nbr[v][c] = eid
        added.append(eid)

    shrunk_faces = []
    merged = []
    removed_faces = []
    for c in COLORS:
        fi, fj = qface_i[c], qface_j[c]
        if fi == fj:
            members = faces[fi]
            if journal is not None:
                journal.append(("face", fi, set(members), lat.face_color[fi]))
            members.discard(lost)
            members.discard(sacrificed)
            if members:
                shrunk_faces.append(fi)
            else:
                del faces[fi]
                del lat.face_color[fi]
                removed_faces.append(fi)
            continue
        a, b = faces[fi], faces[fj]
        if journal is not None:
            journal.append(("face", fi, set(a), c))
            journal.append(("face", fj, set(b), c))
        a.discard(lost)
        b.discard(sacrificed)
        keep, gone = (fi, fj) if len(a) >= len(b) else (fj, fi)
        absorbed = faces[gone]
        faces[keep] |= absorbed
        for q in absorbed:
            row = lat.qface[q]
            if journal is not None:
                journal.append(("qface_slot", q, c, row[c]))
            row[c] = keep
        del faces[gone]
        del lat.face_color[gone]
        merged.append((keep, gone))

    lat.nbr[lost] = None
    lat.nbr[sacrificed] = None
    lat.qface[lost] = None
    lat.qface[sacrificed] = None
    return StepResult(
        lost, sacrificed, erased, erased_all, added, shrunk_faces, merged, removed_faces, len(joining) == 3
    )


def undo(lat: ColorCodeLattice, journal: list, mark: int = 0) -> None:
    """Roll back journal entries recorded after position ``mark``."""
    while len(journal) > mark:
        entry = journal.pop()
        kind = entry[0]
        if kind == "edge":
            _, eid, old = entry
            if old is None:
                lat.edges.pop(eid, None)
            else:
                lat.edges[eid] = old
        elif kind == "nbr":
            lat.nbr[entry[1]] = entry[2]
        elif kind == "qface":
            lat.qface[entry[1]] = entry[2]
        elif kind == "nbr_slot":
            lat.nbr[entry[1]][entry[2]] = entry[3]
        elif kind == "qface_slot":
            lat.qface[entry[1]][entry[2]] = entry[3]
        elif kind == "face":
            _, fid, members, color = entry
            lat.faces[fid] = members
            lat.face_color[fid] = color
        elif kind == "edge_counter":
            lat.next_edge_id = entry[1]


def random_correction(lat: ColorCodeLattice, lost: int, rng, allow_degenerate: bool = False) -> StepResult:
    """Sacrifice one of the three current edge-neighbours of ``lost`` uniformly."""
    if not lat.is_alive(lost):
        raise NotAlive(f"qubit {lost} is not alive")
    c = int(rng.integers(3))
    return apply_step(lat, lost, lat.neighbour(lost, c), allow_degenerate=allow_degenerate)


def _paths(lat: ColorCodeLattice, order: tuple[int, ...], pos: int, journal: list, steps: list, erased: list):
    """Depth-first walk over sacrifice choices for one loss ordering."""
    while pos < len(order) and not lat.is_alive(order[pos]):
        pos += 1
    if pos == len(order):
        yield steps, erased
        return
    lost = order[pos]
    for c in COLORS:
        j = lat.neighbour(lost, c)
        mark = len(journal)
        res = apply_step(lat, lost, j, journal)
        steps.append((lost, j))
        erased.append(res)
        yield from _paths(lat, order, pos + 1, journal, steps, erased)
        erased.pop()
        steps.pop()
        undo(lat, journal, mark)


def enumerate_corrections(lat: ColorCodeLattice, instance: Iterable[int], keep_final: bool = False) -> Iterator[tuple[Correction, CorrectionOutcome]]:
    """Every (ordering, per-step edge choice) path with weight ``1/(n! 3^steps)``.

    The lattice is restored on exit.  A lost qubit already removed as an
    earlier sacrifice contributes no step.  Branches hitting
    :class:`DegenerateCode` propagate the exception.
    """
    inst = tuple(sorted(set(instance)))
    for q in inst:
        if not lat.is_alive(q):
            raise NotAlive(f"qubit {q} is not alive")
    n_fact = math.factorial(len(inst))
    journal: list = []
    for order in itertools.permutations(inst):
        for steps, results in _paths(lat, order, 0, journal, [], []):
            w = Fraction(1, n_fact * 3 ** len(steps))
            erased = {c: set() for c in COLORS}
            removed = set()
            for r in results:
                for c in COLORS:
                    erased[c].update(r.erased[c])
                removed.update((r.lost, r.sacrificed))
            final = lat.copy() if keep_final else None
            yield Correction(list(steps), w), CorrectionOutcome(erased, removed, final)


def erased_totals(lat: ColorCodeLattice, instance: Iterable[int]) -> tuple[int, tuple[int, int, int]]:
    """Exact average erased-original-edge counts for all colors at once.

    Returns ``(denominator, (red, blue, green numerators))`` so that
    ``R_color = numerator / denominator``.  Integer arithmetic throughout;
    this is the hot loop of the coefficient computation.
    """
    inst = tuple(sorted(set(instance)))
    n = len(inst)
    denom = math.factorial(n) * 3 ** n
    totals = [0, 0, 0]
    journal: list = []

    def walk(order, pos, depth, acc):
        while pos < n and lat.nbr[order[pos]] is None:
            pos += 1
        if pos == n:
            scale = 3 ** (n - depth)
            for c in range(3):
                totals[c] += acc[c] * scale
            return
        lost = order[pos]
        row = lat.nbr[lost]
        for c in range(3):
            j = lat.edges[row[c]].other(lost)
            mark = len(journal)
            res = apply_step(lat, lost, j, journal)
            e = res.erased
            walk(order, pos + 1, depth + 1,
                 (acc[0] + len(e[Color.RED]), acc[1] + len(e[Color.BLUE]), acc[2] + len(e[Color.GREEN])))
            undo(lat, journal, mark)

    for q in inst:
        if not lat.is_alive(q):
            raise NotAlive(f"qubit {q} is not alive")
    for order in itertools.permutations(inst):
        walk(order, 0, 0, (0, 0, 0))
    return denom, tuple(totals)


def average_erased(lat: ColorCodeLattice, instance: Iterable[int], color) -> Fraction:
    """Weighted mean number of original ``color`` edges erased over all corrections."""
    denom, totals = erased_totals(lat, instance)
    return Fraction(totals[Color.parse(color)], denom)


@dataclass
class TraceWriter:
    """JSON-lines log of correction steps."""

    stream: object
    count: int = field(default=0)

    def write(self, result: StepResult) -> None:
        self.stream.write(json.dumps(result.to_record(), sort_keys=True) + "\n")
        self.count += 1
