"""Relation facts over layouts: neighbor chains and Manhattan distances.

Both layouts of an instance are first rescaled to a common square grid so
that distances between a schematic box and a detected box are comparable.
Neighbors along a direction are only considered among boxes whose
orthogonal projections overlap strictly; the nearest one by center wins,
ties going to the smaller id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .model import BBox, Component, Instance, Layout, Membership, center, round_half_up

H = "h"
V = "v"
DIRECTIONS = (H, V)


@dataclass(frozen=True)
class Between:
    id: int
    start: Optional[int]
    end: Optional[int]
    dir: str
    mem: Membership

    def sort_key(self):
        return (self.mem.value, self.id, self.dir,
                -1 if self.start is None else self.start,
                -1 if self.end is None else self.end)


@dataclass(frozen=True, order=True)
class ManhattanFact:
    id1: int
    id2: int
    dist: int
    mem1: Membership = Membership.CAD
    mem2: Membership = Membership.NET

    def sort_key(self):
        return (self.id1, self.id2, self.dist, self.mem1.value, self.mem2.value)


@dataclass(frozen=True)
class RelationGraph:
    """``previous``/``after`` neighbor relations plus distance facts.

    ``previous`` and ``after`` hold ``(id, neighbor, dir, mem)`` tuples where
    ``neighbor`` is ``None`` at chain boundaries.  The originating ``between``
    facts are kept so the graph can be written back out unchanged.
    """

    between: frozenset[Between] = field(default_factory=frozenset)
    previous: frozenset[tuple] = field(default_factory=frozenset)
    after: frozenset[tuple] = field(default_factory=frozenset)
    manhattan: frozenset[ManhattanFact] = field(default_factory=frozenset)


def _scale(v: int, grid: int, size: int) -> int:
    return round_half_up(v * grid, size)


def _inflate(lo: int, hi: int, limit: int) -> tuple[int, int]:
    if lo < hi:
        return lo, hi
    if hi + 1 <= limit:
        return lo, lo + 1
    return hi - 1, hi


def normalize(l: Layout, grid: int = 1000) -> Layout:
    """Rescale ``l`` onto a ``grid`` x ``grid`` canvas.

    Boxes that collapse after rounding are widened by one unit, towards the
    far side unless that would leave the canvas.
    """
    if grid < 1:
        raise ValueError("grid must be >= 1")
    w, h = l.canvas
    out = []
    for c in l.components:
        b = c.bbox
        x1, x2 = _inflate(_scale(b.x1, grid, w), _scale(b.x2, grid, w), grid)
        y1, y2 = _inflate(_scale(b.y1, grid, h), _scale(b.y2, grid, h), grid)
        out.append(Component(c.label, c.id, BBox(x1, y1, x2, y2), c.membership, c.score))
    return Layout((grid, grid), l.membership, tuple(out))


def normalize_instance(inst: Instance, grid: int = 1000) -> Instance:
    return Instance(normalize(inst.cad, grid), normalize(inst.net, grid))


def _overlaps(lo1: int, hi1: int, lo2: int, hi2: int) -> bool:
    return max(lo1, lo2) < min(hi1, hi2)


def build_between(l: Layout) -> set[Between]:
    comps = list(l.components)
    centers = {c.id: center(c.bbox) for c in comps}
    facts: set[Between] = set()
    for d in DIRECTIONS:
        axis = 0 if d == H else 1
        for c in comps:
            b = c.bbox
            key = (centers[c.id][axis], c.id)
            start = end = None
            for o in comps:
                if o.id == c.id:
                    continue
                ob = o.bbox
                if d == H:
                    if not _overlaps(b.y1, b.y2, ob.y1, ob.y2):
                        continue
                elif not _overlaps(b.x1, b.x2, ob.x1, ob.x2):
                    continue
                okey = (centers[o.id][axis], o.id)
                if okey < key:
                    # nearest = greatest center, ties to smaller id
                    if start is None or (okey[0], -okey[1]) > (start[0], -start[1]):
                        start = okey
                elif end is None or okey < end:
                    end = okey
            if start is None and end is None:
                continue
            facts.add(Between(c.id, None if start is None else start[1],
                              None if end is None else end[1], d, l.membership))
    return facts


def build_manhattan(inst: Instance) -> set[ManhattanFact]:
    facts = set()
    by_label: dict[str, list[Component]] = {}
    for n in inst.net:
        by_label.setdefault(n.label, []).append(n)
    for c in inst.cad:
        cx, cy = center(c.bbox)
        for n in by_label.get(c.label, ()):
            nx, ny = center(n.bbox)
            facts.add(ManhattanFact(c.id, n.id, abs(cx - nx) + abs(cy - ny)))
    return facts


def derive_relations(between: Iterable[Between],
                     manhattan: Iterable[ManhattanFact] = ()) -> RelationGraph:
    between = frozenset(between)
    previous = frozenset((b.id, b.start, b.dir, b.mem) for b in between)
    after = frozenset((b.id, b.end, b.dir, b.mem) for b in between)
    return RelationGraph(between, previous, after, frozenset(manhattan))


def build_relations(inst: Instance) -> RelationGraph:
    """All relation facts for an already-normalized instance."""
    between = build_between(inst.cad) | build_between(inst.net)
    return derive_relations(between, build_manhattan(inst))
