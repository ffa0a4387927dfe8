"""Optimal cad/net component mapping under a three-level lexicographic cost.

A mapping pairs schematic (cad) components with detected (net) components
of the same label, each at most once.  Mappings are ranked by

1. ``U``: number of unmapped cad components,
2. ``V``: number of neighborhood violations, one per distinct grounded tuple
   (a mapped cad component whose cad neighbor is mapped to something that is
   not the matching net neighbor, or whose cad neighbor is absent),
3. ``D``: total Manhattan displacement of the mapped pairs.

Among mappings of equal cost the one with the lexicographically smallest
sorted ``(cad_id, net_id)`` list is returned, which makes results
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .model import Instance, Membership
from .search import Search
from .topology import RelationGraph

BRUTE_FORCE_LIMIT = 8
DEFAULT_TIMEOUT = 60.0

PREV_MISMATCH = "prev-mismatch"
AFTER_MISMATCH = "after-mismatch"
PREV_ABSENT = "prev-absent"
AFTER_ABSENT = "after-absent"


class MappingError(ValueError):
    pass


class CostVector(NamedTuple):
    """``(U, V, D)``; tuple ordering is the lexicographic objective."""

    U: int
    V: int
    D: int


@dataclass(frozen=True)
class Mapping:
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> Mapping:
        return cls(tuple(pairs))

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


@dataclass(frozen=True)
class Violation:
    kind: str
    cad: tuple[int, ...]
    net: tuple[int, ...]
    dir: str


@dataclass(frozen=True)
class Solution:
    mapping: Mapping
    cost: CostVector
    absent: tuple[tuple[str, int], ...]
    excess: tuple[tuple[str, int], ...]
    violations: tuple[Violation, ...]
    optimal: bool = True
    stats: dict = field(default_factory=dict, compare=False)

    def distances(self, rg: RelationGraph) -> dict[tuple[int, int], int]:
        mapped = set(self.mapping.pairs)
        out: dict[tuple[int, int], int] = {}
        for f in rg.manhattan:
            if (f.id1, f.id2) in mapped and f.mem1 is Membership.CAD and f.mem2 is Membership.NET:
                out[(f.id1, f.id2)] = out.get((f.id1, f.id2), 0) + f.dist
        return out


@dataclass(frozen=True)
class Verdict:
    status: str
    warnings: tuple[str, ...]

    @property
    def compliant(self) -> bool:
        return self.status == "compliant"


def check_mapping(inst: Instance, m: Mapping) -> None:
    cad = inst.cad.by_id()
    net = inst.net.by_id()
    seen_cad: set[int] = set()
    seen_net: set[int] = set()
    for c, n in m.pairs:
        if c not in cad:
            raise MappingError(f"unknown cad id {c}")
        if n not in net:
            raise MappingError(f"unknown net id {n}")
        if c in seen_cad:
            raise MappingError(f"cad id {c} mapped twice")
        if n in seen_net:
            raise MappingError(f"net id {n} mapped twice")
        if cad[c].label != net[n].label:
            raise MappingError(f"label mismatch {cad[c].label} != {net[n].label} for ({c}, {n})")
        seen_cad.add(c)
        seen_net.add(n)


def _ground(inst: Instance, rg: RelationGraph, m: Mapping):
    """Ground the weak constraints for ``m``; returns (cost, violations)."""
    mapped = m.as_dict()
    absent = set(inst.cad.ids) - mapped.keys()
    net_rel = {
        "previous": {(a, b, d) for a, b, d, mem in rg.previous if mem is Membership.NET},
        "after": {(a, b, d) for a, b, d, mem in rg.after if mem is Membership.NET},
    }
    pair_tuples: dict[tuple, str] = {}
    absent_tuples: dict[tuple, str] = {}
    for rel, facts, mismatch, missing in (
        ("previous", rg.previous, PREV_MISMATCH, PREV_ABSENT),
        ("after", rg.after, AFTER_MISMATCH, AFTER_ABSENT),
    ):
        for c1, c2, d, mem in sorted(facts, key=lambda t: (t[0], -1 if t[1] is None else t[1], t[2], t[3].value)):
            if mem is not Membership.CAD or c1 not in mapped or c2 is None:
                continue
            n1 = mapped[c1]
            if c2 in mapped:
                n2 = mapped[c2]
                if (n1, n2, d) not in net_rel[rel]:
                    pair_tuples.setdefault((c1, n1, c2, n2, d), mismatch)
            elif c2 in absent:
                absent_tuples.setdefault((c1, n1, c2, d), missing)
    dist_tuples = {
        (f.id1, f.id2, f.dist)
        for f in rg.manhattan
        if f.mem1 is Membership.CAD and f.mem2 is Membership.NET and mapped.get(f.id1) == f.id2
    }
    violations = [Violation(kind, (t[0], t[2]), (t[1], t[3]), t[4]) for t, kind in sorted(pair_tuples.items())]
    violations += [Violation(kind, (t[0], t[2]), (t[1],), t[3]) for t, kind in sorted(absent_tuples.items())]
    cost = CostVector(len(absent), len(pair_tuples) + len(absent_tuples), sum(t[2] for t in dist_tuples))
    return cost, violations


def cost(inst: Instance, rg: RelationGraph, m: Mapping) -> CostVector:
    """Cost vector of ``m`` obtained by grounding the weak constraints."""
    check_mapping(inst, m)
    return _ground(inst, rg, m)[0]


def evaluate(inst: Instance, rg: RelationGraph, m: Mapping, optimal: bool = True,
             stats: Optional[dict] = None) -> Solution:
    check_mapping(inst, m)
    c, violations = _ground(inst, rg, m)
    mapped_cad = {p[0] for p in m.pairs}
    mapped_net = {p[1] for p in m.pairs}
    absent = tuple(sorted((x.label, x.id) for x in inst.cad if x.id not in mapped_cad))
    excess = tuple(sorted((x.label, x.id) for x in inst.net if x.id not in mapped_net))
    return Solution(m, c, absent, excess, tuple(violations), optimal, stats or {})


def optimal_unmapped(inst: Instance) -> tuple[int, int]:
    """Closed-form optimal ``(U, |excess|)`` from per-label counts."""
    cad = inst.cad.label_counts()
    net = inst.net.label_counts()
    labels = set(cad) | set(net)
    u = sum(max(0, cad.get(l, 0) - net.get(l, 0)) for l in labels)
    e = sum(max(0, net.get(l, 0) - cad.get(l, 0)) for l in labels)
    return u, e


def _partial_mappings(cads, nets_by_label):
    """Every partial injective same-label mapping, cads taken in id order."""
    used: set[int] = set()
    pairs: list[tuple[int, int]] = []

    def rec(i):
        if i == len(cads):
            yield tuple(pairs)
            return
        c = cads[i]
        for n in nets_by_label.get(c.label, ()):
            if n in used:
                continue
            used.add(n)
            pairs.append((c.id, n))
            yield from rec(i + 1)
            pairs.pop()
            used.discard(n)
        yield from rec(i + 1)

    yield from rec(0)


def brute_force(inst: Instance, rg: RelationGraph) -> Solution:
    """Exhaustive search over all partial mappings; small instances only."""
    if len(inst.cad) > BRUTE_FORCE_LIMIT or len(inst.net) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} components per side")
    nets_by_label: dict[str, list[int]] = {}
    for n in inst.net:
        nets_by_label.setdefault(n.label, []).append(n.id)
    best_key = None
    for pairs in _partial_mappings(list(inst.cad), nets_by_label):
        key = (_ground(inst, rg, Mapping(pairs))[0], pairs)
        if best_key is None or key < best_key:
            best_key = key
    return evaluate(inst, rg, Mapping(best_key[1]))


def solve(inst: Instance, rg: RelationGraph, timeout: Optional[float] = DEFAULT_TIMEOUT) -> Solution:
    """Lexicographically optimal mapping via branch and bound.

    When ``timeout`` seconds elapse the best mapping found so far is
    returned with ``optimal=False``.
    """
    search = Search(inst, rg)
    pairs, optimal = search.run(timeout)
    sol = evaluate(inst, rg, Mapping(pairs), optimal, search.stats())
    if optimal and sol.cost != search.best_cost_vector():
        raise AssertionError("search cost disagrees with grounded cost")
    return sol


def verdict(s: Solution, displacement_warn: Optional[int] = None,
            distances: Optional[dict[tuple[int, int], int]] = None) -> Verdict:
    """Compliance verdict; order and displacement findings are warnings only.

    ``distances`` maps mapped pairs to their displacement (see
    :meth:`Solution.distances`) and is only consulted when
    ``displacement_warn`` is given.
    """
    status = "compliant" if not s.absent and not s.excess else "non_compliant"
    warnings = [
        f"order violation {v.kind} {v.dir}: cad {list(v.cad)} -> net {list(v.net)}" for v in s.violations
    ]
    if displacement_warn is not None and distances:
        for (c, n), dist in sorted(distances.items()):
            if dist > displacement_warn:
                warnings.append(f"displacement {dist} > {displacement_warn}: cad {c} -> net {n}")
    return Verdict(status, tuple(warnings))
