"""Branch and bound behind :func:`ecpcheck.matcher.solve`.

Every optimal mapping maps exactly ``min(#cad, #net)`` components of each
label, so ``U`` is fixed up front and only per-label maximum matchings are
searched.  ``(V, D)`` is scalarized as ``V * big + D`` with ``big`` larger
than any reachable ``D``.

Each cad component is a variable whose value is a same-label net index or
``BOT`` (unmapped).  A neighbor edge ``c1 -> c2`` costs one violation when
``c1`` is mapped and ``c2`` is unmapped, or when both are mapped and the
net images do not stand in the same relation.

Lower bound at a node: decided cost, plus per label a rectangular
assignment over the undecided variables.  A row's cost for a value
includes its distance, edges to decided neighbors and, for edges between
two undecided variables, the cheapest value of the far endpoint.  Each
such edge is charged to exactly one endpoint, so the sum is valid.

Phase 1 finds the optimal cost.  Phase 2 walks variables in cad-id order
and values in net-id order (``BOT`` last) and stops at the first mapping
reaching that cost, which is the lexicographically smallest one.
"""

from __future__ import annotations

import time
from collections import deque
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Instance, Membership
from .topology import RelationGraph

BOT = -1
_EMPTY: tuple = ()


class _Timeout(Exception):
    pass


def _assignment_cost(m: np.ndarray) -> tuple[int, np.ndarray]:
    if m.shape[0] == 0:
        return 0, np.empty(0, dtype=np.intp)
    rows, cols = linear_sum_assignment(m)
    return int(m[rows, cols].sum()), cols


class Search:
    def __init__(self, inst: Instance, rg: RelationGraph):
        cads = list(inst.cad)
        nets = list(inst.net)
        self.cad_ids = [c.id for c in cads]
        self.net_ids = [n.id for n in nets]
        cad_index = {cid: i for i, cid in enumerate(self.cad_ids)}
        net_index = {nid: j for j, nid in enumerate(self.net_ids)}

        labels = sorted({c.label for c in cads} | {n.label for n in nets})
        lab_of = {l: k for k, l in enumerate(labels)}
        self.lab_c = [lab_of[c.label] for c in cads]
        self.rows_of = [[] for _ in labels]
        self.cols_of = [[] for _ in labels]
        for i, c in enumerate(cads):
            self.rows_of[lab_of[c.label]].append(i)
        for j, n in enumerate(nets):
            self.cols_of[lab_of[n.label]].append(j)
        self.n_bot = [max(0, len(r) - len(c)) for r, c in zip(self.rows_of, self.cols_of)]

        dist_facts: set[tuple[int, int, int]] = set()
        for f in rg.manhattan:
            if f.mem1 is Membership.CAD and f.mem2 is Membership.NET:
                dist_facts.add((f.id1, f.id2, f.dist))
        self.D: list[dict[int, int]] = [
            {j: 0 for j in self.cols_of[self.lab_c[i]]} for i in range(len(cads))
        ]
        for c, n, d in dist_facts:
            i, j = cad_index.get(c), net_index.get(n)
            if i is not None and j is not None and j in self.D[i]:
                self.D[i][j] += d
        self.big = sum(max(row.values(), default=0) for row in self.D) + 1

        flags: dict[tuple[int, int, str], list[bool]] = {}
        net_rel: dict[str, dict[tuple[int, str], set[int]]] = {"previous": {}, "after": {}}
        for slot, (rel, facts) in enumerate((("previous", rg.previous), ("after", rg.after))):
            for a, b, d, mem in facts:
                if b is None:
                    continue
                if mem is Membership.CAD:
                    if a in cad_index and b in cad_index:
                        flags.setdefault((cad_index[a], cad_index[b], d), [False, False])[slot] = True
                elif a in net_index and b in net_index:
                    net_rel[rel].setdefault((net_index[a], d), set()).add(net_index[b])

        n = len(cads)
        self.unary: list[dict[int, int]] = [{} for _ in range(n)]
        self.out_e: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.in_e: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.edges: list[tuple[int, int]] = []
        self.good: list[dict[int, tuple[int, ...]]] = []
        self.goodrev: list[dict[int, tuple[int, ...]]] = []
        for (i1, i2, d), (prev, after) in sorted(flags.items()):
            dom2 = set(self.cols_of[self.lab_c[i2]])
            good: dict[int, tuple[int, ...]] = {}
            rev: dict[int, list[int]] = {}
            for v1 in self.cols_of[self.lab_c[i1]]:
                ok = dom2
                if prev:
                    ok = ok & net_rel["previous"].get((v1, d), set())
                if after:
                    ok = ok & net_rel["after"].get((v1, d), set())
                if ok:
                    good[v1] = tuple(sorted(ok))
                    for v2 in ok:
                        rev.setdefault(v2, []).append(v1)
            if i1 == i2:
                for v1 in self.cols_of[self.lab_c[i1]]:
                    if v1 not in good.get(v1, _EMPTY):
                        self.unary[i1][v1] = self.unary[i1].get(v1, 0) + 1
                continue
            e = len(self.edges)
            self.edges.append((i1, i2))
            self.good.append(good)
            self.goodrev.append({k: tuple(v) for k, v in rev.items()})
            self.out_e[i1].append((i2, e))
            self.in_e[i2].append((i1, e))

        self.order = self._bfs_order()
        self.rank = {i: k for k, i in enumerate(self.order)}
        self.a: list[Optional[int]] = [None] * n
        self.used = [False] * len(nets)
        self.bot_left = list(self.n_bot)
        self.fixed = 0
        self.best = None
        self.best_a: Optional[list[int]] = None
        self.nodes = 0
        self.deadline: Optional[float] = None
        self.phase_nodes = [0, 0]

    # -- helpers -------------------------------------------------------------

    def _bfs_order(self) -> list[int]:
        n = len(self.cad_ids)
        seen = [False] * n
        order = []
        for s in range(n):
            if seen[s]:
                continue
            seen[s] = True
            q = deque([s])
            while q:
                i = q.popleft()
                order.append(i)
                nbrs = sorted({x for x, _ in self.out_e[i]} | {x for x, _ in self.in_e[i]})
                for x in nbrs:
                    if not seen[x]:
                        seen[x] = True
                        q.append(x)
        return order

    def _f(self, e: int, v1: int, v2: int) -> int:
        if v1 < 0:
            return 0
        if v2 < 0:
            return 1
        return 0 if v2 in self.good[e].get(v1, _EMPTY) else 1

    def violations_and_distance(self, a: list[int]) -> tuple[int, int]:
        v = d = 0
        for i, ai in enumerate(a):
            if ai >= 0:
                d += self.D[i][ai]
                v += self.unary[i].get(ai, 0)
        for e, (i1, i2) in enumerate(self.edges):
            v += self._f(e, a[i1], a[i2])
        return v, d

    def scalar(self, a: list[int]) -> int:
        v, d = self.violations_and_distance(a)
        return v * self.big + d

    def best_cost_vector(self):
        from .matcher import CostVector

        u = sum(self.n_bot)
        v, d = self.violations_and_distance(self.best_a)
        return CostVector(u, v, d)

    def stats(self) -> dict:
        return {"nodes_phase1": self.phase_nodes[0], "nodes_phase2": self.phase_nodes[1]}

    def _assign(self, i: int, v: int) -> None:
        a = self.a
        delta = 0
        if v >= 0:
            self.used[v] = True
            delta += self.D[i][v] + self.big * self.unary[i].get(v, 0)
        else:
            self.bot_left[self.lab_c[i]] -= 1
        for x, e in self.out_e[i]:
            if a[x] is not None:
                delta += self.big * self._f(e, v, a[x])
        for x, e in self.in_e[i]:
            if a[x] is not None:
                delta += self.big * self._f(e, a[x], v)
        a[i] = v
        self.fixed += delta
        return delta

    def _unassign(self, i: int, delta: int) -> None:
        v = self.a[i]
        self.a[i] = None
        if v >= 0:
            self.used[v] = False
        else:
            self.bot_left[self.lab_c[i]] += 1
        self.fixed -= delta

    def _charged_to_source(self, src: int, dst: int) -> bool:
        # an undecided-undecided edge is charged to its target only when the
        # target may end up unmapped and the source may not
        return not (self.bot_left[self.lab_c[src]] == 0 and self.bot_left[self.lab_c[dst]] > 0)

    def _row(self, r: int, cols: list[int]):
        a, used, big = self.a, self.used, self.big
        dr, un = self.D[r], self.unary[r]
        vec = [dr[j] + big * un.get(j, 0) for j in cols] if un else [dr[j] for j in cols]
        bot = 0
        for x, e in self.out_e[r]:
            ax = a[x]
            g = self.good[e]
            if ax is not None:
                if ax < 0:
                    for t in range(len(cols)):
                        vec[t] += big
                else:
                    for t, j in enumerate(cols):
                        if ax not in g.get(j, _EMPTY):
                            vec[t] += big
            elif self._charged_to_source(r, x):
                for t, j in enumerate(cols):
                    for w in g.get(j, _EMPTY):
                        if not used[w] and w != j:
                            break
                    else:
                        vec[t] += big
        for x, e in self.in_e[r]:
            ax = a[x]
            if ax is not None:
                if ax >= 0:
                    gx = self.good[e].get(ax, _EMPTY)
                    for t, j in enumerate(cols):
                        if j not in gx:
                            vec[t] += big
                    bot += big
            elif not self._charged_to_source(x, r):
                gr = self.goodrev[e]
                for t, j in enumerate(cols):
                    for w in gr.get(j, _EMPTY):
                        if not used[w] and w != j:
                            break
                    else:
                        vec[t] += big
                bot += big
        return vec, bot

    def bound(self):
        """Lower bound, a completion achieving it, and per-label matrices."""
        self.nodes += 1
        if self.deadline is not None and self.nodes % 16 == 0 and time.monotonic() > self.deadline:
            raise _Timeout
        a = self.a
        total = self.fixed
        completion = list(a)
        data = {}
        for lab, rows_all in enumerate(self.rows_of):
            rows = [r for r in rows_all if a[r] is None]
            if not rows:
                continue
            cols = [j for j in self.cols_of[lab] if not self.used[j]]
            k = self.bot_left[lab]
            m = np.empty((len(rows), len(cols) + k), dtype=np.int64)
            for ri, r in enumerate(rows):
                vec, bot = self._row(r, cols)
                m[ri, : len(cols)] = vec
                m[ri, len(cols):] = bot
            h, assigned = _assignment_cost(m)
            total += h
            for ri, c in enumerate(assigned):
                completion[rows[ri]] = cols[c] if c < len(cols) else BOT
            data[lab] = (rows, cols, m, h)
        return total, completion, data

    def _screen(self, data, lb: int, i: int) -> list[tuple[int, int]]:
        """(lower bound, value) for each value of undecided variable ``i``."""
        rows, cols, m, h = data[self.lab_c[i]]
        ri = rows.index(i)
        rest = np.delete(m, ri, axis=0)
        out = []
        values = list(enumerate(cols))
        if m.shape[1] > len(cols):
            values.append((len(cols), BOT))
        for ci, v in values:
            sub_cost, _ = _assignment_cost(np.delete(rest, ci, axis=1))
            out.append((lb - h + int(m[ri, ci]) + sub_cost, v))
        return out

    # -- incumbent polishing ---------------------------------------------------

    def _local(self, i: int, a: list[int], skip: int = -1) -> int:
        """Scalar cost of the terms touching ``i`` (edges to ``skip`` left out)."""
        v, big = a[i], self.big
        total = 0
        if v >= 0:
            total += self.D[i][v] + big * self.unary[i].get(v, 0)
        for x, e in self.out_e[i]:
            if x != skip:
                total += big * self._f(e, v, a[x])
        for x, e in self.in_e[i]:
            if x != skip:
                total += big * self._f(e, a[x], v)
        return total

    def _pair_cost(self, i: int, k: int, a: list[int]) -> int:
        return self._local(i, a) + self._local(k, a, skip=i)

    def _polish(self, a: list[int]) -> tuple[int, list[int]]:
        """First-improvement local search over swaps and moves to free nets."""
        a = list(a)
        used = {v for v in a if v >= 0}
        improved = True
        while improved:
            improved = False
            if self.deadline is not None and time.monotonic() > self.deadline:
                break
            for lab, rows in enumerate(self.rows_of):
                free = [j for j in self.cols_of[lab] if j not in used]
                for p, i in enumerate(rows):
                    for k in rows[p + 1:]:
                        if a[i] == a[k]:
                            continue
                        before = self._pair_cost(i, k, a)
                        a[i], a[k] = a[k], a[i]
                        if self._pair_cost(i, k, a) < before:
                            improved = True
                        else:
                            a[i], a[k] = a[k], a[i]
                    if a[i] < 0:
                        continue
                    for t, j in enumerate(free):
                        before = self._local(i, a)
                        old = a[i]
                        a[i] = j
                        if self._local(i, a) < before:
                            used.discard(old)
                            used.add(j)
                            free[t] = old
                            improved = True
                        else:
                            a[i] = old
        return self.scalar(a), a

    # -- phase 1 ---------------------------------------------------------------

    def _pick(self, data) -> int:
        """Undecided variable with the largest regret (second best - best)."""
        best_i, best_key = None, None
        for rows, cols, m, _ in data.values():
            if m.shape[1] > 1:
                part = np.partition(m, 1, axis=1)
                regret = part[:, 1] - part[:, 0]
            else:
                regret = np.zeros(len(rows), dtype=np.int64)
            for r, g in zip(rows, regret.tolist()):
                key = (g, -self.rank[r])
                if best_key is None or key > best_key:
                    best_i, best_key = r, key
        return best_i

    def _dfs_best(self, depth: int) -> None:
        lb, completion, data = self.bound()
        if lb >= self.best:
            return
        val = self.scalar(completion)
        if val < self.best:
            self.best, self.best_a = val, completion
            # polishing pays off only when violations, not distance, are at stake
            if val - lb >= self.big:
                val, polished = self._polish(completion)
                if val < self.best:
                    self.best, self.best_a = val, polished
        if lb >= self.best or depth == len(self.order):
            return
        i = self._pick(data)
        for child_lb, v in sorted(self._screen(data, lb, i)):
            if child_lb >= self.best:
                break
            delta = self._assign(i, v)
            self._dfs_best(depth + 1)
            self._unassign(i, delta)

    # -- phase 2 ---------------------------------------------------------------

    def _dfs_first(self, i: int, target: int) -> Optional[list[int]]:
        if i == len(self.cad_ids):
            return list(self.a) if self.fixed == target else None
        lb, completion, data = self.bound()
        if lb > target:
            return None
        screened = {v: b for b, v in self._screen(data, lb, i)}
        for v in sorted(screened, key=lambda v: (v < 0, v)):
            if screened[v] > target:
                continue
            delta = self._assign(i, v)
            found = self._dfs_first(i + 1, target)
            self._unassign(i, delta)
            if found is not None:
                return found
        return None

    def _pairs(self, a: list[int]) -> list[tuple[int, int]]:
        return [(self.cad_ids[i], self.net_ids[v]) for i, v in enumerate(a) if v >= 0]

    def run(self, timeout: Optional[float] = None) -> tuple[list[tuple[int, int]], bool]:
        if not self.cad_ids:
            self.best_a = []
            return [], True
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.best = float("inf")
        try:
            self._dfs_best(0)
        except _Timeout:
            self.phase_nodes[0] = self.nodes
            self._reset()
            return self._pairs(self.best_a), False
        self.phase_nodes[0] = self.nodes
        self._reset()
        try:
            found = self._dfs_first(0, self.best)
        except _Timeout:
            self.phase_nodes[1] = self.nodes - self.phase_nodes[0]
            self._reset()
            return self._pairs(self.best_a), False
        self.phase_nodes[1] = self.nodes - self.phase_nodes[0]
        if found is None:
            raise AssertionError("lexicographic pass lost the optimum")
        self.best_a = found
        return self._pairs(found), True

    def _reset(self) -> None:
        self.a = [None] * len(self.cad_ids)
        self.used = [False] * len(self.net_ids)
        self.bot_left = list(self.n_bot)
        self.fixed = 0
