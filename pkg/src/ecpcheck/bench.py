"""Timing sweeps of the matcher over generated instances.

Each cell ``(n_labels, n_components)`` gets ``samples`` instances.  An
instance is a generated schematic layout and a perturbed copy of it
(jitter, one deletion, one insertion), normalized and solved with a
per-instance timeout.  Instance streams depend only on the seed, the cell
and the sample index, so cost vectors are reproducible while wall times
are not.
"""

from __future__ import annotations

import csv
import io
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .matcher import CostVector, solve
from .model import Instance
from .synthgen import GenParams, PerturbParams, gen_layout, perturb
from .topology import build_relations, normalize_instance

DEFAULT_LABELS = (6, 12, 25, 50)
DEFAULT_COMPONENTS = (12, 25, 50, 75)

RECORD_HEADER = ("n_labels", "n_components", "sample", "wall_ms", "U", "V", "D", "optimal")
SUMMARY_HEADER = ("n_labels", "n_components", "count", "avg_ms", "max_ms", "timeouts")


@dataclass(frozen=True)
class BenchConfig:
    labels: tuple[int, ...] = DEFAULT_LABELS
    components: tuple[int, ...] = DEFAULT_COMPONENTS
    samples: int = 39
    seed: int = 0
    timeout: float = 60.0
    full_sweep: bool = False
    grid: int = 1000
    min_size: int = 40
    max_size: int = 80
    gap: int = 20
    jitter_pct: int = 2
    drop_k: int = 1
    add_j: int = 1

    def validate(self) -> None:
        if not self.labels or not self.components:
            raise ValueError("label and component ranges must be non-empty")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if min(self.labels) < 1:
            raise ValueError("label counts must be >= 1")
        if not self.cells():
            raise ValueError("no cell has n_labels <= n_components")

    def cells(self) -> list[tuple[int, int]]:
        labels, comps = sorted(set(self.labels)), sorted(set(self.components))
        if self.full_sweep:
            labels = list(range(labels[0], labels[-1] + 1))
            comps = list(range(comps[0], comps[-1] + 1))
        return [(l, c) for c in comps for l in labels if l <= c]


@dataclass(frozen=True)
class BenchRecord:
    n_labels: int
    n_components: int
    sample: int
    wall_ms: float
    cost: CostVector
    optimal: bool


@dataclass(frozen=True)
class CellSummary:
    n_labels: int
    n_components: int
    count: int
    avg_ms: float
    max_ms: float
    timeouts: int


@dataclass
class BenchResult:
    records: list[BenchRecord]
    cells: list[CellSummary] = field(default_factory=list)
    avg_ms: float = 0.0
    max_ms: float = 0.0
    timeouts: int = 0


def instance_seed(seed: int, n_labels: int, n_components: int, sample: int) -> int:
    return zlib.crc32(f"{seed}/{n_labels}/{n_components}/{sample}".encode())


def make_instance(cfg: BenchConfig, n_labels: int, n_components: int, sample: int) -> Instance:
    s = instance_seed(cfg.seed, n_labels, n_components, sample)
    g = GenParams(n_labels, n_components, canvas=(cfg.grid, cfg.grid), seed=s,
                  min_size=cfg.min_size, max_size=cfg.max_size, gap=cfg.gap)
    cad = gen_layout(g)
    q = PerturbParams(jitter=cfg.grid * cfg.jitter_pct // 100, drop_k=cfg.drop_k, add_j=cfg.add_j, seed=s)
    net = perturb(cad, q, g.entries())
    return Instance(cad, net)


def _run_one(args) -> BenchRecord:
    cfg, n_labels, n_components, sample = args
    inst = normalize_instance(make_instance(cfg, n_labels, n_components, sample), cfg.grid)
    rg = build_relations(inst)
    t0 = time.perf_counter()
    sol = solve(inst, rg, timeout=cfg.timeout)
    wall = (time.perf_counter() - t0) * 1000.0
    return BenchRecord(n_labels, n_components, sample, wall, sol.cost, sol.optimal)


def summarize(records: Sequence[BenchRecord]) -> BenchResult:
    groups: dict[tuple[int, int], list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.n_labels, r.n_components), []).append(r)
    cells = []
    for (nl, nc), rs in groups.items():
        times = [r.wall_ms for r in rs]
        cells.append(CellSummary(nl, nc, len(rs), sum(times) / len(times), max(times),
                                 sum(not r.optimal for r in rs)))
    times = [r.wall_ms for r in records]
    return BenchResult(
        list(records), cells,
        sum(times) / len(times) if times else 0.0,
        max(times, default=0.0),
        sum(not r.optimal for r in records),
    )


def _warm_up() -> None:
    """Solve one tiny instance so one-off import and setup costs are not timed."""
    _run_one((BenchConfig(labels=(2,), components=(4,), timeout=5.0), 2, 4, 0))


def run(cfg: BenchConfig, workers: int = 1, progress=None) -> BenchResult:
    """Solve every (cell, sample) instance; records come back in cell order."""
    cfg.validate()
    jobs = [(cfg, nl, nc, k) for nl, nc in cfg.cells() for k in range(cfg.samples)]
    records: list[BenchRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_warm_up) as pool:
            for r in pool.map(_run_one, jobs, chunksize=4):
                records.append(r)
                if progress:
                    progress(r)
    else:
        _warm_up()
        for job in jobs:
            r = _run_one(job)
            records.append(r)
            if progress:
                progress(r)
    return summarize(records)


def format_records_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_HEADER)
    for r in records:
        w.writerow((r.n_labels, r.n_components, r.sample, f"{r.wall_ms:.3f}", *r.cost, int(r.optimal)))
    return buf.getvalue()


def format_summary_csv(result: BenchResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for c in result.cells:
        w.writerow((c.n_labels, c.n_components, c.count, f"{c.avg_ms:.3f}", f"{c.max_ms:.3f}", c.timeouts))
    w.writerow(("all", "all", len(result.records), f"{result.avg_ms:.3f}", f"{result.max_ms:.3f}",
                result.timeouts))
    return buf.getvalue()


def format_summary_text(result: BenchResult) -> str:
    lines = [f"{'labels':>6} {'comps':>6} {'n':>4} {'avg ms':>10} {'max ms':>10} {'timeouts':>8}"]
    for c in result.cells:
        lines.append(f"{c.n_labels:>6} {c.n_components:>6} {c.count:>4} {c.avg_ms:>10.2f} "
                     f"{c.max_ms:>10.2f} {c.timeouts:>8}")
    lines.append(f"{'all':>6} {'':>6} {len(result.records):>4} {result.avg_ms:>10.2f} "
                 f"{result.max_ms:>10.2f} {result.timeouts:>8}")
    return "\n".join(lines) + "\n"


def trend(result: BenchResult, by: str = "n_components") -> list[tuple[int, float]]:
    """Average wall time per value of ``by`` (pooled over the other axis)."""
    pooled: dict[int, list[float]] = {}
    for r in result.records:
        pooled.setdefault(getattr(r, by), []).append(r.wall_ms)
    return [(k, sum(v) / len(v)) for k, v in sorted(pooled.items())]
