"""Seeded synthetic layouts and anomaly injection.

Schematic layouts are drawn on a grid of equal cells, like components
clipped to horizontal rails: each component sits centered in its own cell,
so rows share one height and columns one width.  Net layouts are derived
from a schematic by jitter, deletion, same-size position swaps and
insertion of spurious components.

Randomness comes from Philox streams keyed by ``(seed, tag)``; adding a
new draw under a new tag never shifts an existing stream.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import BBox, Component, Layout, Membership, is_label

_BASE_NAMES = (
    "relay", "contactor", "breaker", "fuse", "terminal", "psu", "plc", "timer",
    "switch", "meter", "transformer", "inverter", "filter", "socket", "lamp",
    "button", "selector", "thermostat", "fan", "surge", "isolator", "rcd",
    "mcb", "busbar", "starter", "drive", "encoder", "sensor", "buzzer", "diode",
)


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    label: str
    width: int
    height: int


def default_catalog(min_size: int = 16, max_size: int = 32, n: int = 60) -> list[CatalogEntry]:
    """Deterministic catalog; sizes repeat so same-size label pairs exist."""
    widths = sorted({min_size + (max_size - min_size) * k // 3 for k in range(4)})
    heights = sorted({min_size + (max_size - min_size) // 2, max_size})
    out = []
    for k in range(n):
        name = _BASE_NAMES[k % len(_BASE_NAMES)]
        if k >= len(_BASE_NAMES):
            name = f"{name}_{k // len(_BASE_NAMES) + 1}"
        out.append(CatalogEntry(name, widths[k % len(widths)], heights[(k // len(widths)) % len(heights)]))
    return out


def parse_catalog(text: str) -> list[CatalogEntry]:
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 3 or not is_label(toks[0]):
            raise ValueError(f"line {no}: expected '<label> <width> <height>'")
        try:
            w, h = int(toks[1]), int(toks[2])
        except ValueError:
            raise ValueError(f"line {no}: width and height must be integers") from None
        if w <= 0 or h <= 0:
            raise ValueError(f"line {no}: width and height must be positive")
        out.append(CatalogEntry(toks[0], w, h))
    if len({e.label for e in out}) != len(out):
        raise ValueError("duplicate label in catalog")
    return out


def format_catalog(entries: Sequence[CatalogEntry]) -> str:
    return "".join(f"{e.label} {e.width} {e.height}\n" for e in entries)


def stream(seed: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed & (2**64 - 1), spawn_key=(zlib.crc32(tag.encode()),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GenParams:
    n_labels: int
    n_components: int
    canvas: tuple[int, int] = (320, 320)
    seed: int = 0
    min_size: int = 16
    max_size: int = 32
    gap: int = 8
    catalog: Optional[tuple[CatalogEntry, ...]] = None

    def entries(self) -> list[CatalogEntry]:
        if self.catalog is not None:
            return list(self.catalog)
        return default_catalog(self.min_size, self.max_size)

    def validate(self) -> None:
        if self.n_labels < 1:
            raise GenerationError("n_labels must be >= 1")
        if self.n_components < self.n_labels:
            raise GenerationError("n_components must be >= n_labels")
        if self.min_size < 1 or self.max_size < self.min_size or self.gap < 0:
            raise GenerationError("invalid box size range")
        if self.n_labels > len(self.entries()):
            raise GenerationError("n_labels exceeds catalog size")


@dataclass(frozen=True)
class PerturbParams:
    jitter: int = 0
    drop_k: int = 0
    add_j: int = 0
    swap_s: int = 0
    seed: int = 0


def gen_layout(p: GenParams) -> Layout:
    """Random schematic layout with ids 1..n in row-major order."""
    p.validate()
    entries = p.entries()
    rng = stream(p.seed, "labels")
    chosen = [entries[k] for k in rng.choice(len(entries), size=p.n_labels, replace=False)]
    picks = list(chosen) + [chosen[k] for k in rng.integers(0, len(chosen), size=p.n_components - len(chosen))]
    picks = [picks[k] for k in rng.permutation(len(picks))]

    cell_w = max(e.width for e in chosen) + p.gap
    cell_h = max(e.height for e in chosen) + p.gap
    cols, rows = p.canvas[0] // cell_w, p.canvas[1] // cell_h
    if cols * rows < p.n_components:
        raise GenerationError(
            f"canvas {p.canvas} fits {cols * rows} cells, need {p.n_components}"
        )
    cells = sorted(stream(p.seed, "cells").choice(cols * rows, size=p.n_components, replace=False).tolist())
    comps = []
    for k, (cell, e) in enumerate(zip(cells, picks), 1):
        r, c = divmod(cell, cols)
        x1 = c * cell_w + (cell_w - e.width) // 2
        y1 = r * cell_h + (cell_h - e.height) // 2
        comps.append(Component(e.label, k, BBox(x1, y1, x1 + e.width, y1 + e.height), Membership.CAD))
    return Layout(p.canvas, Membership.CAD, tuple(comps))


def _clamped_shift(b: BBox, dx: int, dy: int, canvas: tuple[int, int]) -> BBox:
    dx = min(max(dx, -b.x1), canvas[0] - b.x2)
    dy = min(max(dy, -b.y1), canvas[1] - b.y2)
    return b.shifted(dx, dy)


def _disjoint(b: BBox, others) -> bool:
    return all(max(b.x1, o.x1) >= min(b.x2, o.x2) or max(b.y1, o.y1) >= min(b.y2, o.y2) for o in others)


def perturb(l: Layout, q: PerturbParams, catalog: Optional[Sequence[CatalogEntry]] = None,
            attempts: int = 2000) -> Layout:
    """Derive a net layout from ``l``.

    Steps, each with its own random stream: jitter every box by up to
    ``q.jitter`` per axis (clamped to the canvas), delete ``q.drop_k``
    components, swap the positions of ``q.swap_s`` disjoint pairs of
    same-size components with different labels, insert ``q.add_j`` catalog
    components at free positions.  Ids are then reassigned as a random
    permutation of ``1..n``.
    """
    if min(q.jitter, q.drop_k, q.add_j, q.swap_s) < 0:
        raise GenerationError("perturbation parameters must be >= 0")
    if q.drop_k > len(l):
        raise GenerationError("cannot drop more components than exist")
    canvas = l.canvas
    items = [(c.label, c.bbox) for c in l.components]

    if q.jitter:
        rng = stream(q.seed, "jitter")
        shifts = rng.integers(-q.jitter, q.jitter + 1, size=(len(items), 2))
        items = [(lab, _clamped_shift(b, int(dx), int(dy), canvas)) for (lab, b), (dx, dy) in zip(items, shifts)]

    if q.drop_k:
        rng = stream(q.seed, "drop")
        gone = set(rng.choice(len(items), size=q.drop_k, replace=False).tolist())
        items = [it for k, it in enumerate(items) if k not in gone]

    if q.swap_s:
        rng = stream(q.seed, "swap")
        candidates = [
            (i, j)
            for i in range(len(items))
            for j in range(i + 1, len(items))
            if items[i][0] != items[j][0]
            and (items[i][1].width, items[i][1].height) == (items[j][1].width, items[j][1].height)
        ]
        order = rng.permutation(len(candidates)).tolist()
        taken: set[int] = set()
        done = 0
        for k in order:
            if done == q.swap_s:
                break
            i, j = candidates[k]
            if i in taken or j in taken:
                continue
            (li, bi), (lj, bj) = items[i], items[j]
            items[i], items[j] = (li, bj), (lj, bi)
            taken |= {i, j}
            done += 1
        if done < q.swap_s:
            raise GenerationError(f"only {done} same-size swap pairs available, need {q.swap_s}")

    if q.add_j:
        entries = list(catalog) if catalog is not None else default_catalog()
        rng = stream(q.seed, "add")
        for _ in range(q.add_j):
            e = entries[int(rng.integers(len(entries)))]
            if e.width > canvas[0] or e.height > canvas[1]:
                raise GenerationError(f"catalog entry {e.label} larger than canvas")
            boxes = [b for _, b in items]
            for _ in range(attempts):
                x = int(rng.integers(0, canvas[0] - e.width + 1))
                y = int(rng.integers(0, canvas[1] - e.height + 1))
                b = BBox(x, y, x + e.width, y + e.height)
                if _disjoint(b, boxes):
                    items.append((e.label, b))
                    break
            else:
                raise GenerationError("no free position for insertion")

    ids = (stream(q.seed, "ids").permutation(len(items)) + 1).tolist()
    comps = [Component(lab, int(i), b, Membership.NET) for (lab, b), i in zip(items, ids)]
    return Layout(canvas, Membership.NET, tuple(comps))


def clearance(l: Layout) -> int:
    """Smallest per-axis overlap or separation over all component pairs.

    Shifting every box by less than half this value per axis leaves every
    strict projection overlap (and non-overlap) unchanged.
    """
    boxes = [c.bbox for c in l.components]
    best = None
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            for lo1, hi1, lo2, hi2 in ((a.x1, a.x2, b.x1, b.x2), (a.y1, a.y2, b.y1, b.y2)):
                v = abs(min(hi1, hi2) - max(lo1, lo2))
                best = v if best is None else min(best, v)
    return 0 if best is None else best
