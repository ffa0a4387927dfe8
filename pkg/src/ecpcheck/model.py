"""Core domain types: boxes, components, layouts and cad/net instances."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

LABEL_RE = re.compile(r"^[a-z0-9_]+$")


class Membership(str, Enum):
    CAD = "cad"
    NET = "net"

    def __str__(self) -> str:
        return self.value


class LayoutError(ValueError):
    """Raised when a layout violates one or more invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def round_half_up(num: int, den: int = 1) -> int:
    """Round ``num / den`` to the nearest integer, halves going up."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    return (2 * num + den) // (2 * den)


def is_label(name: str) -> bool:
    return bool(LABEL_RE.match(name))


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box in image convention (origin top-left, y down)."""

    x1: int
    y1: int
    x2: int
    y2: int

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return self.width * self.height

    def is_degenerate(self) -> bool:
        return self.x1 >= self.x2 or self.y1 >= self.y2

    def shifted(self, dx: int, dy: int) -> BBox:
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)


def center(b: BBox) -> tuple[int, int]:
    """Integer center of ``b``; halves round up."""
    return round_half_up(b.x1 + b.x2, 2), round_half_up(b.y1 + b.y2, 2)


@dataclass(frozen=True)
class Component:
    label: str
    id: int
    bbox: BBox
    membership: Membership
    score: Optional[Fraction] = None

    @property
    def center(self) -> tuple[int, int]:
        return center(self.bbox)


def _component_key(c: Component):
    return (c.id, c.label, c.bbox.as_tuple())


@dataclass(frozen=True)
class Layout:
    """A canvas plus the components of one membership.

    Components are kept sorted by id so that equal layouts compare equal
    regardless of construction order.  Construction never validates; use
    :func:`validate_layout` or :meth:`checked`.
    """

    canvas: tuple[int, int]
    membership: Membership
    components: tuple[Component, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "canvas", (int(self.canvas[0]), int(self.canvas[1])))
        object.__setattr__(self, "membership", Membership(self.membership))
        object.__setattr__(
            self, "components", tuple(sorted(self.components, key=_component_key))
        )

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.components]

    def by_id(self) -> dict[int, Component]:
        return {c.id: c for c in self.components}

    def label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.components:
            counts[c.label] = counts.get(c.label, 0) + 1
        return counts

    def replace_components(self, components: Iterable[Component]) -> Layout:
        return Layout(self.canvas, self.membership, tuple(components))

    def checked(self) -> Layout:
        problems = validate_layout(self)
        if problems:
            raise LayoutError(problems)
        return self


@dataclass(frozen=True)
class Instance:
    cad: Layout
    net: Layout

    def __post_init__(self):
        if self.cad.membership is not Membership.CAD:
            raise LayoutError(["cad layout must have membership cad"])
        if self.net.membership is not Membership.NET:
            raise LayoutError(["net layout must have membership net"])

    def labels(self) -> list[str]:
        return sorted({c.label for c in self.cad} | {c.label for c in self.net})


def validate_layout(l: Layout) -> list[str]:
    """Return every violated layout invariant; an empty list means ok."""
    problems: list[str] = []
    w, h = l.canvas
    if w <= 0 or h <= 0:
        problems.append(f"non-positive canvas {w}x{h}")
    seen: set[int] = set()
    for c in l.components:
        where = f"component {c.id}"
        if c.id in seen:
            problems.append(f"duplicate id {c.id}")
        seen.add(c.id)
        if c.id < 0:
            problems.append(f"{where}: negative id")
        if not is_label(c.label):
            problems.append(f"{where}: invalid label {c.label!r}")
        if c.membership is not l.membership:
            problems.append(f"{where}: membership mismatch ({c.membership} in {l.membership} layout)")
        b = c.bbox
        if b.is_degenerate():
            problems.append(f"{where}: degenerate box {b.as_tuple()}")
        if min(b.as_tuple()) < 0:
            problems.append(f"{where}: negative coordinate")
        if b.x2 > w or b.y2 > h:
            problems.append(f"{where}: box outside canvas")
        if c.score is not None:
            if c.membership is not Membership.NET:
                problems.append(f"{where}: score on non-net component")
            elif not 0 <= c.score <= 1:
                problems.append(f"{where}: score out of range")
    return problems
