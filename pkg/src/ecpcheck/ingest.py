"""Readers and writers for layout files, detection files and ASP fact files.

Layout file::

    canvas 320 320
    membership cad
    component 1 relay 0 0 10 10
    component 2 breaker 20 0 30 10 0.93   # trailing score, net only

Detection file: same header (membership optional, must be ``net``), then
either ``component <id> <label> x1 y1 x2 y2 <score>`` lines or id-less
``detection <label> x1 y1 x2 y2 <score>`` lines.  Id-less detections get
ids ``1..n`` in file order, before any score filtering.

Fact file: one fact per line, see :func:`format_object`,
:func:`format_between`, :func:`format_manhattan`.  ``canvas/3`` facts are an
extension carrying canvas sizes.  An empty layout without one borrows the
other layout's canvas; otherwise the canvas is inferred from box extents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import BBox, Component, Instance, Layout, LayoutError, Membership, validate_layout
from .topology import (
    Between,
    ManhattanFact,
    RelationGraph,
    build_between,
    build_manhattan,
    derive_relations,
    normalize_instance,
)

DEFAULT_SCORE_THRESHOLD = Fraction(1, 2)


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _int(tok: str, line: int, field: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", tok):
        if re.fullmatch(r"[+-]?(\d+\.\d*|\.\d+)([eE][+-]?\d+)?", tok):
            raise ParseError(f"fractional value {tok!r} not allowed", line, field)
        raise ParseError(f"expected integer, got {tok!r}", line, field)
    return int(tok)


def parse_score(tok: str, line: Optional[int] = None) -> Fraction:
    try:
        s = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad score {tok!r}", line, "score") from None
    if not 0 <= s <= 1:
        raise ParseError(f"score {tok} outside [0, 1]", line, "score")
    return s


def format_score(s: Fraction) -> str:
    """Shortest decimal for ``s`` when it terminates, ``p/q`` otherwise."""
    s = Fraction(s)
    den = s.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{s.numerator}/{s.denominator}"
    places = max(twos, fives)
    if places == 0:
        return str(s.numerator)
    digits = str(s.numerator * 10 ** places // s.denominator).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _raise_violations(layout: Layout):
    problems = validate_layout(layout)
    if problems:
        raise LayoutError(problems)


def _read_header(toks, no, canvas, membership):
    key = toks[0]
    if key == "canvas":
        if len(toks) != 3:
            raise ParseError("canvas needs width and height", no)
        if canvas is not None:
            raise ParseError("duplicate canvas line", no)
        w, h = _int(toks[1], no, "width"), _int(toks[2], no, "height")
        if w <= 0 or h <= 0:
            raise ParseError("canvas must be positive", no)
        return (w, h), membership
    if len(toks) != 2:
        raise ParseError("membership needs one value", no)
    try:
        return canvas, Membership(toks[1])
    except ValueError:
        raise ParseError(f"unknown membership {toks[1]!r}", no, "membership") from None


def parse_layout(text: str) -> Layout:
    canvas = None
    membership = None
    comps: list[Component] = []
    pending = []
    for no, toks in _lines(text):
        if toks[0] in ("canvas", "membership"):
            canvas, membership = _read_header(toks, no, canvas, membership)
        elif toks[0] == "component":
            if len(toks) not in (7, 8):
                raise ParseError("component needs id, label, 4 coordinates and optional score", no)
            cid = _int(toks[1], no, "id")
            coords = [_int(t, no, f) for t, f in zip(toks[3:7], ("x1", "y1", "x2", "y2"))]
            score = parse_score(toks[7], no) if len(toks) == 8 else None
            pending.append((cid, toks[2], BBox(*coords), score))
        else:
            raise ParseError(f"unknown record {toks[0]!r}", no)
    if canvas is None:
        raise ParseError("missing canvas line")
    if membership is None:
        raise ParseError("missing membership line")
    for cid, label, box, score in pending:
        comps.append(Component(label, cid, box, membership, score))
    layout = Layout(canvas, membership, tuple(comps))
    _raise_violations(layout)
    return layout


def format_layout(l: Layout) -> str:
    out = [f"canvas {l.canvas[0]} {l.canvas[1]}", f"membership {l.membership}"]
    for c in l.components:
        b = c.bbox
        line = f"component {c.id} {c.label} {b.x1} {b.y1} {b.x2} {b.y2}"
        if c.score is not None:
            line += f" {format_score(c.score)}"
        out.append(line)
    return "\n".join(out) + "\n"


def parse_detections(text: str, score_threshold=DEFAULT_SCORE_THRESHOLD) -> Layout:
    """Read a detection file, keeping detections with score >= threshold."""
    threshold = Fraction(str(score_threshold)) if isinstance(score_threshold, float) else Fraction(score_threshold)
    if not 0 <= threshold <= 1:
        raise ValueError("score_threshold must lie in [0, 1]")
    canvas = None
    membership = Membership.NET
    comps = []
    position = 0
    for no, toks in _lines(text):
        kind = toks[0]
        if kind in ("canvas", "membership"):
            canvas, membership = _read_header(toks, no, canvas, membership)
            if membership is not Membership.NET:
                raise ParseError("detection files carry net membership only", no, "membership")
            continue
        if kind == "component":
            if len(toks) != 8:
                raise ParseError("component detection needs id, label, 4 coordinates and score", no)
            position += 1
            cid = _int(toks[1], no, "id")
            rest = toks[2:]
        elif kind == "detection":
            if len(toks) != 7:
                raise ParseError("detection needs label, 4 coordinates and score", no)
            position += 1
            cid = position
            rest = toks[1:]
        else:
            raise ParseError(f"unknown record {kind!r}", no)
        coords = [_int(t, no, f) for t, f in zip(rest[1:5], ("x1", "y1", "x2", "y2"))]
        score = parse_score(rest[5], no)
        if score >= threshold:
            comps.append(Component(rest[0], cid, BBox(*coords), Membership.NET, score))
    if canvas is None:
        raise ParseError("missing canvas line")
    layout = Layout(canvas, Membership.NET, tuple(comps))
    _raise_violations(layout)
    return layout


# -- ASP facts ---------------------------------------------------------------

def format_object(c: Component) -> str:
    b = c.bbox
    return f'object("{c.label}",{c.id},{b.x1},{b.y1},{b.x2},{b.y2},"{c.membership}").'


def format_canvas(l: Layout) -> str:
    return f'canvas({l.canvas[0]},{l.canvas[1]},"{l.membership}").'


def format_between(b: Between) -> str:
    start = "none" if b.start is None else b.start
    end = "none" if b.end is None else b.end
    return f'between({b.id},{start},{end},"{b.dir}","{b.mem}").'


def format_manhattan(m: ManhattanFact) -> str:
    return f'manhattan({m.id1},{m.id2},{m.dist},"{m.mem1}","{m.mem2}").'


_NUM = r"(-?\d+)"
_STR = r'"([^"\\]*)"'
_ID_OR_NONE = r"(-?\d+|none)"
_FACT_PATTERNS = {
    "object": re.compile(rf"object\({_STR},{_NUM},{_NUM},{_NUM},{_NUM},{_NUM},{_STR}\)\."),
    "between": re.compile(rf"between\({_NUM},{_ID_OR_NONE},{_ID_OR_NONE},{_STR},{_STR}\)\."),
    "manhattan": re.compile(rf"manhattan\({_NUM},{_NUM},{_NUM},{_STR},{_STR}\)\."),
    "canvas": re.compile(rf"canvas\({_NUM},{_NUM},{_STR}\)\."),
}
_ARITY = {"object": 7, "between": 5, "manhattan": 5, "canvas": 3}


@dataclass(frozen=True)
class FactSet:
    """A parsed fact file: the instance plus any explicit relation facts."""

    instance: Instance
    between: Optional[frozenset] = None
    manhattan: Optional[frozenset] = None

    def relations(self, grid: int = 1000) -> RelationGraph:
        """Relation graph using explicit facts where given.

        Missing relation kinds are computed on the instance normalized to
        ``grid``.
        """
        between, manhattan = self.between, self.manhattan
        if between is None or manhattan is None:
            norm = normalize_instance(self.instance, grid)
            if between is None:
                between = build_between(norm.cad) | build_between(norm.net)
            if manhattan is None:
                manhattan = build_manhattan(norm)
        return derive_relations(between, manhattan)


def _membership(value: str, offset: int, no: int) -> Membership:
    try:
        return Membership(value)
    except ValueError:
        raise ParseError(f"unknown membership constant {value!r} (offset {offset})", no, "membership") from None


def _split_args(body: str) -> int:
    depth_str = False
    count = 1
    for ch in body:
        if ch == '"':
            depth_str = not depth_str
        elif ch == "," and not depth_str:
            count += 1
    return count


def parse_facts(text: str) -> FactSet:
    objects: dict[Membership, list[Component]] = {Membership.CAD: [], Membership.NET: []}
    canvases: dict[Membership, tuple[int, int]] = {}
    between: list[Between] = []
    manhattan: list[ManhattanFact] = []
    offset = 0
    for no, raw in enumerate(text.splitlines(True), 1):
        line_offset = offset
        offset += len(raw)
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        name = line.split("(", 1)[0]
        pattern = _FACT_PATTERNS.get(name)
        if pattern is None:
            raise ParseError(f"unknown predicate {name!r} at offset {line_offset}", no)
        m = pattern.fullmatch(line)
        if m is None:
            inner = line[len(name) + 1:].rsplit(")", 1)[0] if "(" in line else ""
            n_args = _split_args(inner) if inner else 0
            if n_args != _ARITY[name]:
                raise ParseError(f"arity mismatch: {name}/{n_args}, expected {name}/{_ARITY[name]}", no)
            raise ParseError(f"syntax error at offset {line_offset}: {line!r}", no)
        g = m.groups()
        if name == "object":
            mem = _membership(g[6], line_offset, no)
            box = BBox(*(int(v) for v in g[2:6]))
            objects[mem].append(Component(g[0], int(g[1]), box, mem))
        elif name == "between":
            ids = [None if v == "none" else int(v) for v in g[1:3]]
            if g[3] not in ("h", "v"):
                raise ParseError(f"unknown direction {g[3]!r}", no, "dir")
            between.append(Between(int(g[0]), ids[0], ids[1], g[3], _membership(g[4], line_offset, no)))
        elif name == "manhattan":
            manhattan.append(ManhattanFact(int(g[0]), int(g[1]), int(g[2]),
                                           _membership(g[3], line_offset, no),
                                           _membership(g[4], line_offset, no)))
        else:
            mem = _membership(g[2], line_offset, no)
            if mem in canvases:
                raise ParseError(f"duplicate canvas for {mem}", no)
            canvases[mem] = (int(g[0]), int(g[1]))
    layouts = {}
    for mem, comps in objects.items():
        canvas = canvases.get(mem)
        if canvas is None and not comps and canvases:
            canvas = next(iter(canvases.values()))
        if canvas is None:
            canvas = (max([c.bbox.x2 for c in comps] + [1]), max([c.bbox.y2 for c in comps] + [1]))
        layouts[mem] = Layout(canvas, mem, tuple(comps))
        _raise_violations(layouts[mem])
    inst = Instance(layouts[Membership.CAD], layouts[Membership.NET])
    return FactSet(inst,
                   frozenset(between) if between else None,
                   frozenset(manhattan) if manhattan else None)
