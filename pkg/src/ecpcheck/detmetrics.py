"""Detection metrics: IoU, greedy matching, PR curves, AP/AR and mAP/mAR.

All quantities are exact fractions.  Predictions are matched greedily in
descending score order (ties to the smaller id), each to the unmatched
same-label ground-truth box of highest IoU, provided that IoU exceeds the
threshold.  AP for a label is the PR-curve area averaged over a grid of IoU
thresholds; AR is the recall with every prediction kept, averaged over the
same grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import BBox, Component, Layout

DEFAULT_IOU_GRID = tuple(Fraction(50 + 5 * k, 100) for k in range(10))


def as_fraction(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def iou(b: BBox, bh: BBox) -> Fraction:
    iw = min(b.x2, bh.x2) - max(b.x1, bh.x1)
    ih = min(b.y2, bh.y2) - max(b.y1, bh.y1)
    inter = iw * ih if iw > 0 and ih > 0 else 0
    union = b.area + bh.area - inter
    return Fraction(inter, union) if union else Fraction(0)


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> Fraction:
        d = self.tp + self.fp
        return Fraction(self.tp, d) if d else Fraction(1)

    @property
    def recall(self) -> Fraction:
        d = self.tp + self.fn
        return Fraction(self.tp, d) if d else Fraction(1)


def _score(c: Component) -> Fraction:
    return Fraction(1) if c.score is None else c.score


def match(gt: Iterable[Component], pred: Iterable[Component], iou_threshold=Fraction(1, 2),
          score_threshold=0) -> MatchCounts:
    theta = as_fraction(iou_threshold)
    s = as_fraction(score_threshold)
    gts = list(gt)
    kept = sorted((p for p in pred if _score(p) >= s), key=lambda p: (-_score(p), p.id))
    taken = [False] * len(gts)
    tp = 0
    for p in kept:
        best, best_iou = None, None
        for k, g in enumerate(gts):
            if taken[k] or g.label != p.label:
                continue
            o = iou(g.bbox, p.bbox)
            if o > theta and (best_iou is None or o > best_iou):
                best, best_iou = k, o
        if best is not None:
            taken[best] = True
            tp += 1
    return MatchCounts(tp, len(kept) - tp, len(gts) - tp)


@dataclass(frozen=True)
class PrCurve:
    points: tuple[tuple[Fraction, Fraction], ...]
    area: Fraction


def curve_area(points: Sequence[tuple[Fraction, Fraction]]) -> Fraction:
    """Step integral of the right-max precision envelope over recall."""
    pts = sorted(points, key=lambda rp: rp[0])
    env = []
    running = Fraction(0)
    for _, p in reversed(pts):
        running = max(running, p)
        env.append(running)
    env.reverse()
    area = Fraction(0)
    prev_r = Fraction(0)
    for (r, _), e in zip(pts, env):
        area += (r - prev_r) * e
        prev_r = r
    return area


def pr_curve(gt: Iterable[Component], pred: Iterable[Component], iou_threshold=Fraction(1, 2)) -> PrCurve:
    gts, preds = list(gt), list(pred)
    points = []
    for s in sorted({_score(p) for p in preds}, reverse=True):
        m = match(gts, preds, iou_threshold, s)
        points.append((m.recall, m.precision))
    return PrCurve(tuple(points), curve_area(points))


@dataclass(frozen=True)
class LabelScore:
    label: str
    n_gt: int
    ap: Fraction
    ar: Fraction


def ap_ar(gt: Layout, pred: Layout, thresholds: Sequence = DEFAULT_IOU_GRID) -> dict[str, LabelScore]:
    grid = [as_fraction(t) for t in thresholds]
    if not grid:
        raise ValueError("need at least one IoU threshold")
    if any(not 0 <= t < 1 for t in grid):
        raise ValueError("IoU thresholds must lie in [0, 1)")
    labels = sorted({c.label for c in gt} | {c.label for c in pred})
    out = {}
    for label in labels:
        g = [c for c in gt if c.label == label]
        p = [c for c in pred if c.label == label]
        ap = sum((pr_curve(g, p, t).area for t in grid), Fraction(0)) / len(grid)
        ar = sum((match(g, p, t, 0).recall for t in grid), Fraction(0)) / len(grid)
        out[label] = LabelScore(label, len(g), ap, ar)
    return out


def map_mar(scores: dict[str, LabelScore] | Iterable[LabelScore]) -> tuple[Fraction, Fraction]:
    items = list(scores.values()) if isinstance(scores, dict) else list(scores)
    items = [s for s in items if s.n_gt > 0]
    if not items:
        raise ValueError("no label has ground truth")
    n = len(items)
    return sum((s.ap for s in items), Fraction(0)) / n, sum((s.ar for s in items), Fraction(0)) / n


@dataclass(frozen=True)
class MetricsReport:
    per_label: dict[str, LabelScore]
    map: Fraction
    mar: Fraction
    curve: PrCurve
    iou_threshold: Fraction


def evaluate(gt: Layout, pred: Layout, iou_threshold=Fraction(1, 2),
             thresholds: Optional[Sequence] = None) -> MetricsReport:
    """Per-label AP/AR, mAP/mAR and the all-label PR curve at one IoU."""
    scores = ap_ar(gt, pred, DEFAULT_IOU_GRID if thresholds is None else thresholds)
    m_ap, m_ar = map_mar(scores)
    theta = as_fraction(iou_threshold)
    return MetricsReport(scores, m_ap, m_ar, pr_curve(gt, pred, theta), theta)


def _num(x: Fraction) -> str:
    return f"{float(x):.6f}"


def format_metrics_csv(report: MetricsReport) -> str:
    lines = ["kind,label,n_gt,ap,ar,recall,precision"]
    for s in report.per_label.values():
        lines.append(f"label,{s.label},{s.n_gt},{_num(s.ap)},{_num(s.ar)},,")
    lines.append(f"mean,,,{_num(report.map)},{_num(report.mar)},,")
    lines.append(f"pr_area,,,{_num(report.curve.area)},,,")
    for r, p in report.curve.points:
        lines.append(f"pr_point,,,,,{_num(r)},{_num(p)}")
    return "\n".join(lines) + "\n"
