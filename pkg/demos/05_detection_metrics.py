"""
Scoring a detector against ground truth
=======================================

A fake detector: every ground-truth box, shifted a little, with a
confidence, plus a few confident false alarms.  AP and AR average over IoU
thresholds 0.50, 0.55, ..., 0.95.
"""

from fractions import Fraction

import numpy as np

from ecpcheck.detmetrics import evaluate, format_metrics_csv
from ecpcheck.model import BBox, Component, Layout, Membership
from ecpcheck.synthgen import GenParams, gen_layout, stream

gt = gen_layout(GenParams(4, 16, canvas=(1000, 1000), seed=2, min_size=40, max_size=80, gap=20))
rng = stream(2, "detector")

preds = []
for c in gt:
    dx, dy = (int(v) for v in rng.integers(-6, 7, size=2))
    b = c.bbox.shifted(dx, dy)
    b = BBox(max(b.x1, 0), max(b.y1, 0), min(b.x2, 1000), min(b.y2, 1000))
    score = Fraction(int(rng.integers(50, 100)), 100)
    preds.append(Component(c.label, c.id, b, Membership.NET, score))
for k in range(3):
    x, y = (int(v) for v in rng.integers(0, 900, size=2))
    label = gt.components[k].label
    preds.append(Component(label, 100 + k, BBox(x, y, x + 50, y + 50), Membership.NET, Fraction(95, 100)))

report = evaluate(gt, Layout((1000, 1000), Membership.NET, tuple(preds)))
print(f"mAP {float(report.map):.3f}  mAR {float(report.mar):.3f}")
print(f"PR area at IoU 0.5: {float(report.curve.area):.3f}")
recall = np.array([float(r) for r, _ in report.curve.points])
precision = np.array([float(p) for _, p in report.curve.points])
print("recall   ", np.round(recall, 2))
print("precision", np.round(precision, 2))
print(format_metrics_csv(report))
