"""Command-line front end.

``check`` exits 0 when the net layout realizes the cad layout (nothing
absent, nothing excess), 1 when it does not and 2 on usage, parse or
internal errors.  Order and displacement findings are warnings and never
change the exit code.  The other subcommands exit 0 on success and 2 on
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import aspbridge, bench, detmetrics
from .ingest import ParseError, format_layout, parse_detections, parse_facts, parse_layout, parse_score
from .matcher import DEFAULT_TIMEOUT, MappingError, Solution, solve, verdict
from .matcher import cost as mapping_cost
from .model import Instance, Layout, LayoutError, Membership
from .synthgen import GenerationError, GenParams, PerturbParams, gen_layout, parse_catalog, perturb
from .topology import RelationGraph, build_relations, normalize, normalize_instance

SCHEMA_VERSION = 1
DEFAULT_GRID = 1000

EXIT_OK = 0
EXIT_NONCOMPLIANT = 1
EXIT_ERROR = 2


class UsageError(ValueError):
    pass


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _is_fact_text(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("%", 1)[0].strip()
        if line and not line.startswith("#"):
            return "(" in line.split()[0]
    return False


def _is_detection_text(text: str) -> bool:
    """Detection files use ``detection`` records or score every component."""
    comps = 0
    scored = 0
    for raw in text.splitlines():
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "detection":
            return True
        if toks[0] == "component":
            comps += 1
            scored += len(toks) == 8
    return comps > 0 and scored == comps


def _score_threshold(value: str) -> Fraction:
    return parse_score(value)


def load_instance(args) -> tuple[Instance, Optional[RelationGraph]]:
    """Build the instance from ``--facts`` or ``--cad``/``--net``.

    Returns explicit relations only when every source is a fact file;
    otherwise the caller computes them after normalizing.
    """
    if args.facts:
        if args.cad or args.net:
            raise UsageError("--facts cannot be combined with --cad/--net")
        fs = parse_facts(_read(args.facts))
        return fs.instance, fs.relations(args.grid)
    if not args.cad or not args.net:
        raise UsageError("need --facts, or both --cad and --net")
    cad_text, net_text = _read(args.cad), _read(args.net)
    if _is_fact_text(cad_text) and _is_fact_text(net_text):
        fs = parse_facts(cad_text + "\n" + net_text)
        return fs.instance, fs.relations(args.grid)
    if _is_fact_text(cad_text):
        cad = parse_facts(cad_text).instance.cad
    else:
        cad = parse_layout(cad_text)
    if _is_fact_text(net_text):
        net = parse_facts(net_text).instance.net
    elif _is_detection_text(net_text):
        net = parse_detections(net_text, args.score_threshold)
    else:
        net = parse_layout(net_text)
    return Instance(retag(cad, Membership.CAD), retag(net, Membership.NET)), None


def retag(l: Layout, mem: Membership) -> Layout:
    """The flag a layout file is passed under decides its membership."""
    if l.membership is mem:
        return l
    comps = tuple(replace(c, membership=mem, score=c.score if mem is Membership.NET else None)
                  for c in l.components)
    return Layout(l.canvas, mem, comps)


def build_report(sol: Solution, rg: RelationGraph, displacement_warn: Optional[int],
                 timings: dict[str, float]) -> dict:
    v = verdict(sol, displacement_warn, sol.distances(rg))
    return {
        "schema_version": SCHEMA_VERSION,
        "verdict": v.status,
        "optimal": sol.optimal,
        "cost": {"U": sol.cost.U, "V": sol.cost.V, "D": sol.cost.D},
        "mapping": [list(p) for p in sol.mapping.pairs],
        "absent": [{"label": l, "id": i} for l, i in sol.absent],
        "excess": [{"label": l, "id": i} for l, i in sol.excess],
        "violations": [
            {"kind": x.kind, "cad": list(x.cad), "net": list(x.net), "dir": x.dir} for x in sol.violations
        ],
        "warnings": list(v.warnings),
        "timings_ms": {k: round(t, 3) for k, t in timings.items()},
    }


def render_report_text(r: dict) -> str:
    c = r["cost"]
    lines = [
        f"verdict: {r['verdict']}" + ("" if r["optimal"] else " (search timed out; mapping may be suboptimal)"),
        f"cost: U={c['U']} V={c['V']} D={c['D']}",
        "mapping: " + (" ".join(f"{a}->{b}" for a, b in r["mapping"]) or "(empty)"),
    ]
    for key in ("absent", "excess"):
        items = r[key]
        lines.append(f"{key}: " + (", ".join(f"{x['label']}#{x['id']}" for x in items) or "none"))
    for w in r["warnings"]:
        lines.append(f"warning: {w}")
    t = r["timings_ms"]
    lines.append("timings: " + ", ".join(f"{k} {v:.1f} ms" for k, v in t.items()))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    inst, rg = load_instance(args)
    t1 = time.perf_counter()
    if rg is None:
        rg = build_relations(normalize_instance(inst, args.grid))
    t2 = time.perf_counter()
    sol = solve(inst, rg, timeout=args.timeout)
    t3 = time.perf_counter()
    timings = {"parse": (t1 - t0) * 1000, "topology": (t2 - t1) * 1000, "solve": (t3 - t2) * 1000}
    report = build_report(sol, rg, args.displacement_warn, timings)
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        _emit(render_report_text(report), args.out)
    return EXIT_OK if report["verdict"] == "compliant" else EXIT_NONCOMPLIANT


def cmd_gen(args) -> int:
    catalog = tuple(parse_catalog(_read(args.catalog))) if args.catalog else None
    g = GenParams(args.labels, args.components, canvas=tuple(args.canvas), seed=args.seed,
                  min_size=args.min_size, max_size=args.max_size, gap=args.gap, catalog=catalog)
    cad = gen_layout(g)
    q = PerturbParams(jitter=args.jitter, drop_k=args.drop, add_j=args.add, swap_s=args.swap, seed=args.seed)
    net = perturb(cad, q, g.entries())
    out = Path(args.out)
    write_atomic(out / "cad.txt", format_layout(cad))
    write_atomic(out / "net.txt", format_layout(net))
    print(f"wrote {out / 'cad.txt'} ({len(cad)} components) and {out / 'net.txt'} ({len(net)} components)")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(
        labels=tuple(args.labels), components=tuple(args.components), samples=args.samples,
        seed=args.seed, timeout=args.timeout, full_sweep=args.full_sweep, grid=args.grid,
    )
    result = bench.run(cfg, workers=args.workers)
    if args.out:
        out = Path(args.out)
        write_atomic(out / "records.csv", bench.format_records_csv(result.records))
        write_atomic(out / "summary.csv", bench.format_summary_csv(result))
    if args.format == "json":
        print(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "cells": [c.__dict__ for c in result.cells],
            "avg_ms": result.avg_ms,
            "max_ms": result.max_ms,
            "timeouts": result.timeouts,
        }, indent=2))
    else:
        sys.stdout.write(bench.format_summary_text(result))
    return EXIT_OK


def cmd_emit_asp(args) -> int:
    inst, rg = load_instance(args)
    if rg is None:
        rg = build_relations(normalize_instance(inst, args.grid))
    arts = aspbridge.artifacts(inst, rg)
    if args.out:
        out = Path(args.out)
        write_atomic(out / "instance.lp", arts.facts_text)
        write_atomic(out / "program.lp", arts.program_text)
    else:
        sys.stdout.write(arts.program_text + "\n" + arts.facts_text)
    if not args.cross_check:
        return EXIT_OK
    command = aspbridge.solver_command()
    if command is None:
        raise UsageError(f"--cross-check needs an ASP solver command in ${aspbridge.SOLVER_ENV}")
    answer = aspbridge.run_external(inst, rg, command, timeout=args.timeout)
    native = solve(inst, rg, timeout=args.timeout)
    external = mapping_cost(inst, rg, answer.mapping)
    agree = external == native.cost and aspbridge.reported_cost_matches(answer, native.cost)
    print(f"native cost {tuple(native.cost)}, external cost {tuple(external)}: {'agree' if agree else 'DISAGREE'}",
          file=sys.stderr)
    return EXIT_OK if agree else EXIT_NONCOMPLIANT


def _load_gt(path: str) -> Layout:
    text = _read(path)
    if _is_fact_text(text):
        return parse_facts(text).instance.cad
    return parse_layout(text)


def cmd_metrics(args) -> int:
    gt_path = args.cad
    pred_path = args.net
    if not gt_path or not pred_path:
        raise UsageError("metrics needs --cad (ground truth) and --net (predictions)")
    gt = _load_gt(gt_path)
    pred_text = _read(pred_path)
    if _is_detection_text(pred_text):
        pred = parse_detections(pred_text, args.score_threshold)
    else:
        pred = parse_layout(pred_text)
    if gt.canvas != pred.canvas:
        gt, pred = normalize(gt, args.grid), normalize(pred, args.grid)
    if not 0 <= args.iou < 1:
        raise UsageError("--iou must lie in [0, 1)")
    report = detmetrics.evaluate(gt, pred, args.iou)
    if args.format == "json":
        text = json.dumps({
            "schema_version": SCHEMA_VERSION,
            "iou_threshold": float(report.iou_threshold),
            "map": float(report.map),
            "mar": float(report.mar),
            "per_label": [
                {"label": s.label, "n_gt": s.n_gt, "ap": float(s.ap), "ar": float(s.ar)}
                for s in report.per_label.values()
            ],
            "pr_curve": {"area": float(report.curve.area),
                         "points": [[float(r), float(p)] for r, p in report.curve.points]},
        }, indent=2) + "\n"
    elif args.format == "csv":
        text = detmetrics.format_metrics_csv(report)
    else:
        lines = [f"mAP {float(report.map):.4f}  mAR {float(report.mar):.4f}",
                 f"PR area at IoU {float(report.iou_threshold):g}: {float(report.curve.area):.4f}"]
        for s in report.per_label.values():
            lines.append(f"  {s.label:<16} n_gt={s.n_gt:<4} AP={float(s.ap):.4f} AR={float(s.ar):.4f}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _add_sources(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cad", help="cad layout or fact file")
    p.add_argument("--net", help="net layout, detection or fact file")
    p.add_argument("--facts", help="fact file holding both layouts (and optional relation facts)")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="normalization grid size (default 1000)")
    p.add_argument("--score-threshold", type=_score_threshold, default=Fraction(1, 2),
                   help="keep detections scoring at least this (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecpcheck", description="Component layout compliance checking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a net layout against a cad layout")
    _add_sources(p)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="solver timeout in seconds")
    p.add_argument("--displacement-warn", type=int, default=None,
                   help="warn about mapped pairs displaced by more than this many grid units")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a cad layout and a perturbed net layout")
    p.add_argument("--labels", type=int, required=True)
    p.add_argument("--components", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--canvas", type=int, nargs=2, default=(1000, 1000), metavar=("W", "H"))
    p.add_argument("--min-size", type=int, default=40)
    p.add_argument("--max-size", type=int, default=80)
    p.add_argument("--gap", type=int, default=20)
    p.add_argument("--jitter", type=int, default=0)
    p.add_argument("--drop", type=int, default=0)
    p.add_argument("--add", type=int, default=0)
    p.add_argument("--swap", type=int, default=0)
    p.add_argument("--catalog", help="catalog file, one '<label> <width> <height>' per line")
    p.add_argument("--out", required=True, help="output directory for cad.txt and net.txt")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the solver over generated instances")
    p.add_argument("--labels", type=int, nargs="+", default=list(bench.DEFAULT_LABELS))
    p.add_argument("--components", type=int, nargs="+", default=list(bench.DEFAULT_COMPONENTS))
    p.add_argument("--samples", type=int, default=39, help="instances per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--full-sweep", action="store_true", help="every integer in the label and component ranges")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="directory for records.csv and summary.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("emit-asp", help="write instance.lp and program.lp")
    _add_sources(p)
    p.add_argument("--out", help="output directory (default: print to stdout)")
    p.add_argument("--cross-check", action="store_true",
                   help=f"run the solver named in ${aspbridge.SOLVER_ENV} and compare with the native cost")
    p.add_argument("--timeout", type=float, default=120.0)
    p.set_defaults(func=cmd_emit_asp)

    p = sub.add_parser("metrics", help="detection AP/AR and PR curve")
    p.add_argument("--cad", help="ground-truth layout")
    p.add_argument("--net", help="predicted detections")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--score-threshold", type=_score_threshold, default=Fraction(0),
                   help="drop predictions scoring below this before evaluation (default 0)")
    p.add_argument("--iou", type=Fraction, default=Fraction(1, 2), help="IoU threshold for the PR curve")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, LayoutError, MappingError, GenerationError,
            aspbridge.AnswerSetError, ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
