"""ASP export of an instance and import of an external solver's answer.

``emit_facts`` and ``emit_program`` produce ``instance.lp`` and
``program.lp``; any ASP-Core-2 solver supporting disjunction and weak
constraints can run them.  ``parse_answer_set`` reads ``mapped/2``,
``absent/2`` and ``excess/2`` atoms back.  Solver output framing differs:
plain atom streams, clingo's ``Answer:``/``Optimization:`` blocks and
DLV2's ``{...}``/``COST w@l`` lines are understood; other solvers may need
an adapter.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Optional

from .ingest import format_between, format_canvas, format_manhattan, format_object
from .matcher import CostVector, Mapping
from .model import Instance
from .topology import RelationGraph

SOLVER_ENV = "ECPCHECK_ASP_SOLVER"

PROGRAM = """\
% neighbor relations
previous(ID,Start_ID,D,M) :- between(ID,Start_ID,_,D,M).
after(ID,End_ID,D,M) :- between(ID,_,End_ID,D,M).

% candidate pairs share a label
simpObject(C1,ID1,M) :- object(C1,ID1,_,_,_,_,M).
mapped(ID1,ID2) | noMapped(ID1,ID2) :- simpObject(C1,ID1,"cad"), simpObject(C1,ID2,"net").

% injective in both directions
:- mapped(Cad_ID,Net_ID1), mapped(Cad_ID,Net_ID2), Net_ID1 != Net_ID2.
:- mapped(Cad_ID1,Net_ID), mapped(Cad_ID2,Net_ID), Cad_ID1 != Cad_ID2.

% level 3: unmapped cad components
atLeastOne(Cad_ID) :- mapped(Cad_ID,_).
:~ simpObject(C1,ID1,"cad"), not atLeastOne(ID1). [1@3,C1,ID1]

% level 2: neighborhood violations
:~ mapped(Cad_ID1,Net_ID1), mapped(Cad_ID2,Net_ID2), previous(Cad_ID1,Cad_ID2,DIR,"cad"), not previous(Net_ID1,Net_ID2,DIR,"net"). [1@2,Cad_ID1,Net_ID1,Cad_ID2,Net_ID2,DIR]
:~ mapped(Cad_ID1,Net_ID1), mapped(Cad_ID2,Net_ID2), after(Cad_ID1,Cad_ID2,DIR,"cad"), not after(Net_ID1,Net_ID2,DIR,"net"). [1@2,Cad_ID1,Net_ID1,Cad_ID2,Net_ID2,DIR]
:~ mapped(Cad_ID1,Net_ID1), previous(Cad_ID1,Cad_ID2,DIR,"cad"), absent(_,Cad_ID2). [1@2,Cad_ID1,Net_ID1,Cad_ID2,DIR]
:~ mapped(Cad_ID1,Net_ID1), after(Cad_ID1,Cad_ID2,DIR,"cad"), absent(_,Cad_ID2). [1@2,Cad_ID1,Net_ID1,Cad_ID2,DIR]

% level 1: displacement
:~ mapped(Cad_ID,Net_ID), manhattan(Cad_ID,Net_ID,Dis,"cad","net"). [Dis@1,Cad_ID,Net_ID,Dis]

% anomalies
mappedCad(ID1) :- mapped(ID1,_).
mappedNet(ID1) :- mapped(_,ID1).
absent(C1,ID1) :- simpObject(C1,ID1,"cad"), not mappedCad(ID1).
excess(C1,ID1) :- simpObject(C1,ID1,"net"), not mappedNet(ID1).
"""


class AnswerSetError(ValueError):
    pass


def emit_program() -> str:
    return PROGRAM


def emit_facts(inst: Instance, rg: RelationGraph) -> str:
    lines = []
    for layout in (inst.cad, inst.net):
        if len(layout):
            lines.append(format_canvas(layout))
    for layout in (inst.cad, inst.net):
        lines.extend(format_object(c) for c in layout.components)
    lines.extend(format_between(b) for b in sorted(rg.between, key=lambda b: b.sort_key()))
    lines.extend(format_manhattan(m) for m in sorted(rg.manhattan, key=lambda m: m.sort_key()))
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class AspArtifacts:
    facts_text: str
    program_text: str

    def write(self, directory) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        facts = directory / "instance.lp"
        program = directory / "program.lp"
        facts.write_text(self.facts_text)
        program.write_text(self.program_text)
        return facts, program


def artifacts(inst: Instance, rg: RelationGraph) -> AspArtifacts:
    return AspArtifacts(emit_facts(inst, rg), emit_program())


@dataclass(frozen=True)
class AnswerSet:
    mapping: Mapping
    absent: tuple[tuple[str, int], ...]
    excess: tuple[tuple[str, int], ...]
    cost: Optional[CostVector] = None
    reported: tuple[int, ...] = ()


_ATOM = re.compile(r'\b(mapped|absent|excess)\(([^()]*)\)')
_PAIR = re.compile(r'\s*(-?\d+)\s*,\s*(-?\d+)\s*')
_LABELLED = re.compile(r'\s*"([^"]*)"\s*,\s*(-?\d+)\s*')
_DLV_COST = re.compile(r'(-?\d+)@(\d+)')


def _last_block(text: str) -> tuple[str, Optional[str]]:
    lines = text.splitlines()
    starts = [k for k, line in enumerate(lines) if line.startswith("Answer:")]
    cost_line = None
    if starts:
        body = []
        for line in lines[starts[-1] + 1:]:
            if line.startswith("Optimization:"):
                cost_line = line
                break
            if line.startswith(("Answer:", "OPTIMUM", "SATISFIABLE", "UNSATISFIABLE", "Models")):
                break
            body.append(line)
        return "\n".join(body), cost_line
    for line in lines:
        if line.startswith(("COST", "Optimization:")):
            cost_line = line
    body = [line for line in lines if not line.startswith(("COST", "Optimization:", "OPTIMUM"))]
    # DLV2 prints successive improving models; keep the last one
    models = [line for line in body if line.strip().startswith("{")]
    if models:
        return models[-1], cost_line
    return "\n".join(body), cost_line


def _parse_cost(line: Optional[str]) -> tuple[Optional[CostVector], tuple[int, ...]]:
    if line is None:
        return None, ()
    if line.startswith("COST"):
        levels = {int(l): int(w) for w, l in _DLV_COST.findall(line)}
        if not set(levels) <= {1, 2, 3}:
            raise AnswerSetError(f"unexpected priority levels in {line!r}")
        values = tuple(levels.get(l, 0) for l in (3, 2, 1))
        return CostVector(*values), values
    try:
        values = tuple(int(t) for t in line.split(":", 1)[1].split())
    except ValueError:
        raise AnswerSetError(f"malformed cost line {line!r}") from None
    if len(values) == 3:
        return CostVector(*values), values
    return None, values


def parse_answer_set(text: str) -> AnswerSet:
    """Extract mapping, absent and excess atoms (and cost, if printed)."""
    body, cost_line = _last_block(text)
    pairs: list[tuple[int, int]] = []
    absent: set[tuple[str, int]] = set()
    excess: set[tuple[str, int]] = set()
    for name, args in _ATOM.findall(body):
        if name == "mapped":
            m = _PAIR.fullmatch(args)
            if m is None:
                raise AnswerSetError(f"malformed atom mapped({args})")
            pairs.append((int(m.group(1)), int(m.group(2))))
        else:
            m = _LABELLED.fullmatch(args)
            if m is None:
                raise AnswerSetError(f"malformed atom {name}({args})")
            (absent if name == "absent" else excess).add((m.group(1), int(m.group(2))))
    for word in re.findall(r'\b(?:mapped|absent|excess)\b(?!\()', body):
        raise AnswerSetError(f"malformed atom {word!r}")
    cad_ids = [c for c, _ in pairs]
    net_ids = [n for _, n in pairs]
    if len(set(cad_ids)) != len(cad_ids) or len(set(net_ids)) != len(net_ids):
        raise AnswerSetError("inconsistent answer: an id is mapped twice")
    if set(cad_ids) & {i for _, i in absent}:
        raise AnswerSetError("inconsistent answer: a cad id is both mapped and absent")
    if set(net_ids) & {i for _, i in excess}:
        raise AnswerSetError("inconsistent answer: a net id is both mapped and excess")
    cost, reported = _parse_cost(cost_line)
    return AnswerSet(Mapping.of(pairs), tuple(sorted(absent)), tuple(sorted(excess)), cost, reported)


def reported_cost_matches(answer: AnswerSet, cost: CostVector) -> bool:
    """Whether the solver-reported cost agrees with ``cost``.

    clingo omits priority levels that have no ground weak constraint, so a
    short report matches when some choice of levels reproduces it and every
    omitted level is zero in ``cost``.
    """
    if answer.cost is not None:
        return answer.cost == cost
    values = answer.reported
    full = tuple(cost)
    for keep in combinations(range(3), len(values)):
        if tuple(full[k] for k in keep) == values and all(full[k] == 0 for k in range(3) if k not in keep):
            return True
    return False


def solver_command() -> Optional[list[str]]:
    cmd = os.environ.get(SOLVER_ENV)
    return shlex.split(cmd) if cmd else None


def run_external(inst: Instance, rg: RelationGraph, command: Optional[list[str]] = None,
                 timeout: float = 120.0) -> AnswerSet:
    """Run an external ASP solver on ``program.lp`` and ``instance.lp``."""
    command = command or solver_command()
    if not command:
        raise RuntimeError(f"no ASP solver configured; set {SOLVER_ENV}")
    with tempfile.TemporaryDirectory() as tmp:
        facts, program = artifacts(inst, rg).write(tmp)
        proc = subprocess.run(command + [str(program), str(facts)], capture_output=True,
                              text=True, timeout=timeout)
    out = proc.stdout
    if "UNSATISFIABLE" in out or not re.search(r"Answer:|\{|mapped|absent|excess", out):
        if len(inst.cad) or len(inst.net):
            raise RuntimeError(f"solver produced no answer set (exit {proc.returncode}): {proc.stderr.strip()}")
    return parse_answer_set(out)
