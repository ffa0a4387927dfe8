"""
Exporting an instance to an ASP solver
======================================

The instance and the compliance program are written as ``instance.lp`` and
``program.lp``.  If ``ECPCHECK_ASP_SOLVER`` names a solver command (for
example ``clingo`` or ``python -m clingo``), it is run and its optimum is
compared with the native one.
"""

import tempfile

from ecpcheck import Instance, build_relations, normalize_instance, solve
from ecpcheck.aspbridge import artifacts, reported_cost_matches, run_external, solver_command
from ecpcheck.ingest import parse_facts
from ecpcheck.matcher import cost
from ecpcheck.synthgen import GenParams, PerturbParams, gen_layout, perturb

g = GenParams(3, 6, seed=4)
cad = gen_layout(g)
inst = normalize_instance(Instance(cad, perturb(cad, PerturbParams(jitter=4, drop_k=1, seed=4), g.entries())))
rg = build_relations(inst)

arts = artifacts(inst, rg)
print(arts.facts_text)

# the facts parse back to the same instance and relations
fs = parse_facts(arts.facts_text)
print("round trip ok:", fs.instance == inst and fs.relations().between == rg.between)

with tempfile.TemporaryDirectory() as d:
    print("wrote", *arts.write(d))

native = solve(inst, rg)
print("native cost:", tuple(native.cost))
if solver_command():
    answer = run_external(inst, rg)
    print("external mapping:", answer.mapping.pairs)
    print("external cost:", tuple(cost(inst, rg, answer.mapping)),
          "reported cost agrees:", reported_cost_matches(answer, native.cost))
else:
    print("set ECPCHECK_ASP_SOLVER to cross-check with an ASP solver")
