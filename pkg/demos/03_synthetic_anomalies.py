"""
Injected anomalies and what the checker finds
=============================================

Generate a schematic, derive a "photographed" copy with jitter, two
deletions, one insertion and one position swap, then check the copy.
"""

from ecpcheck import Instance, build_relations, normalize_instance, solve, verdict
from ecpcheck.synthgen import GenParams, PerturbParams, clearance, gen_layout, perturb

g = GenParams(n_labels=6, n_components=20, canvas=(1000, 1000), seed=11, min_size=40, max_size=80, gap=20)
cad = gen_layout(g)
print(len(cad), "components,", len(cad.label_counts()), "labels, clearance", clearance(cad))

q = PerturbParams(jitter=5, drop_k=2, add_j=1, swap_s=1, seed=11)
net = perturb(cad, q, g.entries())
print("net has", len(net), "components")

inst = normalize_instance(Instance(cad, net))
sol = solve(inst, build_relations(inst))
print("cost:", tuple(sol.cost), "optimal:", sol.optimal)
print("absent:", sol.absent)
print("excess:", sol.excess)

v = verdict(sol)
print("verdict:", v.status)
# the swap and the holes left by deletions show up as order warnings
for w in v.warnings:
    print("  ", w)

# with jitter below half the clearance the chains survive untouched
calm = perturb(cad, PerturbParams(jitter=(clearance(cad) - 1) // 2, seed=3))
inst = normalize_instance(Instance(cad, calm))
print("jitter only:", tuple(solve(inst, build_relations(inst)).cost))
