"""
Checking a panel with two swapped parts
=======================================

A schematic has a ``p`` part left of an ``l`` part.  In the photographed
panel the two sit in each other's places.  Nothing is missing, so the panel
is compliant, but the matcher reports the order problem as warnings.
"""

from ecpcheck import Instance, Layout, Membership, build_relations, solve, verdict
from ecpcheck.model import BBox, Component

CAD, NET = Membership.CAD, Membership.NET

cad = Layout((100, 100), CAD, (
    Component("p", 1, BBox(0, 0, 10, 10), CAD),
    Component("l", 2, BBox(20, 0, 30, 10), CAD),
))
net = Layout((100, 100), NET, (
    Component("l", 11, BBox(0, 0, 10, 10), NET),
    Component("p", 12, BBox(20, 0, 30, 10), NET),
))
inst = Instance(cad, net)

# neighbor chains and distances; the layouts already share one canvas
rg = build_relations(inst)
for b in sorted(rg.between, key=lambda b: b.sort_key()):
    print("between", b.id, b.start, b.end, b.dir, b.mem)

sol = solve(inst, rg)
print("mapping:", sol.mapping.pairs)
print("cost (U, V, D):", tuple(sol.cost))

# each part found its label twin 20 units away; both order checks fail
v = verdict(sol, displacement_warn=10, distances=sol.distances(rg))
print("verdict:", v.status)
for w in v.warnings:
    print("  ", w)
