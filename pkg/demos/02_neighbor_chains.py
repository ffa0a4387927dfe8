"""
Neighbor chains on a normalized grid
====================================

Layouts from different sources have different canvases.  Both are rescaled
to a 1000 x 1000 grid before neighbors and distances are computed.
"""

from ecpcheck import Layout, Membership, normalize
from ecpcheck.model import BBox, Component
from ecpcheck.topology import build_between, derive_relations

CAD = Membership.CAD

# a 320 x 320 schematic: one rail of three parts and a fourth part below
l = Layout((320, 320), CAD, (
    Component("relay", 1, BBox(0, 0, 32, 32), CAD),
    Component("fuse", 2, BBox(64, 0, 96, 32), CAD),
    Component("relay", 3, BBox(128, 0, 160, 32), CAD),
    Component("timer", 4, BBox(64, 64, 96, 96), CAD),
))
n = normalize(l, 1000)
for c in n:
    print(c.id, c.label, c.bbox.as_tuple(), "center", c.center)

# boxes are neighbors only when their projections overlap strictly
facts = build_between(n)
for b in sorted(facts, key=lambda b: b.sort_key()):
    print(f"between({b.id},{b.start},{b.end},{b.dir})")

rg = derive_relations(facts)
print("previous:", sorted((i, j, d) for i, j, d, _ in rg.previous if j is not None))
print("after:   ", sorted((i, j, d) for i, j, d, _ in rg.after if j is not None))
