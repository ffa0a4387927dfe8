"""
How solve time grows with instance size
=======================================

A reduced sweep over label and component counts.  Each instance is a
generated schematic against a copy with 2% jitter, one deletion and one
insertion.  ``python -m ecpcheck bench`` runs the full sweep.
"""

from ecpcheck import bench

cfg = bench.BenchConfig(labels=(6, 12, 25), components=(12, 25, 50), samples=5, seed=1)
result = bench.run(cfg)
print(bench.format_summary_text(result))

for n, ms in bench.trend(result):
    print(f"{n:>3} components: {ms:8.2f} ms on average")

# cost vectors depend only on the seed, never on timing
again = bench.run(cfg)
print("reproducible:", [r.cost for r in result.records] == [r.cost for r in again.records])
