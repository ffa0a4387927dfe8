"""Shared builders for the test suite."""

from __future__ import annotations

import random

from ecpcheck.model import BBox, Component, Instance, Layout, Membership
from ecpcheck.synthgen import GenParams, PerturbParams, gen_layout, perturb

CAD = Membership.CAD
NET = Membership.NET


def comp(label, cid, x1, y1, x2, y2, mem=CAD, score=None):
    return Component(label, cid, BBox(x1, y1, x2, y2), mem, score)


def layout(mem, comps, canvas=(100, 100)):
    return Layout(canvas, mem, tuple(comps))


def instance(cad, net, canvas=(100, 100)):
    return Instance(layout(CAD, cad, canvas), layout(NET, net, canvas))


def swap_instance():
    """Two cad parts whose net images have traded places."""
    return instance(
        [comp("p", 1, 0, 0, 10, 10), comp("l", 2, 20, 0, 30, 10)],
        [comp("l", 11, 0, 0, 10, 10, NET), comp("p", 12, 20, 0, 30, 10, NET)],
    )


def scatter_layout(rng: random.Random, mem, n, labels, start_id=1, size=100):
    """Possibly overlapping random boxes; stresses ties and odd chains."""
    comps = []
    for k in range(n):
        x, y = rng.randrange(0, size - 10), rng.randrange(0, size - 10)
        w, h = rng.randrange(1, 12), rng.randrange(1, 12)
        comps.append(Component(rng.choice(labels), start_id + k,
                               BBox(x, y, min(x + w, size), min(y + h, size)), mem))
    return Layout((size, size), mem, tuple(comps))


def scatter_instance(rng: random.Random, max_side=6, max_labels=3):
    labels = ["a", "b", "c", "d"][: rng.randint(1, max_labels)]
    cad = scatter_layout(rng, CAD, rng.randint(0, max_side), labels, rng.randint(0, 3))
    net = scatter_layout(rng, NET, rng.randint(0, max_side), labels, rng.randint(0, 3))
    return Instance(cad, net)


def perturbed_instance(rng: random.Random, max_side=6, max_labels=3, canvas=200):
    """Generated schematic plus a jittered, thinned and padded copy."""
    n_comp = rng.randint(1, max_side)
    n_lab = rng.randint(1, min(max_labels, n_comp))
    g = GenParams(n_lab, n_comp, canvas=(canvas, canvas), seed=rng.randrange(2**32),
                  min_size=12, max_size=24, gap=6)
    cad = gen_layout(g)
    drop = rng.randint(0, min(2, n_comp))
    room = max_side - (n_comp - drop)
    q = PerturbParams(jitter=rng.randint(0, 12), drop_k=drop, add_j=rng.randint(0, min(2, room)),
                      seed=rng.randrange(2**32))
    return Instance(cad, perturb(cad, q, g.entries()[:n_lab + 2]))
