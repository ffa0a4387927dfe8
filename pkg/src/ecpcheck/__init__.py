"""Compliance checking of detected component layouts against schematics."""

from .matcher import CostVector, Mapping, Solution, Verdict, brute_force, cost, evaluate, solve, verdict
from .model import BBox, Component, Instance, Layout, LayoutError, Membership, validate_layout
from .topology import RelationGraph, build_relations, normalize, normalize_instance

__all__ = [
    "BBox", "Component", "CostVector", "Instance", "Layout", "LayoutError", "Mapping", "Membership",
    "RelationGraph", "Solution", "Verdict", "brute_force", "build_relations", "cost", "evaluate",
    "normalize", "normalize_instance", "solve", "validate_layout", "verdict",
]
