"""Landscape models behind one interface."""

from .base import DEFAULT_ENUM_LIMIT, EnumerationRefused, Landscape, OverlapSumModel
from .brw import (BranchingWalk, BrwTree, OffspringLaw, PopulationCapExceeded, brw_generate,
                  brw_vnk)
from .equicorrelated import Equicorrelated, equicorrelated_energies
from .field import DisorderField
from .polymer import DirectedPolymer
from .spin_glass import SpinGlass, box_edges
from .subgraphs import Assignment, HamiltonianCycles, SpanningTrees, canonical_cycle, edge_key
from ..disorder import ConfigurationError

MODEL_KINDS = ("assignment", "hamiltonian", "spanning_tree", "polymer", "brw", "spin_glass",
               "equicorrelated")


def make_model(kind: str, n: int, *, d: int = 1, offspring="1:0.5,2:0.5", graph: str = "sk",
               box=None, eps_rule="1/n", size: int | None = None) -> Landscape:
    """Build a model from its kind and parameters.

    For ``spin_glass`` with ``graph="ea"``, ``box`` is the box shape and ``n``
    is ignored; with ``graph="sk"``, ``n`` is the number of vertices.
    """
    if kind == "assignment":
        return Assignment(n)
    if kind == "hamiltonian":
        return HamiltonianCycles(n)
    if kind == "spanning_tree":
        return SpanningTrees(n)
    if kind == "polymer":
        return DirectedPolymer(n, d)
    if kind == "brw":
        law = offspring if isinstance(offspring, OffspringLaw) else OffspringLaw.parse(offspring)
        return BranchingWalk(n, law)
    if kind == "spin_glass":
        if graph == "sk":
            return SpinGlass.sk(n)
        if graph == "ea":
            if box is None:
                raise ConfigurationError("EA spin glass needs a box shape")
            return SpinGlass.ea(box)
        raise ConfigurationError(f"unknown spin-glass graph {graph!r}; use sk or ea")
    if kind == "equicorrelated":
        if size is None:
            return Equicorrelated(n, eps_rule)
        return Equicorrelated(n, eps_rule, size)
    raise ConfigurationError(f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")


__all__ = [
    "Assignment", "BranchingWalk", "BrwTree", "DEFAULT_ENUM_LIMIT", "DirectedPolymer",
    "DisorderField", "EnumerationRefused", "Equicorrelated", "HamiltonianCycles", "Landscape",
    "MODEL_KINDS", "OffspringLaw", "OverlapSumModel", "PopulationCapExceeded", "SpanningTrees",
    "SpinGlass", "box_edges", "brw_generate", "brw_vnk", "canonical_cycle", "edge_key",
    "equicorrelated_energies", "make_model",
]
