"""Censuses of connected graphs and free trees, and labeled connected-graph counts."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .graph import LabeledGraph, canonical_form, canonical_relabeling

MAX_GRAPH_NODES = 7
MAX_TREE_NODES = 12

FAMILIES = ("graphs", "trees")


@dataclass(frozen=True)
class ClassCensus:
    """One representative per isomorphism class, sorted by canonical code."""

    family: str
    v: int
    representatives: tuple[LabeledGraph, ...]
    codes: tuple[bytes, ...]

    def __len__(self) -> int:
        return len(self.representatives)

    def index_of(self, code: bytes) -> int:
        return self._index()[code]

    def _index(self) -> dict[bytes, int]:
        cached = self.__dict__.get("_code_index")
        if cached is None:
            cached = {c: i for i, c in enumerate(self.codes)}
            object.__setattr__(self, "_code_index", cached)
        return cached


def _finish(family: str, v: int, by_code: dict[bytes, LabeledGraph]) -> ClassCensus:
    codes = tuple(sorted(by_code))
    reps = []
    for c in codes:
        g = by_code[c]
        reps.append(g.relabel(canonical_relabeling(g)))
    return ClassCensus(family, v, tuple(reps), codes)


@lru_cache(maxsize=None)
def enumerate_connected_graphs(v: int) -> ClassCensus:
    """All connected graphs on ``v`` nodes up to isomorphism (``1 <= v <= 7``).

    Every connected graph has a non-cut vertex, so each class on ``v`` nodes
    arises from a class on ``v - 1`` nodes by adding one vertex joined to a
    nonempty subset of the old ones.
    """
    if not 1 <= v <= MAX_GRAPH_NODES:
        raise ValueError(f"v must lie in [1, {MAX_GRAPH_NODES}], got {v}")
    if v == 1:
        g = LabeledGraph(1)
        return _finish("graphs", 1, {canonical_form(g): g})
    found: dict[bytes, LabeledGraph] = {}
    for base in enumerate_connected_graphs(v - 1).representatives:
        for subset in range(1, 1 << (v - 1)):
            new_edges = [(u, v - 1) for u in range(v - 1) if subset >> u & 1]
            g = LabeledGraph(v, base.edges + tuple(new_edges))
            found.setdefault(canonical_form(g), g)
    return _finish("graphs", v, found)


@lru_cache(maxsize=None)
def enumerate_trees(v: int) -> ClassCensus:
    """All free trees on ``v`` nodes up to isomorphism (``1 <= v <= 12``), grown leaf by leaf."""
    if not 1 <= v <= MAX_TREE_NODES:
        raise ValueError(f"v must lie in [1, {MAX_TREE_NODES}], got {v}")
    if v == 1:
        g = LabeledGraph(1)
        return _finish("trees", 1, {canonical_form(g): g})
    found: dict[bytes, LabeledGraph] = {}
    for base in enumerate_trees(v - 1).representatives:
        for u in range(v - 1):
            g = LabeledGraph(v, base.edges + ((u, v - 1),))
            found.setdefault(canonical_form(g), g)
    return _finish("trees", v, found)


def census(family: str, v: int) -> ClassCensus:
    if family == "graphs":
        return enumerate_connected_graphs(v)
    if family == "trees":
        return enumerate_trees(v)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


@lru_cache(maxsize=None)
def count_connected_labeled(v: int) -> int:
    """Exact number of connected labeled graphs on ``v`` nodes."""
    if v < 1:
        raise ValueError("v must be positive")
    total = 2 ** comb(v, 2)
    for k in range(1, v):
        total -= comb(v - 1, k - 1) * count_connected_labeled(k) * 2 ** comb(v - k, 2)
    return total
