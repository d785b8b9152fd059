"""Labeled graphs, canonical codes, cuts and basic metrics.

A :class:`LabeledGraph` is an immutable value: ``n`` nodes ``0..n-1``, a sorted
tuple of undirected edges ``(u, v)`` with ``u < v`` and optional per-node
feature rows.  Canonical codes are computed by partition refinement with
individualization and automorphism pruning.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_MAX_NODES = 16
HARD_MAX_NODES = 32
INFINITE_DIAMETER = math.inf

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class GraphSizeError(ValueError):
    """Raised when a graph exceeds the configured size limit."""


@dataclass(frozen=True)
class LabeledGraph:
    n: int
    edges: tuple[tuple[int, int], ...] = ()
    features: tuple[tuple[int, ...], ...] | None = field(default=None, compare=True)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        if self.n > HARD_MAX_NODES:
            raise GraphSizeError(f"graphs beyond {HARD_MAX_NODES} nodes are not supported")
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise ValueError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if self.features is not None:
            rows = tuple(tuple(int(x) for x in row) for row in self.features)
            if len(rows) != self.n:
                raise ValueError("feature list must have exactly n rows")
            if len({len(r) for r in rows}) > 1:
                raise ValueError("feature rows must have equal length")
            object.__setattr__(self, "features", rows)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], features=None) -> "LabeledGraph":
        return cls(n, tuple(tuple(e) for e in edges), features)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def adjacency_masks(self) -> list[int]:
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return masks

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def without_features(self) -> "LabeledGraph":
        if self.features is None:
            return self
        return LabeledGraph(self.n, self.edges)

    def with_features(self, features) -> "LabeledGraph":
        return LabeledGraph(self.n, self.edges, features)

    def relabel(self, perm: Sequence[int]) -> "LabeledGraph":
        """Return the graph with node ``i`` renamed to ``perm[i]``.

        Feature rows travel with their node.
        """
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        feats = None
        if self.features is not None:
            rows = [None] * self.n
            for i, row in enumerate(self.features):
                rows[perm[i]] = row
            feats = rows
        return LabeledGraph(self.n, tuple(edges), feats)

    def induced(self, nodes: Sequence[int]) -> "LabeledGraph":
        """Subgraph induced on ``nodes``, relabeled to ``0..len(nodes)-1`` in the given order."""
        index = {v: i for i, v in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        feats = None
        if self.features is not None:
            feats = [self.features[v] for v in nodes]
        return LabeledGraph(len(nodes), tuple(edges), feats)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


def path_graph(n: int) -> LabeledGraph:
    return LabeledGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> LabeledGraph:
    return LabeledGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> LabeledGraph:
    return LabeledGraph(n, tuple(itertools.combinations(range(n), 2)))


def star_graph(n: int) -> LabeledGraph:
    """Star on ``n`` nodes with centre 0."""
    return LabeledGraph(n, tuple((0, i) for i in range(1, n)))


# ---------------------------------------------------------------------------
# canonical form


def _refine(masks: list[int], cells: list[list[int]]) -> list[list[int]]:
    # equitable refinement; sub-cells ordered by neighbour-count signature,
    # which keeps the ordered partition equivariant under relabeling
    while True:
        cell_masks = []
        for c in cells:
            m = 0
            for v in c:
                m |= 1 << v
            cell_masks.append(m)
        new_cells: list[list[int]] = []
        for c in cells:
            if len(c) == 1:
                new_cells.append(c)
                continue
            groups: dict[tuple[int, ...], list[int]] = {}
            for v in c:
                sig = tuple(bin(masks[v] & cm).count("1") for cm in cell_masks)
                groups.setdefault(sig, []).append(v)
            for sig in sorted(groups):
                new_cells.append(groups[sig])
        if len(new_cells) == len(cells):
            return new_cells
        cells = new_cells


def _leaf_code(masks: list[int], order: list[int]) -> int:
    code = 0
    n = len(order)
    for i in range(n):
        mi = masks[order[i]]
        for j in range(i + 1, n):
            code = (code << 1) | ((mi >> order[j]) & 1)
    return code


def _orbit_of(x: int, gens: list[tuple[int, ...]]) -> set[int]:
    seen = {x}
    stack = [x]
    while stack:
        y = stack.pop()
        for g in gens:
            z = g[y]
            if z not in seen:
                seen.add(z)
                stack.append(z)
    return seen


def _canonical_order(masks: list[int], initial_cells: list[list[int]]) -> tuple[int, list[int]]:
    n = len(masks)
    best_code: int | None = None
    best_order: list[int] | None = None
    automorphisms: list[tuple[int, ...]] = []

    def search(cells: list[list[int]], prefix: list[int]):
        nonlocal best_code, best_order
        cells = _refine(masks, cells)
        target = None
        for idx, c in enumerate(cells):
            if len(c) > 1 and (target is None or len(c) < len(cells[target])):
                target = idx
        if target is None:
            order = [c[0] for c in cells]
            code = _leaf_code(masks, order)
            if best_code is None or code < best_code:
                best_code, best_order = code, order
            elif code == best_code:
                # two leaves with equal code differ by an automorphism
                perm = [0] * n
                for a, b in zip(best_order, order):
                    perm[a] = b
                automorphisms.append(tuple(perm))
            return
        cell = cells[target]
        tried: list[int] = []
        for v in sorted(cell):
            if tried:
                fixing = [g for g in automorphisms if all(g[p] == p for p in prefix)]
                if fixing and any(v in _orbit_of(t, fixing) for t in tried):
                    continue
            tried.append(v)
            rest = [u for u in cell if u != v]
            child = cells[:target] + [[v], rest] + cells[target + 1:]
            search(child, prefix + [v])

    search([list(c) for c in initial_cells], [])
    assert best_code is not None and best_order is not None
    return best_code, best_order


def canonical_form(g: LabeledGraph, max_nodes: int = DEFAULT_MAX_NODES) -> bytes:
    """Return a byte code identifying the isomorphism class of ``g`` (features ignored).

    Layout: one byte holding ``n`` followed by the upper-triangular adjacency
    bitstring of the canonical relabeling, packed big-endian and zero padded.
    """
    if g.n > max_nodes:
        raise GraphSizeError(f"graph has {g.n} nodes, limit is {max_nodes}")
    masks = g.adjacency_masks()
    code, _ = _canonical_order(masks, [list(range(g.n))])
    nbits = g.n * (g.n - 1) // 2
    nbytes = (nbits + 7) // 8
    return bytes([g.n]) + (code << (nbytes * 8 - nbits)).to_bytes(nbytes, "big")


def canonical_relabeling(g: LabeledGraph, max_nodes: int = DEFAULT_MAX_NODES) -> list[int]:
    """Permutation ``perm`` such that ``g.relabel(perm)`` is the canonical representative."""
    if g.n > max_nodes:
        raise GraphSizeError(f"graph has {g.n} nodes, limit is {max_nodes}")
    _, order = _canonical_order(g.adjacency_masks(), [list(range(g.n))])
    perm = [0] * g.n
    for pos, v in enumerate(order):
        perm[v] = pos
    return perm


def is_isomorphic(g: LabeledGraph, h: LabeledGraph, max_nodes: int = DEFAULT_MAX_NODES) -> bool:
    if g.n > max_nodes or h.n > max_nodes:
        raise GraphSizeError(f"graph exceeds the {max_nodes}-node limit")
    if g.n != h.n or g.num_edges != h.num_edges:
        return False
    if sorted(g.degrees()) != sorted(h.degrees()):
        return False
    return canonical_form(g, max_nodes) == canonical_form(h, max_nodes)


# ---------------------------------------------------------------------------
# cuts


def _check_parts(g: LabeledGraph, part_a, part_b) -> tuple[set[int], set[int]]:
    a, b = set(part_a), set(part_b)
    if not a or not b:
        raise ValueError("node sets must be nonempty")
    if a & b:
        raise ValueError("node sets must be disjoint")
    for v in a | b:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range")
    return a, b


def edge_cut(g: LabeledGraph, part_a, part_b, bidirectional: bool = True) -> int:
    """Number of edges with one endpoint in each set, doubled when ``bidirectional``."""
    a, b = _check_parts(g, part_a, part_b)
    crossing = sum(1 for u, v in g.edges if (u in a and v in b) or (u in b and v in a))
    return 2 * crossing if bidirectional else crossing


def min_separating_cut(g: LabeledGraph, part_a, part_b, bidirectional: bool = False) -> int:
    """Minimum number of edges whose removal disconnects ``part_a`` from ``part_b``.

    Solved as a unit-capacity max-flow between super-nodes.
    """
    from .flow import FlowNetwork, max_flow

    a, b = _check_parts(g, part_a, part_b)
    net = FlowNetwork()
    src, snk = net.add_node("A"), net.add_node("B")
    ids = [net.add_node(i) for i in range(g.n)]
    for v in a:
        net.add_arc(src, ids[v], None)
    for v in b:
        net.add_arc(ids[v], snk, None)
    for u, v in g.edges:
        net.add_arc(ids[u], ids[v], 1)
        net.add_arc(ids[v], ids[u], 1)
    net.source, net.sink = src, snk
    value = max_flow(net)
    return 2 * value if bidirectional else value


# ---------------------------------------------------------------------------
# metrics


def bfs_distances(g: LabeledGraph, source: int, adj: list[set[int]] | None = None) -> list[float]:
    adj = adj if adj is not None else g.adjacency()
    dist: list[float] = [INFINITE_DIAMETER] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] == INFINITE_DIAMETER:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def diameter(g: LabeledGraph) -> float:
    """Longest shortest path; ``math.inf`` for disconnected graphs."""
    adj = g.adjacency()
    best: float = 0
    for s in range(g.n):
        d = max(bfs_distances(g, s, adj))
        if d == INFINITE_DIAMETER:
            return INFINITE_DIAMETER
        best = max(best, d)
    return int(best)


def is_connected(g: LabeledGraph) -> bool:
    return max(bfs_distances(g, 0)) != INFINITE_DIAMETER


def connected_components(g: LabeledGraph) -> list[list[int]]:
    adj = g.adjacency()
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = []
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------------------
# text format
#
#   line     := n ";" edges ";" features
#   edges    := "" | edge ("," edge)*          edge := u "-" v   with u < v, sorted
#   features := "" | row ("," row)*            row  := digit+    (base-s digits 0-9a-z)
#
# Only the normalized form is accepted, so print(parse(line)) == line holds
# for every accepted line.


def format_graph(g: LabeledGraph) -> str:
    edges = ",".join(f"{u}-{v}" for u, v in g.edges)
    feats = ""
    if g.features is not None:
        rows = []
        for row in g.features:
            if any(x < 0 or x >= len(_DIGITS) for x in row):
                raise ValueError("feature symbols must lie in [0, 36)")
            rows.append("".join(_DIGITS[x] for x in row))
        feats = ",".join(rows)
    return f"{g.n};{edges};{feats}"


def parse_graph(line: str) -> LabeledGraph:
    parts = line.rstrip("\n").split(";")
    if len(parts) != 3:
        raise ValueError(f"expected 3 ';'-separated fields, got {len(parts)}: {line!r}")
    n_text, edge_text, feat_text = parts
    if not n_text.isdigit() or n_text != str(int(n_text)):
        raise ValueError(f"bad node count {n_text!r}")
    n = int(n_text)
    edges = []
    if edge_text:
        for tok in edge_text.split(","):
            u_text, sep, v_text = tok.partition("-")
            if not sep or not u_text.isdigit() or not v_text.isdigit():
                raise ValueError(f"bad edge token {tok!r}")
            u, v = int(u_text), int(v_text)
            if f"{u}-{v}" != tok or u >= v:
                raise ValueError(f"edge {tok!r} is not in normalized form")
            edges.append((u, v))
        if edges != sorted(set(edges)):
            raise ValueError("edges must be sorted and unique")
    features = None
    if feat_text:
        features = []
        for row in feat_text.split(","):
            if not row or any(ch not in _DIGITS for ch in row):
                raise ValueError(f"bad feature row {row!r}")
            features.append(tuple(_DIGITS.index(ch) for ch in row))
    return LabeledGraph(n, tuple(edges), features)


def read_graphs(path) -> list[LabeledGraph]:
    with open(path) as fh:
        return [parse_graph(line) for line in fh if line.strip()]


def write_graphs(path, graphs: Iterable[LabeledGraph]) -> None:
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(format_graph(g) + "\n")
